#pragma once

// System files and deterministic CSV / JSON export.
//
// A system file is a JSON object holding exactly one of
//   {"A_diag": [a1, a2, a3], "b": [b1, b2, b3]}
//   {"A": [[...], [...], [...]], "b": [b1, b2, b3]}
//   {"lindblad_ops": [{"re": [x, y, z], "im": [x, y, z]}, ...]}
// where each Lindblad operator is sum_j (re_j + i im_j) sigma_j.

#include "bloch/chimney.hpp"
#include "bloch/critical_points.hpp"
#include "bloch/planner.hpp"
#include "bloch/survey.hpp"
#include "bloch/threads.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bloch {

/// Malformed input; the message names the source, line and field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemFile {
  LindbladSystem system;
  /// Set for the lindblad_ops form.
  std::optional<LindbladOperatorSet> operators;
};

SystemFile parse_system(const std::string& text, const std::string& source = "<input>");
SystemFile load_system(const std::string& path);

/// Fixed 17-significant-digit scientific notation.
std::string format_double(double x);

void write_critical_points_csv(std::ostream& os, const std::vector<CriticalPoint>& pts);
/// Columns: thread, kind, family, r, nx, ny, nz, f, residual, termination.
void write_threads_csv(std::ostream& os, const std::vector<Thread>& threads);
/// Columns: theta, r, nx, ny, nz, f, termination.
void write_chimney_csv(std::ostream& os, const ChimneyMesh& mesh);
/// Columns: segment, direction, r, t, hx, hy, hz.
void write_plan_csv(std::ostream& os, const Plan& plan);

/// Reads thread `index` from a CSV in the write_threads_csv layout (a bare
/// r, nx, ny, nz table is accepted as a single thread).
Thread read_thread_csv(std::istream& is, int index = 0, const std::string& source = "<input>");

std::string validation_json(const LindbladSystem& sys, const ValidationReport& report);
std::string survey_json(const SurveyConfig& cfg, const SurveyStats& stats);

}  // namespace bloch
