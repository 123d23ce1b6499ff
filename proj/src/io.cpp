#include "bloch/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bloch {

using nlohmann::json;

namespace {

// Line of the first occurrence of "key" in the raw text; 0 if absent.
int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

struct Context {
  const std::string& text;
  const std::string& source;

  [[noreturn]] void fail(const std::string& key, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << source;
    if (int line = line_of(text, key)) os << ":" << line;
    os << ": field '" << field << "': " << msg;
    throw InputError(os.str());
  }

  double number(const json& j, const std::string& key, const std::string& field) const {
    if (!j.is_number()) fail(key, field, "expected a number");
    return j.get<double>();
  }

  Vec3 vec3(const json& j, const std::string& key, const std::string& field) const {
    if (!j.is_array() || j.size() != 3) fail(key, field, "expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i)
      v[i] = number(j[i], key, field + "[" + std::to_string(i) + "]");
    return v;
  }
};

}  // namespace

SystemFile parse_system(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
  const Context ctx{text, source};
  if (!doc.is_object()) throw InputError(source + ":1: expected a JSON object");

  const bool has_diag = doc.contains("A_diag"), has_full = doc.contains("A"),
             has_ops = doc.contains("lindblad_ops");
  if (has_diag + has_full + has_ops != 1)
    throw InputError(source + ": exactly one of 'A_diag', 'A' or 'lindblad_ops' is required");
  for (const auto& item : doc.items()) {
    const std::string& k = item.key();
    if (k != "A_diag" && k != "A" && k != "b" && k != "lindblad_ops" && k != "name")
      ctx.fail(k, k, "unknown field");
  }

  if (has_ops) {
    if (doc.contains("b")) ctx.fail("b", "b", "not allowed together with 'lindblad_ops'");
    const json& ops = doc["lindblad_ops"];
    if (!ops.is_array()) ctx.fail("lindblad_ops", "lindblad_ops", "expected an array");
    LindbladOperatorSet set;
    for (std::size_t m = 0; m < ops.size(); ++m) {
      const std::string field = "lindblad_ops[" + std::to_string(m) + "]";
      if (!ops[m].is_object() || !ops[m].contains("re") || !ops[m].contains("im"))
        ctx.fail("lindblad_ops", field, "expected an object with 're' and 'im'");
      const Vec3 re = ctx.vec3(ops[m]["re"], "re", field + ".re");
      const Vec3 im = ctx.vec3(ops[m]["im"], "im", field + ".im");
      set.operators.push_back(re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>());
    }
    return {build_system(set), set};
  }

  if (!doc.contains("b")) throw InputError(source + ": field 'b' is required");
  const Vec3 b = ctx.vec3(doc["b"], "b", "b");
  if (has_diag) return {LindbladSystem::from_diagonal(ctx.vec3(doc["A_diag"], "A_diag", "A_diag"), b), {}};

  const json& a = doc["A"];
  if (!a.is_array() || a.size() != 3) ctx.fail("A", "A", "expected a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = ctx.vec3(a[i], "A", "A[" + std::to_string(i) + "]").transpose();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    ctx.fail("A", "A", "matrix is not symmetric");
  return {LindbladSystem(m, b), {}};
}

SystemFile load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str(), path);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_critical_points_csv(std::ostream& os, const std::vector<CriticalPoint>& pts) {
  os << "r,nx,ny,nz,nu,class,f,residual\n";
  for (const auto& p : pts) {
    os << format_double(p.r) << ',' << format_double(p.n_hat.x()) << ','
       << format_double(p.n_hat.y()) << ',' << format_double(p.n_hat.z()) << ','
       << format_double(p.nu) << ',' << to_string(p.classification) << ',' << format_double(p.f)
       << ',' << format_double(p.residual) << '\n';
  }
}

void write_threads_csv(std::ostream& os, const std::vector<Thread>& threads) {
  os << "thread,kind,family,r,nx,ny,nz,f,residual,termination\n";
  for (std::size_t i = 0; i < threads.size(); ++i) {
    const Thread& t = threads[i];
    for (const auto& s : t.samples) {
      os << i << ',' << to_string(t.kind) << ',' << t.family << ',' << format_double(s.r) << ','
         << format_double(s.n_hat.x()) << ',' << format_double(s.n_hat.y()) << ','
         << format_double(s.n_hat.z()) << ',' << format_double(s.f) << ','
         << format_double(s.residual) << ',' << to_string(t.termination) << '\n';
    }
  }
}

void write_chimney_csv(std::ostream& os, const ChimneyMesh& mesh) {
  os << "theta,r,nx,ny,nz,f,termination\n";
  for (const Thread& g : mesh.generators) {
    for (const auto& s : g.samples) {
      os << format_double(g.theta) << ',' << format_double(s.r) << ','
         << format_double(s.n_hat.x()) << ',' << format_double(s.n_hat.y()) << ','
         << format_double(s.n_hat.z()) << ',' << format_double(s.f) << ','
         << to_string(g.termination) << '\n';
    }
  }
}

void write_plan_csv(std::ostream& os, const Plan& plan) {
  os << "segment,direction,r,t,hx,hy,hz\n";
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const PlanSegment& seg = plan.segments[k];
    for (const auto& p : seg.points) {
      os << k << ',' << seg.direction << ',' << format_double(p.r) << ',' << format_double(p.tau)
         << ',' << format_double(p.h.h.x()) << ',' << format_double(p.h.h.y()) << ','
         << format_double(p.h.h.z()) << '\n';
    }
  }
}

Thread read_thread_csv(std::istream& is, int index, const std::string& source) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(is, line)) throw InputError(source + ":1: empty thread file");
  const std::vector<std::string> header = split(line);
  auto col = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_thread = col("thread"), c_kind = col("kind"), c_r = col("r"), c_x = col("nx"),
            c_y = col("ny"), c_z = col("nz");
  if (c_r < 0 || c_x < 0 || c_y < 0 || c_z < 0)
    throw InputError(source + ":1: header must contain r, nx, ny and nz");

  Thread t;
  t.kind = ThreadKind::Maximizing;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    auto number = [&](int c, const char* name) {
      if (c >= static_cast<int>(cells.size()))
        throw InputError(source + ":" + std::to_string(lineno) + ": field '" + name + "': missing");
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument(cells[c]);
        return v;
      } catch (const std::exception&) {
        throw InputError(source + ":" + std::to_string(lineno) + ": field '" + name +
                         "': not a number");
      }
    };
    if (c_thread >= 0 && static_cast<int>(number(c_thread, "thread")) != index) continue;
    if (c_kind >= 0 && c_kind < static_cast<int>(cells.size())) {
      const std::string& k = cells[c_kind];
      for (ThreadKind kind : {ThreadKind::Maximizing, ThreadKind::Minimizing, ThreadKind::Alternate,
                              ThreadKind::SpecialLine, ThreadKind::ChimneyGenerator})
        if (k == to_string(kind)) t.kind = kind;
    }
    const Vec3 n(number(c_x, "nx"), number(c_y, "ny"), number(c_z, "nz"));
    t.samples.push_back({number(c_r, "r"), n.normalized(), 0.0, 0.0});
  }
  if (t.samples.empty())
    throw InputError(source + ": no samples for thread " + std::to_string(index));
  return t;
}

std::string validation_json(const LindbladSystem& sys, const ValidationReport& rep) {
  json j;
  j["valid"] = rep.ok();
  j["finite"] = rep.finite;
  j["psd_ok"] = rep.psd_ok;
  j["min_eigenvalue"] = rep.min_eigenvalue;
  j["psd_tolerance"] = rep.psd_tolerance;
  j["inequality_ok"] = rep.inequality_ok;
  j["inequality_margin"] = rep.inequality_margin;
  j["inequality_tolerance"] = rep.inequality_tolerance;
  if (rep.finite) {
    j["eigenvalues"] = {sys.eigenvalues()[0], sys.eigenvalues()[1], sys.eigenvalues()[2]};
    j["b"] = {sys.b()[0], sys.b()[1], sys.b()[2]};
  }
  if (!rep.ok()) j["message"] = rep.describe();
  return j.dump(2) + "\n";
}

std::string survey_json(const SurveyConfig& cfg, const SurveyStats& stats) {
  json j;
  j["sample_count"] = stats.sample_count;
  j["seed"] = cfg.seed;
  j["a1"] = cfg.a1;
  j["failures"] = stats.failures;
  json counts = json::object(), props = json::object(), errs = json::object();
  const char* labels[] = {"0", "1", "2", ">=3"};
  for (int k = 0; k < 4; ++k) {
    counts[labels[k]] = stats.counts[k];
    props[labels[k]] = stats.proportion(k);
    errs[labels[k]] = stats.standard_error(k);
  }
  j["counts"] = counts;
  j["proportions"] = props;
  j["standard_errors"] = errs;
  return j.dump(2) + "\n";
}

}  // namespace bloch
