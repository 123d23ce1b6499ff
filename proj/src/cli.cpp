#include "bloch/cli.hpp"

#include "bloch/chimney.hpp"
#include "bloch/dynamics.hpp"
#include "bloch/io.hpp"
#include "bloch/planner.hpp"
#include "bloch/presets.hpp"
#include "bloch/survey.hpp"
#include "bloch/threads.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace bloch::cli {

namespace {

using nlohmann::json;

struct Options {
  std::string system;
  std::string out;
  std::string format = "csv";
  double dr = 1e-3;
  int theta_count = 36;
  double f_threshold = 1e-3;
  std::uint64_t seed = 42;
  std::int64_t n = 100000;
  double r = 0.5;
  bool alternates = false;
  std::string thread;
  int index = 0;
  std::string c_profile = "zero";
  std::vector<double> state;
  std::vector<double> h{0.0, 0.0, 0.0};
  int figure = 1;
};

class Validation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LindbladSystem checked_system(const std::string& path) {
  if (path.empty()) throw InputError("--system is required");
  LindbladSystem sys = load_system(path).system;
  const ValidationReport rep = validate_system(sys);
  if (!rep.ok()) throw Validation(path + ": " + rep.describe());
  return sys;
}

// Writes to <out>/<name> when --out is set, otherwise to the stream.
void emit(const Options& o, std::ostream& out, const std::string& name, const std::string& body) {
  if (o.out.empty()) {
    out << body;
    return;
  }
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / name;
  std::ofstream f(path);
  if (!f) throw InputError(path.string() + ": cannot write");
  f << body;
}

json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

GaugeProfile gauge_from(const std::string& text) {
  if (text == "zero") return {};
  auto value = [&](std::size_t skip) {
    try {
      return std::stod(text.substr(skip));
    } catch (const std::exception&) {
      throw InputError("--c-profile: cannot parse '" + text + "'");
    }
  };
  if (text.rfind("const:", 0) == 0) {
    const double c = value(6);
    return [c](double) { return c; };
  }
  if (text.rfind("linear:", 0) == 0) {
    const double k = value(7);
    return [k](double r) { return k * r; };
  }
  throw InputError("--c-profile must be zero, const:<c> or linear:<k>");
}

std::vector<Thread> all_threads(const LindbladSystem& sys, double dr, bool alternates) {
  ThreadOptions topts;
  topts.dr = dr;
  std::vector<Thread> threads = main_threads(sys, topts);
  if (alternates) {
    AlternateOptions aopts;
    aopts.thread = topts;
    for (Thread& t : alternate_threads(sys, aopts)) threads.push_back(std::move(t));
  }
  return threads;
}

std::string apogees_json(const ChimneyMesh& mesh, const std::vector<Thread>& threads) {
  json arr = json::array();
  for (const ChimneyApogee& a : mesh.apogees) {
    json j;
    j["r"] = a.r;
    j["n_hat"] = vec_json(a.n_hat);
    j["generators"] = a.members.size();
    if (a.matched_thread)
      j["matched_thread"] = {{"index", *a.matched_thread},
                             {"kind", std::string(to_string(threads[*a.matched_thread].kind))},
                             {"distance", a.match_distance}};
    else
      j["matched_thread"] = nullptr;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

ChimneyOptions chimney_options(const Options& o) {
  ChimneyOptions c;
  c.theta_count = o.theta_count;
  c.dr = o.dr;
  c.f_threshold = o.f_threshold;
  return c;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const LindbladSystem sys = load_system(o.system).system;
  const ValidationReport rep = validate_system(sys);
  out << validation_json(sys, rep);
  return rep.ok() ? kExitOk : kExitInvalid;
}

int cmd_dynamics(const Options& o, std::ostream& out) {
  const LindbladSystem sys = checked_system(o.system);
  if (o.state.size() != 3) throw InputError("--state expects 3 numbers");
  const Vec3 n(o.state[0], o.state[1], o.state[2]);
  const HamiltonianVector h{Vec3(o.h[0], o.h[1], o.h[2])};
  const BlochState s = BlochState::from_vector(n);
  const Vec3 rhs = bloch_rhs(sys, h, n);
  const Vec3 oracle = reduced_generator_from_density(operators_for(sys), h, n);
  json j;
  j["state"] = vec_json(n);
  j["h"] = vec_json(h.h);
  j["bloch_rhs"] = vec_json(rhs);
  j["density_oracle_rhs"] = vec_json(oracle);
  j["oracle_difference"] = (rhs - oracle).norm();
  j["radial_velocity"] = radial_velocity(sys, s);
  j["transverse_velocity"] = s.r() > 0.0 ? vec_json(transverse_velocity(sys, h, s)) : json(nullptr);
  j["purity"] = purity_at_radius(s.r());
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_critical_points(const Options& o, std::ostream& out) {
  const LindbladSystem sys = checked_system(o.system);
  std::ostringstream ss;
  write_critical_points_csv(ss, critical_points_at(sys, o.r));
  emit(o, out, "critical_points.csv", ss.str());
  return kExitOk;
}

int cmd_threads(const Options& o, std::ostream& out) {
  const LindbladSystem sys = checked_system(o.system);
  std::ostringstream ss;
  write_threads_csv(ss, all_threads(sys, o.dr, o.alternates));
  emit(o, out, "threads.csv", ss.str());
  return kExitOk;
}

int cmd_chimney(const Options& o, std::ostream& out) {
  const LindbladSystem sys = checked_system(o.system);
  if (sys.unital()) throw Validation("the chimney is degenerate for b = 0");
  ChimneyMesh mesh = trace_chimney(sys, chimney_options(o));
  if (o.format == "json") {
    const std::vector<Thread> threads = all_threads(sys, o.dr, true);
    match_apogees(sys, mesh, threads);
    emit(o, out, "apogees.json", apogees_json(mesh, threads));
  } else {
    std::ostringstream ss;
    write_chimney_csv(ss, mesh);
    emit(o, out, "chimney.csv", ss.str());
  }
  return kExitOk;
}

int cmd_plan(const Options& o, std::ostream& out) {
  const LindbladSystem sys = checked_system(o.system);
  if (o.thread.empty()) throw InputError("--thread is required");
  std::ifstream in(o.thread);
  if (!in) throw InputError(o.thread + ": cannot open file");
  const Thread thread = read_thread_csv(in, o.index, o.thread);
  PlanOptions popts;
  popts.gauge = gauge_from(o.c_profile);
  const Plan plan = plan_trajectory(sys, thread, popts);
  std::ostringstream ss;
  write_plan_csv(ss, plan);
  emit(o, out, "plan.csv", ss.str());
  return kExitOk;
}

int cmd_survey(const Options& o, std::ostream& out) {
  SurveyConfig cfg;
  cfg.sample_count = o.n;
  cfg.seed = o.seed;
  const SurveyStats stats = run_survey(cfg);
  emit(o, out, "survey.json", survey_json(cfg, stats));
  return kExitOk;
}

int cmd_reproduce(const Options& o, std::ostream& out) {
  const LindbladSystem sys = figure_system(o.figure);
  const std::vector<Thread> threads = all_threads(sys, o.dr, true);
  ChimneyMesh mesh = trace_chimney(sys, chimney_options(o));
  match_apogees(sys, mesh, threads);

  Options files = o;
  if (files.out.empty()) files.out = ".";
  const std::string stem = "fig" + std::to_string(o.figure);
  std::ostringstream th, ch;
  write_threads_csv(th, threads);
  write_chimney_csv(ch, mesh);
  emit(files, out, stem + "_threads.csv", th.str());
  emit(files, out, stem + "_chimney.csv", ch.str());

  json j;
  j["figure"] = o.figure;
  j["A_eigenvalues"] = vec_json(sys.eigenvalues());
  j["b"] = vec_json(sys.b());
  json tl = json::array();
  for (const Thread& t : threads)
    tl.push_back({{"kind", std::string(to_string(t.kind))},
                  {"family", t.family},
                  {"r_min", t.r_min()},
                  {"r_max", t.r_max()},
                  {"max_residual", t.max_residual()},
                  {"termination", std::string(to_string(t.termination))}});
  j["threads"] = tl;
  j["alternate_thread_count"] = count_alternate_threads(sys);
  j["apogees"] = json::parse(apogees_json(mesh, threads));
  j["files"] = {stem + "_threads.csv", stem + "_chimney.csv"};
  const std::string summary = j.dump(2) + "\n";
  emit(files, out, stem + "_summary.json", summary);
  out << summary;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Purity-optimal threads and chimneys of qubit Lindblad systems", "bloch-threads"};
  app.require_subcommand(1);
  Options o;

  auto add_system = [&](CLI::App* c) {
    c->add_option("--system", o.system, "JSON system file")->required();
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output directory"); };
  auto add_dr = [&](CLI::App* c) {
    c->add_option("--dr", o.dr, "Radial step")->check(CLI::PositiveNumber);
  };
  auto add_chimney = [&](CLI::App* c) {
    c->add_option("--theta-count", o.theta_count, "Chimney generators")->check(CLI::PositiveNumber);
    c->add_option("--f-threshold", o.f_threshold, "Chimney stop threshold on |f|")
        ->check(CLI::PositiveNumber);
  };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* validate = app.add_subcommand("validate", "Check positivity of a system");
  add_system(validate);
  add_format(validate);

  auto* dynamics = app.add_subcommand("dynamics", "Evaluate the Bloch equation at a state");
  add_system(dynamics);
  dynamics->add_option("--state", o.state, "Bloch vector x y z")->expected(3)->required();
  dynamics->add_option("--hamiltonian", o.h, "Hamiltonian vector hx hy hz")->expected(3);
  add_format(dynamics);

  auto* crit = app.add_subcommand("critical-points", "Critical points of f_r at radius r");
  add_system(crit);
  crit->add_option("--r", o.r, "Radius")->required();
  add_out(crit);
  add_format(crit);

  auto* threads = app.add_subcommand("threads", "Main (and alternate) threads");
  add_system(threads);
  add_dr(threads);
  threads->add_flag("--alternates", o.alternates, "Include alternate threads");
  add_out(threads);
  add_format(threads);

  auto* chimney = app.add_subcommand("chimney", "Chimney generators");
  add_system(chimney);
  add_dr(chimney);
  add_chimney(chimney);
  add_out(chimney);
  add_format(chimney);

  auto* plan = app.add_subcommand("plan", "Control Hamiltonians along a thread");
  add_system(plan);
  plan->add_option("--thread", o.thread, "Thread CSV")->required();
  plan->add_option("--index", o.index, "Thread index within the CSV");
  plan->add_option("--c-profile", o.c_profile, "Gauge: zero, const:<c> or linear:<k>");
  add_out(plan);
  add_format(plan);

  auto* survey = app.add_subcommand("survey", "Alternate-thread census");
  survey->add_option("--n", o.n, "Sample count")->check(CLI::PositiveNumber);
  survey->add_option("--seed", o.seed, "Master seed");
  add_out(survey);
  add_format(survey);

  auto* repro = app.add_subcommand("reproduce-figure", "Threads and chimney of a preset system");
  repro->add_option("figure", o.figure, "Figure number")->required()->check(CLI::Range(1, 4));
  add_dr(repro);
  add_chimney(repro);
  add_out(repro);
  add_format(repro);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (dynamics->parsed()) return cmd_dynamics(o, out);
    if (crit->parsed()) return cmd_critical_points(o, out);
    if (threads->parsed()) return cmd_threads(o, out);
    if (chimney->parsed()) return cmd_chimney(o, out);
    if (plan->parsed()) return cmd_plan(o, out);
    if (survey->parsed()) return cmd_survey(o, out);
    if (repro->parsed()) return cmd_reproduce(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Validation& e) {
    err << "invalid system: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInvalid;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bloch::cli
