#include "amest/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "amest/cli/config.hpp"
#include "amest/cli/csv_log.hpp"
#include "amest/cli/svg_chart.hpp"
#include "amest/validation.hpp"

namespace amest::cli {
namespace fs = std::filesystem;

namespace {

// Raised when an output file cannot be written; maps to the usage exit code.
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw OutputError("failed writing " + path.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
}

std::vector<double> times(const SimLog& log) {
  std::vector<double> t;
  t.reserve(log.rows.size());
  for (const LogRow& r : log.rows) t.push_back(r.t);
  return t;
}

template <typename Get>
std::vector<double> column(const SimLog& log, Get get) {
  std::vector<double> v;
  v.reserve(log.rows.size());
  for (const LogRow& r : log.rows) v.push_back(get(r));
  return v;
}

struct AxisInfo {
  int index;
  const char* title;
  const char* unit;
};

constexpr AxisInfo kTrackedAxes[] = {
    {idx::kX, "x", "m"}, {idx::kY, "y", "m"}, {idx::kZ, "z", "m"},
    {idx::kJoint1, "joint 1", "rad"}, {idx::kJoint2, "joint 2", "rad"},
};

struct ParamInfo {
  int index;
  const char* title;
  const char* unit;
};

constexpr ParamInfo kParams[] = {
    {0, "m2", "kg"}, {1, "m3", "kg m"}, {2, "m4", "kg m^2"},
};

std::string tracking_chart(const std::string& name, const SimLog& log) {
  const std::vector<double> t = times(log);
  std::vector<Panel> panels;
  for (const AxisInfo& a : kTrackedAxes) {
    Panel p;
    p.title = a.title;
    p.y_label = std::string(a.title) + " [" + a.unit + "]";
    p.series.push_back({"desired", t, column(log, [&](const LogRow& r) { return r.q(a.index) - r.e_c(a.index); }),
                        "#d62728", true});
    p.series.push_back({"actual", t, column(log, [&](const LogRow& r) { return r.q(a.index); }), "#1f77b4", false});
    panels.push_back(std::move(p));
  }
  return render_chart("Trajectory tracking: " + name, "time [s]", panels);
}

std::string params_chart(const std::string& title, const std::vector<const Scenario*>& scenarios,
                         const std::vector<const SimLog*>& logs) {
  std::vector<Panel> panels;
  for (const ParamInfo& pi : kParams) {
    Panel p;
    p.title = std::string("estimated ") + pi.title;
    p.y_label = std::string(pi.title) + " [" + pi.unit + "]";
    for (std::size_t i = 0; i < logs.size(); ++i) {
      p.series.push_back({scenarios[i]->name, times(*logs[i]),
                          column(*logs[i], [&](const LogRow& r) { return r.m_hat(pi.index); }), palette(i), false});
    }
    p.rules.push_back({"true value", scenarios.front()->truth.as_vector()(pi.index), "#d62728"});
    panels.push_back(std::move(p));
  }
  return render_chart(title, "time [s]", panels);
}

std::string compare_tracking_chart(const std::vector<Scenario>& scenarios, const std::vector<SimLog>& logs) {
  std::vector<Panel> panels;
  for (int axis : {idx::kX, idx::kY, idx::kZ}) {
    const AxisInfo& a = kTrackedAxes[axis];
    Panel p;
    p.title = a.title;
    p.y_label = std::string(a.title) + " [m]";
    if (!logs.empty()) {
      p.series.push_back({"desired", times(logs.front()),
                          column(logs.front(), [&](const LogRow& r) { return r.q(axis) - r.e_c(axis); }),
                          "#d62728", true});
    }
    for (std::size_t i = 0; i < logs.size(); ++i) {
      p.series.push_back({scenarios[i].name, times(logs[i]),
                          column(logs[i], [&](const LogRow& r) { return r.q(axis); }), palette(i), false});
    }
    panels.push_back(std::move(p));
  }
  return render_chart("Tracking comparison", "time [s]", panels);
}

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

void write_run_outputs(const fs::path& dir, const Scenario& sc, const SimLog& log, const RunSummary& summary,
                       const std::optional<std::string>& failure) {
  {
    std::ofstream f(dir / "run.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw OutputError("cannot open " + (dir / "run.csv").string() + " for writing");
    write_csv(f, log);
  }
  write_file(dir / "summary.txt", summary_text(sc, log, summary, failure));
  write_file(dir / "tracking.svg", tracking_chart(sc.name, log));
  write_file(dir / "params.svg", params_chart("Parameter estimates: " + sc.name, {&sc}, {&log}));
}

std::string safe_dir_name(std::size_t index, const std::string& name) {
  std::ostringstream o;
  o << std::setw(2) << std::setfill('0') << index + 1 << '_';
  for (char c : name) o << (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
  return o.str();
}

}  // namespace

void apply_seed_override(Scenario& sc) {
  const char* env = std::getenv("AMESTCTL_SEED");
  if (env == nullptr) return;
  const std::string v(env);
  std::uint64_t seed = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("environment", 0, "AMESTCTL_SEED", "expected a non-negative integer, got '" + v + "'");
  }
  sc.seed = seed;
}

std::string summary_text(const Scenario& sc, const SimLog& log, const RunSummary& s,
                         const std::optional<std::string>& failure) {
  std::ostringstream o;
  o << "scenario: " << sc.name << '\n'
    << "controller: " << to_string(sc.controller) << '\n'
    << "trajectory: " << to_string(sc.trajectory) << '\n'
    << "status: " << (failure ? "diverged" : "completed") << '\n';
  if (failure) o << "failure: " << *failure << '\n';
  o << "steps_logged: " << log.rows.size() << '\n'
    << "simulated_time_s: " << num(log.rows.empty() ? 0.0 : log.rows.back().t + sc.dt) << '\n'
    << "true_m2_kg: " << num(sc.truth.m2) << '\n'
    << "true_m3_kg_m: " << num(sc.truth.m3) << '\n'
    << "true_m4_kg_m2: " << num(sc.truth.m4) << '\n'
    << "final_m2_hat_kg: " << num(s.final_estimate(0)) << '\n'
    << "final_m3_hat_kg_m: " << num(s.final_estimate(1)) << '\n'
    << "final_m4_hat_kg_m2: " << num(s.final_estimate(2)) << '\n';
  try {
    EstimatorState est;
    est.m_hat = s.final_estimate;
    const PayloadEstimate p = extract_payload(est, sc.consts);
    o << "payload_mass_kg: " << num(p.payload_mass) << '\n' << "lc_hat_m: " << num(p.lc) << '\n';
  } catch (const NotIdentifiableError&) {
    o << "payload_mass_kg: not identifiable\n"
      << "lc_hat_m: not identifiable\n";
  }
  o << "rms_tracking_x_m: " << num(s.rms_tracking(idx::kX)) << '\n'
    << "rms_tracking_y_m: " << num(s.rms_tracking(idx::kY)) << '\n'
    << "rms_tracking_z_m: " << num(s.rms_tracking(idx::kZ)) << '\n'
    << "rms_tracking_joint1_rad: " << num(s.rms_tracking(idx::kJoint1)) << '\n'
    << "rms_tracking_joint2_rad: " << num(s.rms_tracking(idx::kJoint2)) << '\n'
    << "rms_position_m: " << num(s.rms_position) << '\n'
    << "tracking_window_start_s: " << num(sc.tracking_window_start) << '\n'
    << "mean_abs_m2_error_kg: " << num(s.mean_abs_m2_error) << '\n'
    << "estimate_window_start_s: " << num(sc.estimate_window_start) << '\n'
    << "convergence_time_s: " << (s.convergence_time ? num(*s.convergence_time) : "not reached") << '\n';
  return o.str();
}

int cmd_simulate(const fs::path& config, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  Scenario sc;
  try {
    sc = load_config(config);
    apply_seed_override(sc);
    prepare_dir(out_dir);
    write_file(out_dir / "config.json", config_to_json(sc));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    SimLog log;
    try {
      log = run(sc);
    } catch (const DivergenceError& e) {
      const SimLog& partial = e.partial_log();
      write_run_outputs(out_dir, sc, partial, summarize(sc, partial), std::string(e.what()));
      err << "error: run diverged at t = " << e.time() << " s: " << e.what() << '\n'
          << "partial outputs written to " << out_dir.string() << '\n';
      return kExitDivergence;
    }
    const RunSummary summary = summarize(sc, log);
    write_run_outputs(out_dir, sc, log, summary, std::nullopt);
    out << summary_text(sc, log, summary);
    return kExitOk;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const amest::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_compare(const std::vector<fs::path>& configs, const fs::path& out_dir, std::ostream& out,
                std::ostream& err) {
  if (configs.size() < 2) {
    err << "error: compare needs at least two configuration files\n";
    return kExitUsage;
  }
  std::vector<Scenario> scenarios;
  try {
    for (const fs::path& p : configs) {
      scenarios.push_back(load_config(p));
      apply_seed_override(scenarios.back());
    }
    prepare_dir(out_dir);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    ComparisonSummary cmp;
    try {
      cmp = compare(scenarios);
    } catch (const ComparisonMismatchError& e) {
      err << "error: scenarios are not comparable: " << e.what() << '\n';
      return kExitUsage;
    } catch (const DivergenceError& e) {
      err << "error: a scenario diverged at t = " << e.time() << " s: " << e.what() << '\n';
      return kExitDivergence;
    }

    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const fs::path dir = out_dir / safe_dir_name(i, scenarios[i].name);
      prepare_dir(dir);
      write_file(dir / "config.json", config_to_json(scenarios[i]));
      write_run_outputs(dir, scenarios[i], cmp.logs[i], cmp.runs[i], std::nullopt);
    }

    std::vector<std::size_t> order(cmp.runs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cmp.runs[a].mean_abs_m2_error < cmp.runs[b].mean_abs_m2_error;
    });

    std::ostringstream table;
    table << "scenario,controller,m2_final,m3_final,m4_final,mean_abs_m2_error,rms_x,rms_y,rms_z,rms_position,"
             "convergence_time\n";
    for (std::size_t i : order) {
      const RunSummary& r = cmp.runs[i];
      table << r.name << ',' << to_string(r.controller) << ',' << csv_number(r.final_estimate(0)) << ','
            << csv_number(r.final_estimate(1)) << ',' << csv_number(r.final_estimate(2)) << ','
            << csv_number(r.mean_abs_m2_error) << ',' << csv_number(r.rms_tracking(idx::kX)) << ','
            << csv_number(r.rms_tracking(idx::kY)) << ',' << csv_number(r.rms_tracking(idx::kZ)) << ','
            << csv_number(r.rms_position) << ',' << (r.convergence_time ? csv_number(*r.convergence_time) : "none")
            << '\n';
    }
    write_file(out_dir / "compare.csv", table.str());

    std::vector<const Scenario*> sp;
    std::vector<const SimLog*> lp;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      sp.push_back(&scenarios[i]);
      lp.push_back(&cmp.logs[i]);
    }
    write_file(out_dir / "estimates.svg", params_chart("Parameter estimates", sp, lp));
    write_file(out_dir / "tracking.svg", compare_tracking_chart(scenarios, cmp.logs));

    out << table.str();
    return kExitOk;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const amest::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  ValidationOptions opt;
  opt.seed = args.seed;
  opt.samples = args.samples;
  opt.coriolis_fault = args.inject_coriolis_fault ? 1e-3 : 0.0;

  ValidationReport report;
  try {
    report = run_validation(ModelConstants{}, opt);
  } catch (const amest::Error& e) {
    err << "error: validation could not run: " << e.what() << '\n';
    return kExitValidationFailure;
  }

  out << "seed " << args.seed << ", " << args.samples << " random states\n";
  std::size_t failed = 0;
  for (const PropertyResult& p : report.properties) {
    out << (p.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << p.name << " worst " << std::setprecision(3)
        << std::scientific << p.worst << (p.lower_bound ? "  (must be > " : "  (must be <= ") << p.limit << ")\n"
        << std::defaultfloat;
    if (!p.passed) {
      ++failed;
      out << "     worst-case sample #" << p.worst_sample << ": " << p.worst_detail << '\n';
      err << "property failed: " << p.name << " (sample #" << p.worst_sample << ")\n";
    }
  }
  out << "max |x^T (Mdot - 2C) x| / |x|^2 observed: " << std::setprecision(3) << std::scientific
      << report.max_skew_residual << std::defaultfloat << '\n';
  if (failed == 0 && report.all_passed()) {
    out << "all " << report.properties.size() << " properties passed\n";
    return kExitOk;
  }
  out << failed << " of " << report.properties.size() << " properties failed\n";
  return kExitValidationFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Payload estimation and adaptive control of an aerial manipulator"};
  app.name("amestctl");
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its log, summary and charts");
  simulate->add_option("config", sim_config, "Scenario configuration file")->required();
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();

  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  auto* comparison = app.add_subcommand("compare", "Run several scenarios with the same truth and compare them");
  comparison->add_option("configs", cmp_configs, "Two or more configuration files")->required();
  comparison->add_option("-o,--out", cmp_out, "Output directory")->required();

  ValidateArgs vargs;
  auto* validate = app.add_subcommand("validate", "Check structural and stability invariants on random samples");
  validate->add_option("--seed", vargs.seed, "Sampling seed");
  validate->add_option("--samples", vargs.samples, "Number of random states")->check(CLI::PositiveNumber);
  validate->add_flag("--inject-coriolis-fault", vargs.inject_coriolis_fault)->group("");

  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  std::string defaults_out;
  defaults->add_option("-o,--out", defaults_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (simulate->parsed()) return cmd_simulate(sim_config, sim_out, out, err);
  if (comparison->parsed()) {
    std::vector<fs::path> paths(cmp_configs.begin(), cmp_configs.end());
    return cmd_compare(paths, cmp_out, out, err);
  }
  if (validate->parsed()) return cmd_validate(vargs, out, err);
  if (defaults->parsed()) {
    const std::string text = format_config(Scenario{});
    if (defaults_out.empty()) {
      out << text;
      return kExitOk;
    }
    try {
      write_file(defaults_out, text);
    } catch (const OutputError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace amest::cli
