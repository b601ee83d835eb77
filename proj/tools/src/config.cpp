#include "amest/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace amest::cli {
namespace {

using nlohmann::ordered_json;

// Everything a config file can set. Truth is kept as (mass, COM) here and
// converted to the (m2, m3, m4) triple once the whole file has been read.
struct Draft {
  Scenario sc;
  double truth_mass = 0.0;
  double truth_lc = 0.0;
};

Draft draft_of(const Scenario& sc) {
  Draft d;
  d.sc = sc;
  d.truth_mass = sc.truth.m2;
  d.truth_lc = sc.truth.m2 != 0.0 ? sc.truth.m3 / sc.truth.m2 : 0.0;
  return d;
}

// Thrown by field parsers; the caller attaches line and key.
struct FieldError {
  std::string message;
};

enum class Domain { kAny, kPositive, kNonNegative };

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string number_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& token, Domain domain) {
  const std::string t = trim(token);
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != end) {
    throw FieldError{"expected a number, got '" + t + "'"};
  }
  if (!std::isfinite(v)) throw FieldError{"value must be finite"};
  if (domain == Domain::kPositive && !(v > 0.0)) throw FieldError{"must be > 0, got " + t};
  if (domain == Domain::kNonNegative && !(v >= 0.0)) throw FieldError{"must be >= 0, got " + t};
  return v;
}

std::vector<double> parse_list(const std::string& text, Domain domain) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) out.push_back(parse_number(token, domain));
  if (!text.empty() && text.back() == ',') throw FieldError{"trailing comma"};
  return out;
}

template <typename Vec>
std::string list_text(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += number_text(v(i));
  }
  return s;
}

template <typename Vec>
ordered_json list_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

struct Field {
  Field(std::string sec, std::string k, std::string note)
      : section(std::move(sec)), key(std::move(k)), comment(std::move(note)) {}

  std::string section;
  std::string key;
  std::string comment;
  bool repeatable = false;
  std::function<std::vector<std::string>(Draft&)> format;  // one entry per emitted line
  std::function<void(Draft&, const std::string&)> parse;
  std::function<ordered_json(Draft&)> json;
};

Field real(std::string sec, std::string key, std::string comment, std::function<double&(Draft&)> ref,
           Domain domain) {
  Field f{std::move(sec), std::move(key), std::move(comment)};
  f.format = [ref](Draft& d) { return std::vector<std::string>{number_text(ref(d))}; };
  f.parse = [ref, domain](Draft& d, const std::string& v) { ref(d) = parse_number(v, domain); };
  f.json = [ref](Draft& d) { return ordered_json(ref(d)); };
  return f;
}

template <int N>
Field vector_field(std::string sec, std::string key, std::string comment,
                   std::function<Eigen::Matrix<double, N, 1>&(Draft&)> ref, Domain domain) {
  Field f{std::move(sec), std::move(key), std::move(comment)};
  f.format = [ref](Draft& d) { return std::vector<std::string>{list_text(ref(d))}; };
  f.parse = [ref, domain](Draft& d, const std::string& v) {
    const std::vector<double> xs = parse_list(v, domain);
    if (xs.size() != static_cast<std::size_t>(N)) {
      throw FieldError{"expected " + std::to_string(N) + " comma-separated values, got " + std::to_string(xs.size())};
    }
    for (int i = 0; i < N; ++i) ref(d)(i) = xs[static_cast<std::size_t>(i)];
  };
  f.json = [ref](Draft& d) { return list_json(ref(d)); };
  return f;
}

// Diagonal gain matrix: one value means a multiple of the identity.
Field diagonal(std::string sec, std::string key, std::string comment, std::function<Mat8&(Draft&)> ref) {
  Field f{std::move(sec), std::move(key), std::move(comment)};
  f.format = [ref](Draft& d) {
    const Mat8& m = ref(d);
    const Vec8 diag = m.diagonal();
    if (m.isDiagonal(0.0) && (diag.array() == diag(0)).all()) return std::vector<std::string>{number_text(diag(0))};
    return std::vector<std::string>{list_text(diag)};
  };
  f.parse = [ref](Draft& d, const std::string& v) {
    const std::vector<double> xs = parse_list(v, Domain::kPositive);
    if (xs.size() == 1) {
      ref(d) = xs[0] * Mat8::Identity();
    } else if (xs.size() == static_cast<std::size_t>(kDof)) {
      ref(d) = Eigen::Map<const Vec8>(xs.data()).asDiagonal();
    } else {
      throw FieldError{"expected 1 or 8 comma-separated values, got " + std::to_string(xs.size())};
    }
  };
  f.json = [ref](Draft& d) { return list_json(Vec8(ref(d).diagonal())); };
  return f;
}

template <typename Enum>
Field choice(std::string sec, std::string key, std::string comment, std::function<Enum&(Draft&)> ref,
             std::vector<std::pair<std::string, Enum>> options) {
  Field f{std::move(sec), std::move(key), std::move(comment)};
  auto name_of = [options](Enum e) {
    for (const auto& [name, value] : options) {
      if (value == e) return name;
    }
    return std::string("?");
  };
  f.format = [ref, name_of](Draft& d) { return std::vector<std::string>{name_of(ref(d))}; };
  f.parse = [ref, options](Draft& d, const std::string& v) {
    for (const auto& [name, value] : options) {
      if (name == v) {
        ref(d) = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& o : options) allowed += (allowed.empty() ? "" : " | ") + o.first;
    throw FieldError{"unknown value '" + v + "' (allowed: " + allowed + ")"};
  };
  f.json = [ref, name_of](Draft& d) { return ordered_json(name_of(ref(d))); };
  return f;
}

std::vector<Field> build_fields() {
  using D = Draft&;
  std::vector<Field> f;

  // [model]
  f.push_back(real("model", "m_b", "[kg] vehicle mass", [](D d) -> double& { return d.sc.consts.m_b; },
                   Domain::kPositive));
  f.push_back(vector_field<3>("model", "I_b", "[kg m^2] body inertia diagonal (xx, yy, zz)",
                              [](D d) -> Eigen::Vector3d& { return d.sc.consts.I_b; }, Domain::kPositive));
  f.push_back(real("model", "m1", "[kg] link-1 mass", [](D d) -> double& { return d.sc.consts.m1; },
                   Domain::kPositive));
  f.push_back(real("model", "m2_link", "[kg] bare link-2 mass", [](D d) -> double& { return d.sc.consts.m2_link; },
                   Domain::kPositive));
  f.push_back(real("model", "l1", "[m] link-1 length", [](D d) -> double& { return d.sc.consts.l1; },
                   Domain::kPositive));
  f.push_back(real("model", "l2", "[m] link-2 length", [](D d) -> double& { return d.sc.consts.l2; },
                   Domain::kPositive));
  f.push_back(real("model", "lc1", "[m] link-1 COM distance from joint 1",
                   [](D d) -> double& { return d.sc.consts.lc1; }, Domain::kNonNegative));
  f.push_back(real("model", "I_y2", "[kg m^2] link-2 inertia about its joint axis",
                   [](D d) -> double& { return d.sc.consts.I_y2; }, Domain::kPositive));
  f.push_back(real("model", "g", "[m/s^2] gravitational acceleration", [](D d) -> double& { return d.sc.consts.g; },
                   Domain::kPositive));
  {
    Field b{"model", "experiment_mode", "[-] true: small roll/pitch model with lc1 = 0"};
    b.format = [](D d) { return std::vector<std::string>{d.sc.consts.experiment_mode ? "true" : "false"}; };
    b.parse = [](D d, const std::string& v) {
      if (v == "true") {
        d.sc.consts.experiment_mode = true;
      } else if (v == "false") {
        d.sc.consts.experiment_mode = false;
      } else {
        throw FieldError{"expected true or false, got '" + v + "'"};
      }
    };
    b.json = [](D d) { return ordered_json(d.sc.consts.experiment_mode); };
    f.push_back(b);
  }

  // [truth]
  f.push_back(real("truth", "m2", "[kg] link-2 mass including the payload",
                   [](D d) -> double& { return d.truth_mass; }, Domain::kPositive));
  f.push_back(real("truth", "lc", "[m] link-2 COM distance from joint 2", [](D d) -> double& { return d.truth_lc; },
                   Domain::kNonNegative));

  // [controller]
  f.push_back(choice<ControllerKind>("controller", "kind", "[-] passivity-adaptive | passivity-fixed | asmc",
                                     [](D d) -> ControllerKind& { return d.sc.controller; },
                                     {{"passivity-adaptive", ControllerKind::kPassivityAdaptive},
                                      {"passivity-fixed", ControllerKind::kPassivityFixed},
                                      {"asmc", ControllerKind::kAsmc}}));
  f.push_back(vector_field<8>("controller", "k", "[N s/m, N m s/rad] passivity damping gain per axis",
                              [](D d) -> Vec8& { return d.sc.passivity.k; }, Domain::kPositive));
  f.push_back(vector_field<8>("controller", "lambda", "[1/s] passivity error-surface slope per axis",
                              [](D d) -> Vec8& { return d.sc.passivity.lambda; }, Domain::kPositive));
  f.push_back(vector_field<8>("controller", "smc_lambda", "[1/s] sliding-surface slope per axis",
                              [](D d) -> Vec8& { return d.sc.sliding.lambda; }, Domain::kPositive));
  f.push_back(vector_field<8>("controller", "smc_K1", "[N s/m, N m s/rad] sliding-mode linear gain per axis",
                              [](D d) -> Vec8& { return d.sc.sliding.K1; }, Domain::kPositive));
  f.push_back(vector_field<8>("controller", "smc_K2", "[N, N m] sliding-mode switching gain per axis",
                              [](D d) -> Vec8& { return d.sc.sliding.K2; }, Domain::kNonNegative));
  f.push_back(real("controller", "smc_boundary_layer", "[m/s, rad/s] saturation width, 0 = pure sign",
                   [](D d) -> double& { return d.sc.sliding.boundary_layer; }, Domain::kNonNegative));
  f.push_back(choice<MassExtraction>("controller", "smc_mass_extraction", "[-] normalized | literal",
                                     [](D d) -> MassExtraction& { return d.sc.extraction; },
                                     {{"normalized", MassExtraction::kNormalized},
                                      {"literal", MassExtraction::kLiteral}}));

  // [estimator]
  f.push_back(diagonal("estimator", "damping", "[-] C* diagonal (1 value = multiple of identity)",
                       [](D d) -> Mat8& { return d.sc.est_damping; }));
  f.push_back(diagonal("estimator", "stiffness", "[1/s] K* diagonal (1 value = multiple of identity)",
                       [](D d) -> Mat8& { return d.sc.est_stiffness; }));
  f.push_back(vector_field<3>("estimator", "gamma", "[-] learning rates for (m2, m3, m4)",
                              [](D d) -> Eigen::Vector3d& { return d.sc.est_rates; }, Domain::kPositive));
  {
    Field m{"estimator", "initial_estimate", "[kg, kg m, kg m^2] starting (m2, m3, m4)"};
    m.format = [](D d) { return std::vector<std::string>{list_text(d.sc.initial_estimate.as_vector())}; };
    m.parse = [](D d, const std::string& v) {
      const std::vector<double> xs = parse_list(v, Domain::kAny);
      if (xs.size() != 3) throw FieldError{"expected 3 comma-separated values, got " + std::to_string(xs.size())};
      d.sc.initial_estimate = {xs[0], xs[1], xs[2]};
    };
    m.json = [](D d) { return list_json(d.sc.initial_estimate.as_vector()); };
    f.push_back(m);
  }
  f.push_back(real("estimator", "q_hat_offset", "[m, rad] initial q_hat - q on every component",
                   [](D d) -> double& { return d.sc.q_hat_offset; }, Domain::kAny));

  // [sim]
  {
    Field n{"sim", "name", "[-] label used in reports"};
    n.format = [](D d) { return std::vector<std::string>{d.sc.name}; };
    n.parse = [](D d, const std::string& v) {
      if (v.empty()) throw FieldError{"must not be empty"};
      if (v.find_first_of(",\"") != std::string::npos) throw FieldError{"must not contain commas or quotes"};
      d.sc.name = v;
    };
    n.json = [](D d) { return ordered_json(d.sc.name); };
    f.push_back(n);
  }
  f.push_back(real("sim", "duration", "[s] simulated time", [](D d) -> double& { return d.sc.duration; },
                   Domain::kPositive));
  f.push_back(real("sim", "dt", "[s] integration step and control period", [](D d) -> double& { return d.sc.dt; },
                   Domain::kPositive));
  {
    Field s{"sim", "seed", "[-] noise generator seed (AMESTCTL_SEED overrides)"};
    s.format = [](D d) { return std::vector<std::string>{std::to_string(d.sc.seed)}; };
    s.parse = [](D d, const std::string& v) {
      std::uint64_t seed = 0;
      const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw FieldError{"expected a non-negative integer, got '" + v + "'"};
      }
      d.sc.seed = seed;
    };
    s.json = [](D d) { return ordered_json(d.sc.seed); };
    f.push_back(s);
  }
  f.push_back(choice<TrajectoryKind>("sim", "trajectory", "[-] reference | hover | custom-waypoints",
                                     [](D d) -> TrajectoryKind& { return d.sc.trajectory; },
                                     {{"reference", TrajectoryKind::kReference},
                                      {"hover", TrajectoryKind::kHover},
                                      {"custom-waypoints", TrajectoryKind::kWaypoints}}));
  f.push_back(vector_field<8>("sim", "hover_target", "[m, rad] configuration held when trajectory = hover",
                              [](D d) -> Vec8& { return d.sc.hover_target; }, Domain::kAny));
  {
    Field w{"sim", "waypoint", "[s; m, rad] time then 8 coordinates; repeat the key for each waypoint"};
    w.repeatable = true;
    w.format = [](D d) {
      std::vector<std::string> lines;
      for (const Waypoint& p : d.sc.waypoints) lines.push_back(number_text(p.t) + ", " + list_text(p.q));
      return lines;
    };
    w.parse = [](D d, const std::string& v) {
      const std::vector<double> xs = parse_list(v, Domain::kAny);
      if (xs.size() != 9) throw FieldError{"expected 9 comma-separated values (t, q0..q7), got " + std::to_string(xs.size())};
      Waypoint p;
      p.t = xs[0];
      for (int i = 0; i < kDof; ++i) p.q(i) = xs[static_cast<std::size_t>(i) + 1];
      if (!d.sc.waypoints.empty() && !(p.t > d.sc.waypoints.back().t)) {
        throw FieldError{"waypoint times must be strictly increasing"};
      }
      d.sc.waypoints.push_back(p);
    };
    w.json = [](D d) {
      ordered_json a = ordered_json::array();
      for (const Waypoint& p : d.sc.waypoints) a.push_back({{"t", p.t}, {"q", list_json(p.q)}});
      return a;
    };
    f.push_back(w);
  }
  f.push_back(real("sim", "trajectory_bound", "[-] limit on |q_d|^2 + |qd_d|^2 + |qdd_d|^2",
                   [](D d) -> double& { return d.sc.trajectory_bound; }, Domain::kPositive));
  f.push_back(real("sim", "divergence_bound", "[m, rad] abort when any |q_i| exceeds this",
                   [](D d) -> double& { return d.sc.divergence_bound; }, Domain::kPositive));
  f.push_back(real("sim", "tracking_window_start", "[s] start of the RMS tracking window",
                   [](D d) -> double& { return d.sc.tracking_window_start; }, Domain::kNonNegative));
  f.push_back(real("sim", "estimate_window_start", "[s] start of the estimate-error averaging window",
                   [](D d) -> double& { return d.sc.estimate_window_start; }, Domain::kNonNegative));

  // [noise]
  f.push_back(real("noise", "sigma_q", "[m, rad] std. dev. added to measured q",
                   [](D d) -> double& { return d.sc.noise_sigma(0); }, Domain::kNonNegative));
  f.push_back(real("noise", "sigma_qd", "[m/s, rad/s] std. dev. added to measured qd",
                   [](D d) -> double& { return d.sc.noise_sigma(1); }, Domain::kNonNegative));
  f.push_back(real("noise", "sigma_qdd", "[m/s^2, rad/s^2] std. dev. added to measured qdd",
                   [](D d) -> double& { return d.sc.noise_sigma(2); }, Domain::kNonNegative));
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = build_fields();
  return table;
}

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order{"model", "truth", "controller", "estimator", "sim", "noise"};
  return order;
}

std::string where(const std::string& source, int line) {
  return line > 0 ? source + ":" + std::to_string(line) : source;
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, std::string key, const std::string& message)
    : std::runtime_error(where(source, line) + ": key '" + key + "': " + message),
      source_(std::move(source)),
      line_(line),
      key_(std::move(key)) {}

Scenario parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, const Field*> by_name;
  for (const Field& f : fields()) by_name[f.section + "." + f.key] = &f;
  const std::set<std::string> sections(section_order().begin(), section_order().end());

  Draft d = draft_of(Scenario{});
  std::set<std::string> seen;
  std::map<std::string, int> key_line;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, line, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) {
        throw ConfigError(source, line_no, section,
                          "unknown section (expected model, truth, controller, estimator, sim or noise)");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, line, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(source, line_no, key, "key appears before any [section] header");
    const std::string full = section + "." + key;
    const auto it = by_name.find(full);
    if (it == by_name.end()) throw ConfigError(source, line_no, full, "unknown key");
    if (!it->second->repeatable && !seen.insert(full).second) {
      throw ConfigError(source, line_no, full, "duplicate key (first set on line " + std::to_string(key_line[full]) + ")");
    }
    key_line[full] = line_no;
    try {
      it->second->parse(d, value);
    } catch (const FieldError& e) {
      throw ConfigError(source, line_no, full, e.message);
    }
  }

  d.sc.truth = UnknownParams::from_mass_and_com(d.truth_mass, d.truth_lc);
  if (!(d.sc.duration >= d.sc.dt)) {
    throw ConfigError(source, key_line["sim.duration"], "sim.duration", "must be >= sim.dt");
  }
  if (d.sc.trajectory == TrajectoryKind::kWaypoints && d.sc.waypoints.empty()) {
    throw ConfigError(source, key_line["sim.trajectory"], "sim.waypoint",
                      "custom-waypoints trajectory needs at least one waypoint");
  }
  try {
    d.sc.validate();
  } catch (const amest::Error& e) {
    throw ConfigError(source, 0, "scenario", e.what());
  }
  return d.sc;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "file", "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const Scenario& scenario) {
  Draft d = draft_of(scenario);
  std::ostringstream out;
  out << "# amestctl scenario configuration\n"
      << "# Units are given in brackets after each value; per-axis lists follow\n"
      << "# q = [x, y, z, roll, pitch, yaw, joint1, joint2].\n";
  for (const std::string& section : section_order()) {
    out << "\n[" << section << "]\n";
    for (const Field& f : fields()) {
      if (f.section != section) continue;
      const std::vector<std::string> values = f.format(d);
      if (values.empty()) out << "# " << f.key << " = ...  # " << f.comment << "\n";
      for (const std::string& v : values) out << f.key << " = " << v << "  # " << f.comment << "\n";
    }
  }
  return out.str();
}

std::string config_to_json(const Scenario& scenario) {
  Draft d = draft_of(scenario);
  ordered_json root = ordered_json::object();
  for (const std::string& section : section_order()) {
    ordered_json obj = ordered_json::object();
    for (const Field& f : fields()) {
      if (f.section == section) obj[f.key] = f.json(d);
    }
    root[section] = obj;
  }
  return root.dump(2) + "\n";
}

}  // namespace amest::cli
