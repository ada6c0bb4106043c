#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "satflow/app.hpp"
#include "satflow/error.hpp"

namespace satflow::app {

bool OutputConfig::has(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double plain_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw BadValue("'" + s + "' is not a number");
  }
  if (used != s.size()) throw BadValue("'" + s + "' is not a number");
  return v;
}

// Accepts plain decimals plus `a/b` and `a^b` (e.g. 2^-7).
double number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw BadValue("missing number");
  if (const auto p = s.find('^'); p != std::string::npos)
    return std::pow(plain_number(trim(s.substr(0, p))), plain_number(trim(s.substr(p + 1))));
  if (const auto p = s.find('/'); p != std::string::npos && p > 0)
    return number(s.substr(0, p)) / number(s.substr(p + 1));
  return plain_number(s);
}

std::size_t count(const std::string& s) {
  const double v = number(s);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw BadValue("'" + s + "' is not a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(number(w));
  return out;
}

bool boolean(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw BadValue("'" + s + "' is not a boolean");
}

std::string word(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw BadValue("missing value");
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& registry() {
  static const std::map<std::string, Setter> keys = {
      {"problem.alpha", [](RunConfig& c, const std::string& v) { c.problem.alpha = number(v); }},
      {"problem.mobility", [](RunConfig& c, const std::string& v) { c.problem.mobility = word(v); }},
      {"problem.mobility_params", [](RunConfig& c, const std::string& v) { c.problem.mobility_params = numbers(v); }},
      {"problem.mobility_points", [](RunConfig& c, const std::string& v) { c.problem.mobility_points = numbers(v); }},
      {"problem.mobility_values", [](RunConfig& c, const std::string& v) { c.problem.mobility_values = numbers(v); }},
      {"problem.u", [](RunConfig& c, const std::string& v) { c.problem.u = word(v); }},
      {"problem.u_params", [](RunConfig& c, const std::string& v) { c.problem.u_params = numbers(v); }},
      {"problem.u_points", [](RunConfig& c, const std::string& v) { c.problem.u_points = numbers(v); }},
      {"problem.u_values", [](RunConfig& c, const std::string& v) { c.problem.u_values = numbers(v); }},
      {"problem.v", [](RunConfig& c, const std::string& v) { c.problem.v = word(v); }},
      {"problem.v_params", [](RunConfig& c, const std::string& v) { c.problem.v_params = numbers(v); }},
      {"grid.n_cells", [](RunConfig& c, const std::string& v) { c.n_cells = count(v); }},
      {"time.dt", [](RunConfig& c, const std::string& v) { c.dt = number(v); }},
      {"time.t_end", [](RunConfig& c, const std::string& v) { c.t_end = number(v); }},
      {"time.steady", [](RunConfig& c, const std::string& v) { c.steady = boolean(v); }},
      {"time.max_steps", [](RunConfig& c, const std::string& v) { c.detector.max_steps = count(v); }},
      {"steady.tol_rate", [](RunConfig& c, const std::string& v) { c.detector.tol_rate = number(v); }},
      {"steady.tol_energy", [](RunConfig& c, const std::string& v) { c.detector.tol_energy = number(v); }},
      {"steady.patience", [](RunConfig& c, const std::string& v) { c.detector.patience = static_cast<int>(count(v)); }},
      {"steady.criterion",
       [](RunConfig& c, const std::string& v) {
         const auto crit = parse_criterion(word(v));
         if (!crit) throw BadValue("unknown criterion '" + word(v) + "'");
         c.detector.criterion = *crit;
       }},
      {"solver.newton_tol", [](RunConfig& c, const std::string& v) { c.solver.newton_tol = number(v); }},
      {"solver.newton_max_iter",
       [](RunConfig& c, const std::string& v) { c.solver.newton_max_iter = static_cast<int>(count(v)); }},
      {"solver.damping_min", [](RunConfig& c, const std::string& v) { c.solver.damping_min = number(v); }},
      {"solver.homotopy_stages", [](RunConfig& c, const std::string& v) { c.solver.homotopy_stages = numbers(v); }},
      {"solver.clamp_margin", [](RunConfig& c, const std::string& v) { c.solver.clamp_margin = number(v); }},
      {"solver.max_halvings",
       [](RunConfig& c, const std::string& v) { c.solver.max_halvings = static_cast<int>(count(v)); }},
      {"solver.sign_at_zero",
       [](RunConfig& c, const std::string& v) {
         const auto w = word(v);
         if (w == "positive") c.solver.sign_at_zero = SignAtZero::positive;
         else if (w == "negative") c.solver.sign_at_zero = SignAtZero::negative;
         else throw BadValue("sign_at_zero must be positive or negative");
       }},
      {"regularization.epsilon", [](RunConfig& c, const std::string& v) { c.regularization.epsilon = number(v); }},
      {"regularization.kappa", [](RunConfig& c, const std::string& v) { c.regularization.kappa = number(v); }},
      {"regularization.s0", [](RunConfig& c, const std::string& v) { c.regularization.s0 = number(v); }},
      {"regularization.band_width", [](RunConfig& c, const std::string& v) { c.regularization.band_width = number(v); }},
      {"regularization.quadrature_tol",
       [](RunConfig& c, const std::string& v) { c.regularization.quadrature_tol = number(v); }},
      {"initial.kind", [](RunConfig& c, const std::string& v) { c.initial.kind = word(v); }},
      {"initial.value", [](RunConfig& c, const std::string& v) { c.initial.value = number(v); }},
      {"initial.center", [](RunConfig& c, const std::string& v) { c.initial.center = number(v); }},
      {"initial.width", [](RunConfig& c, const std::string& v) { c.initial.width = number(v); }},
      {"initial.height", [](RunConfig& c, const std::string& v) { c.initial.height = number(v); }},
      {"initial.mass", [](RunConfig& c, const std::string& v) { c.initial.mass = number(v); }},
      {"initial.exponent", [](RunConfig& c, const std::string& v) { c.initial.exponent = number(v); }},
      {"initial.radius", [](RunConfig& c, const std::string& v) { c.initial.radius = number(v); }},
      {"initial.masses", [](RunConfig& c, const std::string& v) { c.initial.masses = numbers(v); }},
      {"initial.centers", [](RunConfig& c, const std::string& v) { c.initial.centers = numbers(v); }},
      {"initial.path", [](RunConfig& c, const std::string& v) { c.initial.path = word(v); }},
      {"outputs.directory", [](RunConfig& c, const std::string& v) { c.outputs.directory = word(v); }},
      {"outputs.snapshot_stride", [](RunConfig& c, const std::string& v) { c.outputs.snapshot_stride = count(v); }},
      {"outputs.flags", [](RunConfig& c, const std::string& v) { c.outputs.flags = words(v); }},
      {"audit.pairs", [](RunConfig& c, const std::string& v) { c.audit.pairs = count(v); }},
      {"audit.steps", [](RunConfig& c, const std::string& v) { c.audit.steps = count(v); }},
      {"audit.seed", [](RunConfig& c, const std::string& v) { c.audit.seed = count(v); }},
      {"study.axis", [](RunConfig& c, const std::string& v) { c.study.axis = word(v); }},
      {"study.levels", [](RunConfig& c, const std::string& v) { c.study.levels = count(v); }},
      {"study.n_cells", [](RunConfig& c, const std::string& v) { c.study.n_cells = count(v); }},
      {"study.dt", [](RunConfig& c, const std::string& v) { c.study.dt = number(v); }},
      {"study.t_end", [](RunConfig& c, const std::string& v) { c.study.t_end = number(v); }},
      {"study.epsilons", [](RunConfig& c, const std::string& v) { c.study.epsilons = numbers(v); }},
  };
  return keys;
}

void assign(RunConfig& config, const std::string& key, const std::string& value, const std::string& where) {
  const auto& keys = registry();
  const auto it = keys.find(key);
  if (it == keys.end()) fail(ErrorCode::parse_error, where + ": unknown key '" + key + "'");
  try {
    it->second(config, value);
  } catch (const BadValue& e) {
    fail(ErrorCode::parse_error, where + ": key '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : registry()) out.push_back(k);
  return out;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(ErrorCode::parse_error, where + ": expected 'section.key = value'");
    assign(config, trim(body.substr(0, eq)), trim(body.substr(eq + 1)), where);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorCode::parse_error, "override '" + std::string(assignment) + "': expected key=value");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)),
         "override '" + std::string(assignment) + "'");
}

// --- building ---------------------------------------------------------------------

namespace {

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

RegularizationParams regularization_params(const RunConfig& c) {
  auto p = RegularizationParams::with_defaults(*c.regularization.epsilon, c.problem.alpha);
  if (c.regularization.kappa) p.kappa = *c.regularization.kappa;
  if (c.regularization.s0) p.s0 = *c.regularization.s0;
  if (c.regularization.band_width) p.band_width = *c.regularization.band_width;
  if (c.regularization.quadrature_tol) p.quadrature_tol = *c.regularization.quadrature_tol;
  return p;
}

// Continuous Barenblatt constant for a given mass: mass(C) = R (kC)^p B(1/2, p+1), R = sqrt(2C).
double barenblatt_constant(double mass, double m) {
  const double k = (m - 1.0) / m, p = 1.0 / (m - 1.0);
  const double beta = std::beta(0.5, p + 1.0);
  auto mass_of = [&](double c) { return std::sqrt(2.0 * c) * std::pow(k * c, p) * beta; };
  double lo = 0.0, hi = 1.0;
  while (mass_of(hi) < mass) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass_of(mid) < mass ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double bump_capacity(double radius) { return radius * radius * radius / 3.0; }

}  // namespace

ProblemSpec build_base_spec(const RunConfig& c) {
  ProblemSpec spec;
  spec.alpha = c.problem.alpha;
  const auto mob_params = c.problem.mobility == "tabulated" ? concat(c.problem.mobility_points, c.problem.mobility_values)
                                                            : c.problem.mobility_params;
  spec.mobility = make_mobility(c.problem.mobility, mob_params, spec.alpha);
  const auto u_params = c.problem.u == "tabulated" ? concat(c.problem.u_points, c.problem.u_values) : c.problem.u_params;
  spec.potential = make_diffusion(c.problem.u, u_params, spec.alpha);
  spec.external = make_external(c.problem.v, c.problem.v_params);
  spec.validate();
  return spec;
}

ProblemSpec build_spec(const RunConfig& c) {
  ProblemSpec base = build_base_spec(c);
  if (!c.regularization.epsilon) return base;
  return regularize(base, regularization_params(c));
}

SchemeConfig build_solver(const RunConfig& c) {
  SchemeConfig s = c.solver;
  s.dt = c.dt;
  return s;
}

ScalarFn initial_function(const RunConfig& c, double alpha) {
  const auto& in = c.initial;
  if (in.kind == "constant") return [v = in.value](double) { return v; };
  if (in.kind == "cosine")
    return [=](double x) { return in.value + in.height * std::cos(std::numbers::pi * (x - in.center) / in.width); };
  if (in.kind == "gaussian")
    return [=](double x) {
      const double d = (x - in.center) / in.width;
      return std::clamp(in.value + in.height * std::exp(-0.5 * d * d), 0.0, alpha);
    };
  if (in.kind == "indicator")
    return [=](double x) { return std::abs(x - in.center) < in.width ? in.height : in.value; };
  if (in.kind == "barenblatt") {
    const double cc = barenblatt_constant(in.mass.value_or(0.0), in.exponent);
    const double k = (in.exponent - 1.0) / in.exponent, p = 1.0 / (in.exponent - 1.0);
    return [=](double x) {
      const double d = x - in.center;
      const double base = k * (cc - 0.5 * d * d);
      return base > 0.0 ? std::min(alpha, std::pow(base, p)) : 0.0;
    };
  }
  if (in.kind == "alpha_minus_bump") {
    const double h = in.mass ? *in.mass / in.width : in.height;
    return [=](double x) {
      const double d = x - in.center;
      if (std::abs(d) >= in.width) return alpha;
      const double cs = std::cos(std::numbers::pi * d / (2.0 * in.width));
      return alpha - h * cs * cs;
    };
  }
  if (in.kind == "two_bump") {
    const double r = in.radius, cap = bump_capacity(r);
    return [=](double x) {
      double v = 0.0;
      for (std::size_t k = 0; k < in.masses.size(); ++k) {
        const double d = x - in.centers[k];
        if (std::abs(d) < r) v += in.masses[k] / cap * 0.25 * (r * r - d * d);
      }
      return v;
    };
  }
  fail(ErrorCode::validation_error, "initial kind '" + in.kind + "' has no closed form");
}

DensityField build_initial(const RunConfig& c, const ProblemSpec& spec) {
  const double alpha = spec.alpha;
  DensityField field;
  if (c.initial.kind == "file") {
    field = read_csv(c.initial.path);
    if (field.grid.n_cells != c.n_cells) {
      std::ostringstream msg;
      msg << "initial file '" << c.initial.path << "' has " << field.grid.n_cells << " cells, grid has " << c.n_cells;
      fail(ErrorCode::validation_error, msg.str());
    }
    for (double r : field.values)
      if (!(r >= 0.0 && r <= alpha)) fail(ErrorCode::out_of_range, "initial file has values outside [0, alpha]");
  } else {
    field = project_initial(initial_function(c, alpha), Grid1D(c.n_cells), alpha);
  }
  if (spec.singular()) {
    const double d = c.solver.margin(alpha);
    for (auto& r : field.values) r = std::clamp(r, d, alpha - d);
  }
  return field;
}

// --- validation -------------------------------------------------------------------

void validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  const double alpha = c.problem.alpha;
  need(alpha > 0.0 && std::isfinite(alpha), "problem.alpha must be positive");
  need(c.n_cells >= 2, "grid.n_cells must be at least 2");
  need(c.dt > 0.0 && std::isfinite(c.dt), "time.dt must be positive");
  need(c.t_end >= 0.0, "time.t_end must be nonnegative");
  if (alpha > 0.0) {
    try {
      build_base_spec(c);
    } catch (const Error& e) {
      problems.push_back(std::string("problem: ") + e.what());
    }
    if (c.regularization.epsilon) {
      try {
        regularization_params(c).validate(alpha);
      } catch (const Error& e) {
        problems.push_back(e.what());
      }
    } else {
      need(!c.regularization.kappa && !c.regularization.s0 && !c.regularization.band_width,
           "regularization parameters given without regularization.epsilon");
    }
  }
  try {
    SchemeConfig s = c.solver;
    s.dt = c.dt > 0.0 ? c.dt : 1.0;
    s.validate();
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  try {
    c.detector.validate();
  } catch (const Error& e) {
    problems.push_back(e.what());
  }

  const auto& in = c.initial;
  static const std::vector<std::string> kinds{"constant",         "cosine",   "gaussian", "indicator",
                                              "barenblatt",       "two_bump", "file",     "alpha_minus_bump"};
  if (std::find(kinds.begin(), kinds.end(), in.kind) == kinds.end()) {
    problems.push_back("initial.kind '" + in.kind + "' is not one of constant, cosine, gaussian, indicator, "
                       "barenblatt, alpha_minus_bump, two_bump, file");
  } else if (in.kind == "constant") {
    need(in.value >= 0.0 && in.value <= alpha, "initial.value must lie in [0, alpha]");
  } else if (in.kind == "cosine") {
    need(in.width > 0.0, "initial.width must be positive");
    need(in.value - std::abs(in.height) >= 0.0 && in.value + std::abs(in.height) <= alpha,
         "initial cosine profile leaves [0, alpha]");
  } else if (in.kind == "gaussian") {
    need(in.width > 0.0, "initial.width must be positive");
  } else if (in.kind == "indicator") {
    need(in.value >= 0.0 && in.value <= alpha && in.height >= 0.0 && in.height <= alpha,
         "initial.value and initial.height must lie in [0, alpha]");
    need(in.width > 0.0, "initial.width must be positive");
  } else if (in.kind == "barenblatt") {
    need(in.mass && *in.mass > 0.0, "initial.mass must be positive for a barenblatt initial datum");
    need(in.exponent > 1.0, "initial.exponent must exceed 1");
    if (in.mass && *in.mass > 0.0 && in.exponent > 1.0) {
      const double r = std::sqrt(2.0 * barenblatt_constant(*in.mass, in.exponent));
      need(in.center - r > 0.0 && in.center + r < 1.0, "initial barenblatt support leaves (0, 1)");
    }
  } else if (in.kind == "alpha_minus_bump") {
    need(in.width > 0.0 && in.center - in.width >= 0.0 && in.center + in.width <= 1.0,
         "initial bump [center - width, center + width] must lie in [0, 1]");
    const double h = in.mass ? *in.mass / in.width : in.height;
    need(h > 0.0 && h <= alpha, "initial bump height (mass / width) must lie in (0, alpha]");
  } else if (in.kind == "two_bump") {
    need(in.masses.size() == 2 && in.centers.size() == 2, "initial.masses and initial.centers need two entries each");
    need(in.radius > 0.0, "initial.radius must be positive");
    if (in.masses.size() == 2 && in.centers.size() == 2 && in.radius > 0.0) {
      const double cap = bump_capacity(in.radius);
      for (std::size_t k = 0; k < 2; ++k) {
        need(in.masses[k] > 0.0, "initial.masses must be positive");
        need(in.centers[k] - in.radius > 0.0 && in.centers[k] + in.radius < 1.0, "initial bump support leaves (0, 1)");
      }
      std::ostringstream msg;
      msg << "initial.masses exceed the bump capacity radius^3/3 = " << cap;
      need(in.masses[0] <= cap && in.masses[1] <= cap && in.masses[0] + in.masses[1] <= 2.0 * cap, msg.str());
      need(0.25 * in.radius * in.radius * std::max(in.masses[0], in.masses[1]) / cap <= alpha,
           "initial bump height exceeds alpha");
      need(std::abs(in.centers[0] - in.centers[1]) > 2.0 * in.radius, "initial bump supports overlap");
    }
  } else if (in.kind == "file") {
    need(!in.path.empty(), "initial.path is required for a file initial datum");
  }

  need(!c.outputs.directory.empty(), "outputs.directory must not be empty");
  static const std::vector<std::string> flags{"trajectory", "final", "steady", "report"};
  for (const auto& f : c.outputs.flags)
    need(std::find(flags.begin(), flags.end(), f) != flags.end(), "outputs.flags: unknown flag '" + f + "'");
  need(c.audit.pairs >= 1, "audit.pairs must be at least 1");
  need(parse_axis(c.study.axis).has_value(), "study.axis '" + c.study.axis + "' is not a refinement axis");
  need(c.study.n_cells >= 2 && c.study.dt > 0.0 && c.study.t_end > 0.0, "study grid, dt and t_end must be positive");
  if (c.study.axis == "epsilon") {
    need(c.study.epsilons.size() >= 3, "study.epsilons needs at least 3 values");
  } else {
    need(c.study.levels >= 3, "study.levels must be at least 3");
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << problems.size() << " configuration problem" << (problems.size() == 1 ? "" : "s") << ":";
    for (const auto& p : problems) msg << "\n  - " << p;
    fail(ErrorCode::validation_error, msg.str());
  }
}

}  // namespace satflow::app
