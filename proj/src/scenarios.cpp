#include "stlreach/scenarios.hpp"

#include "stlreach/errors.hpp"
#include "stlreach/parser.hpp"
#include "stlreach/plot_data.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace stlreach {

using nlohmann::json;

Box Region::box2d() const {
  Box b;
  b.lo.resize(2);
  b.hi.resize(2);
  b.lo << xmin, ymin;
  b.hi << xmax, ymax;
  return b;
}

Box Region::state_box(int state_dim) const {
  Box b;
  b.lo = Eigen::VectorXd::Constant(state_dim, -std::numeric_limits<double>::infinity());
  b.hi = Eigen::VectorXd::Constant(state_dim, std::numeric_limits<double>::infinity());
  b.lo[0] = xmin;
  b.hi[0] = xmax;
  b.lo[1] = ymin;
  b.hi[1] = ymax;
  return b;
}

namespace {

// Evaluates {expr} window entries: number | T, joined by + or -.
double eval_window_expr(const std::string &expr, double T) {
  double acc = 0.0;
  double sign = 1.0;
  std::size_t i = 0;
  bool any = false;
  while (i < expr.size()) {
    char c = expr[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '+') {
      sign = 1.0;
      ++i;
    } else if (c == '-') {
      sign = -1.0;
      ++i;
    } else if (c == 'T') {
      acc += sign * T;
      sign = 1.0;
      ++i;
      any = true;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = i;
      while (end < expr.size() &&
             (std::isdigit(static_cast<unsigned char>(expr[end])) || expr[end] == '.'))
        ++end;
      acc += sign * std::stod(expr.substr(i, end - i));
      sign = 1.0;
      i = end;
      any = true;
    } else {
      throw ConfigError("bad window expression '" + expr + "'");
    }
  }
  if (!any) throw ConfigError("empty window expression");
  return acc;
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

std::string Scenario::formula_text(double T) const {
  // Pass 1: evaluate {expr} occurrences.
  std::string s;
  for (std::size_t i = 0; i < formula_template.size();) {
    if (formula_template[i] == '{') {
      auto close = formula_template.find('}', i);
      if (close == std::string::npos) throw ConfigError("unterminated '{' in formula");
      double v = eval_window_expr(formula_template.substr(i + 1, close - i - 1), T);
      std::ostringstream os;
      os << v;
      s += os.str();
      i = close + 1;
    } else {
      s += formula_template[i++];
    }
  }
  // Pass 2: replace region identifiers with inbox macros. F/G/U followed by
  // '[' are operators; 'true' and 'inbox' are grammar keywords.
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    char c = s[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = i;
      while (end < s.size() && ident_char(s[end])) ++end;
      std::string word = s.substr(i, end - i);
      std::size_t look = end;
      while (look < s.size() && std::isspace(static_cast<unsigned char>(s[look]))) ++look;
      bool is_operator = (word == "F" || word == "G" || word == "U") && look < s.size() &&
                         s[look] == '[';
      if (is_operator || word == "true" || word == "inbox") {
        out += word;
      } else {
        auto it = regions.find(word);
        if (it == regions.end())
          throw ConfigError("unknown region name '" + word + "' in formula");
        const Region &r = it->second;
        std::ostringstream os;
        os << "inbox(" << r.xmin << "," << r.xmax << "," << r.ymin << "," << r.ymax << ")";
        out += os.str();
      }
      i = end;
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

Formula Scenario::formula(double T) const {
  return parse_formula(formula_text(T), system.state_dim());
}

World Scenario::world() const {
  World w;
  for (const auto &[name, r] : regions)
    if (r.kind == "obstacle") w.obstacles[name] = r.box2d();
  return w;
}

int Scenario::plan_steps(double T) const {
  double steps = T / planner.dt;
  long n = std::lround(steps);
  if (std::abs(steps - static_cast<double>(n)) > 1e-9)
    throw ConfigError("mission time is not a multiple of the planner dt");
  return static_cast<int>(n);
}

namespace {

MpcConfig default_controller(int horizon, double margin, int substeps) {
  MpcConfig c;
  c.horizon = horizon;
  Eigen::VectorXd qd(4);
  qd << 10, 10, 1, 1;
  c.Q = qd.asDiagonal();
  c.P = 5.0 * c.Q;
  c.R = Eigen::MatrixXd::Identity(2, 2);
  c.safety_margin = margin;
  c.substeps = substeps;
  return c;
}

Grid default_grid(const LinearSystem &sys, int pos_points, int vel_points) {
  std::vector<int> counts = {pos_points, pos_points, vel_points, vel_points};
  return Grid(sys.state_lo, sys.state_hi, counts);
}

Scenario scenario1() {
  Scenario s;
  s.name = "scenario1";
  s.system = double_integrator({0.0, 0.0}, {15.0, 15.0}, 1.0, 0.5);
  s.mission_time = 10.0;
  s.regions["T1"] = {"T1", 2.0, 5.0, 6.0, 9.0, "target", true};
  s.regions["T2"] = {"T2", 10.0, 13.0, 6.0, 9.0, "target", true};
  s.regions["G"] = {"G", 5.0, 7.2, 3.5, 6.0, "goal", true};
  s.regions["O"] = {"O", 7.5, 9.5, 4.5, 7.5, "obstacle", true};
  s.formula_template = "F[0,{T-5}] ( G[0,5] T1 | G[0,5] T2 ) & G[0,{T}] !O & F[0,{T}] G";
  s.grid = default_grid(s.system, 31, 21);
  s.planner.dt = 1.0;
  s.controller = default_controller(10, 0.2, 5);
  return s;
}

Scenario scenario2() {
  Scenario s;
  s.name = "scenario2";
  Eigen::Vector2d plo(-1.0, -2.0), phi(1.0, 2.0);
  s.system = double_integrator(plo, phi, 0.3, 1.0);
  s.mission_time = 10.0;
  s.regions["r1"] = {"r1", -1.0, 1.0, -0.5, 0.5, "corridor", true};
  s.regions["r2"] = {"r2", -0.5, 0.5, -2.0, 2.0, "corridor", true};
  s.regions["O1"] = {"O1", 0.3, 0.5, 0.3, 0.5, "obstacle", true};
  s.regions["O2"] = {"O2", -0.5, -0.3, 0.3, 0.5, "obstacle", true};
  s.regions["O3"] = {"O3", 0.3, 0.5, -0.5, -0.3, "obstacle", true};
  s.regions["g1"] = {"g1", 0.55, 0.85, -0.15, 0.15, "goal", true};
  s.regions["g2"] = {"g2", -0.15, 0.15, 0.8, 1.1, "goal", true};
  s.regions["t1"] = {"t1", -0.85, -0.55, -0.15, 0.15, "special", true};
  s.regions["t2"] = {"t2", -0.15, 0.15, -1.3, -0.9, "special", true};
  s.formula_template = "(!t1 U[0,{T}] g1) & (!t2 U[0,{T}] g2) & G[0,{T}] (r1 | r2) & "
                       "G[0,{T}] (!O1 & !O2 & !O3)";
  s.grid = default_grid(s.system, 31, 21);
  s.planner.dt = 0.5;
  s.controller = default_controller(10, 0.03, 5);
  return s;
}

Scenario scenario3() {
  Scenario s;
  s.name = "scenario3";
  Eigen::Vector2d plo(0.0, 0.0), phi(15.0, 10.0);
  s.system = double_integrator(plo, phi, 2.0, 0.5);
  s.mission_time = 20.0;
  s.regions["O1"] = {"O1", 5.0, 6.0, 0.0, 4.0, "obstacle", true};
  s.regions["O2"] = {"O2", 5.0, 6.0, 6.0, 10.0, "obstacle", true};
  s.regions["O3"] = {"O3", 10.0, 11.0, 0.0, 4.0, "obstacle", true};
  s.regions["O4"] = {"O4", 10.0, 11.0, 6.0, 10.0, "obstacle", true};
  s.regions["O5"] = {"O5", 7.5, 8.5, 0.0, 2.0, "obstacle", true};
  s.regions["D1"] = {"D1", 5.0, 6.0, 4.0, 6.0, "door", true};
  s.regions["D2"] = {"D2", 10.0, 11.0, 4.0, 6.0, "door", true};
  s.regions["K1"] = {"K1", 1.0, 2.5, 6.5, 8.0, "key", true};
  s.regions["K2"] = {"K2", 7.0, 8.5, 6.5, 8.0, "key", true};
  s.regions["G"] = {"G", 12.5, 14.5, 4.0, 6.0, "goal", true};
  s.formula_template = door_key_formula_text(s);
  s.grid = default_grid(s.system, 31, 21);
  s.planner.dt = 1.0;
  s.controller = default_controller(10, 0.2, 5);
  return s;
}

Scenario from_json(const json &j, const std::string &origin) {
  Scenario s;
  s.name = j.value("name", origin);
  const auto &sys = j.at("system");
  std::string type = sys.value("type", "double_integrator");
  if (type != "double_integrator")
    throw ConfigError("unsupported system type '" + type + "'");
  auto plo = sys.at("pos_lo").get<std::vector<double>>();
  auto phi = sys.at("pos_hi").get<std::vector<double>>();
  if (plo.size() != 2 || phi.size() != 2) throw ConfigError("pos bounds must have 2 entries");
  s.system = double_integrator({plo[0], plo[1]}, {phi[0], phi[1]},
                               sys.at("vel_max").get<double>(),
                               sys.at("acc_max").get<double>());
  s.mission_time = j.value("mission_time", 10.0);
  for (const auto &[name, rj] : j.at("regions").items()) {
    auto b = rj.at("box").get<std::vector<double>>();
    if (b.size() != 4) throw ConfigError("region box must be [xmin,xmax,ymin,ymax]");
    s.regions[name] = {name, b[0], b[1], b[2], b[3], rj.value("kind", "target"),
                       rj.value("approximate", true)};
  }
  s.formula_template = j.at("formula").get<std::string>();
  int pos_points = 31, vel_points = 21;
  if (j.contains("grid")) {
    pos_points = j["grid"].value("position_points", 31);
    vel_points = j["grid"].value("velocity_points", 21);
  }
  s.grid = default_grid(s.system, pos_points, vel_points);
  if (j.contains("planner")) {
    s.planner.dt = j["planner"].value("dt", 1.0);
    s.planner.objective.rho_weight = j["planner"].value("rho_weight", 10.0);
    s.planner.milp.node_limit = j["planner"].value("node_limit", s.planner.milp.node_limit);
  }
  int horizon = 10, substeps = 5;
  double margin = 0.2;
  if (j.contains("controller")) {
    horizon = j["controller"].value("horizon", 10);
    substeps = j["controller"].value("substeps", 5);
    margin = j["controller"].value("margin", 0.2);
  }
  s.controller = default_controller(horizon, margin, substeps);
  return s;
}

} // namespace

std::string door_key_formula_text(const Scenario &scn) {
  std::vector<std::string> doors, keys, obstacles;
  bool has_goal = false;
  for (const auto &[name, r] : scn.regions) {
    if (r.kind == "door") doors.push_back(name);
    if (r.kind == "key") keys.push_back(name);
    if (r.kind == "obstacle") obstacles.push_back(name);
    if (r.kind == "goal") has_goal = true;
  }
  if (doors.size() != keys.size())
    throw ConfigError("door/key count mismatch: " + std::to_string(doors.size()) +
                      " doors vs " + std::to_string(keys.size()) + " keys");
  std::ostringstream os;
  for (std::size_t i = 0; i < doors.size(); ++i)
    os << "(!D" << i + 1 << " U[0,{T}] K" << i + 1 << ") & ";
  if (!has_goal) throw ConfigError("door/key scenario needs a goal region G");
  os << "F[0,{T}] G";
  if (!obstacles.empty()) {
    os << " & G[0,{T}] (";
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      if (i) os << " & ";
      os << "!O" << i + 1;
    }
    os << ")";
  }
  return os.str();
}

Formula door_key_semantics(const Scenario &scn, double T) {
  Scenario tmp = scn;
  tmp.formula_template = door_key_formula_text(scn);
  return tmp.formula(T);
}

Scenario load_scenario(const std::string &name_or_path) {
  if (name_or_path == "scenario1") return scenario1();
  if (name_or_path == "scenario2") return scenario2();
  if (name_or_path == "scenario3") return scenario3();
  std::ifstream is(name_or_path);
  if (!is) throw ConfigError("unknown scenario '" + name_or_path + "' (not a built-in, "
                             "and no such file)");
  json j;
  try {
    is >> j;
  } catch (const std::exception &e) {
    throw ConfigError("malformed scenario file " + name_or_path + ": " + e.what());
  }
  try {
    return from_json(j, name_or_path);
  } catch (const json::exception &e) {
    throw ConfigError("malformed scenario file " + name_or_path + ": " + e.what());
  }
}

void save_scenario_json(const Scenario &scn, const std::string &path) {
  json j;
  j["name"] = scn.name;
  j["mission_time"] = scn.mission_time;
  j["system"] = {{"type", "double_integrator"},
                 {"pos_lo", {scn.system.state_lo[0], scn.system.state_lo[1]}},
                 {"pos_hi", {scn.system.state_hi[0], scn.system.state_hi[1]}},
                 {"vel_max", scn.system.state_hi[2]},
                 {"acc_max", scn.system.input_hi[0]}};
  json regions = json::object();
  for (const auto &[name, r] : scn.regions) {
    regions[name] = {{"box", {r.xmin, r.xmax, r.ymin, r.ymax}},
                     {"kind", r.kind},
                     {"approximate", r.approximate}};
  }
  j["regions"] = regions;
  j["formula"] = scn.formula_template;
  j["grid"] = {{"position_points", scn.grid.counts[0]},
               {"velocity_points", scn.grid.counts[2]}};
  j["planner"] = {{"dt", scn.planner.dt},
                  {"rho_weight", scn.planner.objective.rho_weight},
                  {"node_limit", scn.planner.milp.node_limit}};
  j["controller"] = {{"horizon", scn.controller.horizon},
                     {"substeps", scn.controller.substeps},
                     {"margin", scn.controller.safety_margin}};
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

MonteCarloReport monte_carlo_feasibility(const Scenario &scn, const FeasibilitySet &fs,
                                         double T, int n_samples, std::uint64_t seed,
                                         double band) {
  MonteCarloReport rep;
  rep.n = n_samples;
  if (band <= 0.0)
    band = 2.0 * std::max(scn.grid.spacing(0), scn.grid.spacing(1));
  rep.band = band;
  if (n_samples == 0) return rep;

  Formula phi = scn.formula(T);
  int N = scn.plan_steps(T);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(scn.system.state_lo[0], scn.system.state_hi[0]);
  std::uniform_real_distribution<double> uy(scn.system.state_lo[1], scn.system.state_hi[1]);

  MilpOptions opt = scn.planner.milp;
  opt.stop_at_first_incumbent = true;

  for (int i = 0; i < n_samples; ++i) {
    MonteCarloSample s;
    s.x0 = Eigen::VectorXd::Zero(scn.system.state_dim());
    s.x0[0] = ux(rng);
    s.x0[1] = uy(rng);
    s.h = fs.value->value_at(0.0, s.x0);
    s.brt_feasible = s.h < 0.0;
    s.in_band = std::abs(s.h) < band;
    auto res = plan(phi, scn.system, scn.planner.dt, s.x0, N, scn.planner.objective, opt);
    s.milp_feasible = res.has_value();
    if (s.in_band) {
      ++rep.band_excluded;
    } else if (s.brt_feasible == s.milp_feasible) {
      if (s.brt_feasible) ++rep.both_feasible;
      else ++rep.both_infeasible;
    } else {
      ++rep.off_band_disagreements;
    }
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

OverlayReport brt_overlay_report(const Scenario &scn, const LevelSetGrid &lsg,
                                 const Mlp &net, double t_slice) {
  if (net.input_dim() != 1 + lsg.grid.dim())
    throw ConfigError("network input dimension does not match the grid");
  if (!(lsg.grid == scn.grid))
    throw ConfigError("feasibility grid does not match the scenario grid");
  const Grid &g = lsg.grid;
  const int nx = g.counts[0], ny = g.counts[1];
  std::vector<double> solver_field(static_cast<std::size_t>(nx) * ny);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(nx) * ny, 1 + g.dim());
  Eigen::VectorXd x(g.dim());
  x.setZero();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      x[0] = g.coord(0, i);
      x[1] = g.coord(1, j);
      std::size_t idx = static_cast<std::size_t>(i) * ny + j;
      solver_field[idx] = lsg.value_at(t_slice, x);
      pts(static_cast<Eigen::Index>(idx), 0) = t_slice;
      for (int d = 0; d < g.dim(); ++d)
        pts(static_cast<Eigen::Index>(idx), 1 + d) = x[d];
    }
  Eigen::VectorXd pred = evaluate_batch(net, pts);
  std::vector<double> net_field(pred.data(), pred.data() + pred.size());

  OverlayReport rep;
  rep.t_slice = t_slice;
  rep.cell = std::max(g.spacing(0), g.spacing(1));
  rep.solver_contour = zero_contour(solver_field, nx, ny, g.lo[0], g.lo[1], g.spacing(0),
                                    g.spacing(1));
  rep.surrogate_contour = zero_contour(net_field, nx, ny, g.lo[0], g.lo[1], g.spacing(0),
                                       g.spacing(1));
  if (rep.solver_contour.empty() || rep.surrogate_contour.empty())
    throw ConfigError("empty contour in overlay comparison");
  rep.hausdorff = hausdorff_distance(contour_points(rep.solver_contour),
                                     contour_points(rep.surrogate_contour));
  return rep;
}

} // namespace stlreach
