// Command-line front end: verify / train / plan / simulate / compare /
// montecarlo / plot. Exit codes: 0 success, 2 configuration error,
// 3 infeasible, 4 numerical failure.

#include "stlreach/errors.hpp"
#include "stlreach/manifest.hpp"
#include "stlreach/milp.hpp"
#include "stlreach/mpc.hpp"
#include "stlreach/parser.hpp"
#include "stlreach/plot_data.hpp"
#include "stlreach/robustness.hpp"
#include "stlreach/scenarios.hpp"
#include "stlreach/stl_to_reach.hpp"
#include "stlreach/surrogate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stlreach;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Grid parse_grid_override(const Scenario &scn, const std::string &spec) {
  if (spec.empty()) return scn.grid;
  std::vector<int> counts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) counts.push_back(std::stoi(tok));
  if (counts.size() != static_cast<std::size_t>(scn.grid.dim()))
    throw ConfigError("--grid needs " + std::to_string(scn.grid.dim()) + " counts");
  return Grid(scn.grid.lo, scn.grid.hi, counts);
}

Eigen::VectorXd parse_x0(const std::string &spec, int state_dim) {
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(state_dim);
  if (vals.size() != 2 && vals.size() != static_cast<std::size_t>(state_dim))
    throw ConfigError("--x0 needs 2 (position, zero velocity) or " +
                      std::to_string(state_dim) + " values");
  for (std::size_t i = 0; i < vals.size(); ++i) x0[static_cast<int>(i)] = vals[i];
  return x0;
}

json trajectory_to_json(const Trajectory &t) {
  json j;
  j["dt"] = t.dt;
  j["t0"] = t.t0;
  j["states"] = json::array();
  for (const auto &x : t.states) {
    json row = json::array();
    for (int d = 0; d < x.size(); ++d) row.push_back(x[d]);
    j["states"].push_back(row);
  }
  j["inputs"] = json::array();
  for (const auto &u : t.inputs) {
    json row = json::array();
    for (int d = 0; d < u.size(); ++d) row.push_back(u[d]);
    j["inputs"].push_back(row);
  }
  return j;
}

std::vector<PlotRegion> plot_regions(const Scenario &scn) {
  std::vector<PlotRegion> out;
  for (const auto &[name, r] : scn.regions)
    out.push_back({name, r.xmin, r.xmax, r.ymin, r.ymax, r.kind});
  return out;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string &scenario, double T_opt, const std::string &grid_spec,
               std::string out_dir, std::uint64_t seed) {
  Scenario scn = load_scenario(scenario);
  double T = T_opt > 0 ? T_opt : scn.mission_time;
  Grid grid = parse_grid_override(scn, grid_spec);
  if (out_dir.empty()) out_dir = "out/verify-" + scn.name;
  fs::create_directories(out_dir);

  ReachOptions opt;
  opt.out_dt = scn.planner.dt;
  Timer timer;
  VerifyReport rep;
  FeasibilitySet fset = verify_formula(scn.system, scn.formula(T), T, grid, opt, &rep);
  double solve_s = timer.seconds();

  std::string lsg_path = out_dir + "/feasibility.lsg";
  save_level_set(*fset.value, lsg_path);

  json sidecar;
  sidecar["scenario"] = scn.name;
  sidecar["scenario_source"] = scenario;
  sidecar["T"] = T;
  sidecar["formula"] = scn.formula_text(T);
  sidecar["grid_counts"] = grid.counts;
  sidecar["out_dt"] = opt.out_dt;
  sidecar["solver"] = {{"scheme", "upwind-lax-friedrichs"},
                       {"cfl_factor", opt.brt.cfl_factor},
                       {"permutation_cap", opt.permutation_cap}};
  sidecar["num_targets"] = rep.num_targets;
  sidecar["orderings"] = rep.orderings;
  sidecar["brt_solves"] = rep.brt_solves;
  sidecar["feasible_fraction"] = rep.feasible_fraction;
  std::string sidecar_path = out_dir + "/feasibility.json";
  {
    std::ofstream os(sidecar_path);
    os << sidecar.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "verify";
  man.scenario = scn.name;
  man.seed = seed;
  man.config = {{"T", T}, {"grid", grid.counts}};
  man.add_output(lsg_path);
  man.add_output(sidecar_path);
  man.write(out_dir + "/manifest.json");
  {
    std::ofstream os(out_dir + "/timings.json");
    os << json({{"verify_s", solve_s}}).dump(2) << "\n";
  }

  std::cout << "feasible volume fraction: " << rep.feasible_fraction << "\n";
  std::cout << "orderings: " << rep.orderings.size() << ", BRT solves: " << rep.brt_solves
            << ", wall: " << solve_s << " s\n";
  std::cout << "wrote " << lsg_path << "\n";
  return 0;
}

int cmd_train(const std::string &feas_path, std::string out_dir, TrainConfig cfg,
              double subsample) {
  LevelSetGrid lsg = load_level_set(feas_path);
  if (out_dir.empty()) out_dir = "out/train";
  fs::create_directories(out_dir);

  Dataset data = build_dataset(lsg, subsample, cfg.seed);
  TrainReport rep;
  Mlp net = train(data, cfg, &rep);

  std::string net_path = out_dir + "/network.bin";
  save_mlp(net, net_path);

  double band = 2.0 * lsg.grid.max_spacing();
  SurrogateMetrics metrics = surrogate_metrics(net, data, data.val_idx, cfg.epsilon, band);

  json report;
  report["config"] = {{"epsilon", cfg.epsilon},     {"lambda", cfg.lambda},
                      {"batch_size", cfg.batch_size}, {"epochs", cfg.epochs},
                      {"patience", cfg.patience},   {"learning_rate", cfg.learning_rate},
                      {"seed", cfg.seed},           {"subsample", subsample},
                      {"hidden", cfg.hidden}};
  report["records"] = data.size();
  report["h_clip"] = data.h_clip;
  report["h_std"] = data.h_std;
  report["epochs_run"] = rep.epochs_run;
  report["best_epoch"] = rep.best_epoch;
  report["best_val_loss"] = rep.best_val_loss;
  report["val_mse_raw"] = metrics.mse_raw;
  report["val_mse_unit"] = metrics.mse_unit;
  report["false_safe_rate"] = metrics.false_safe_rate;
  report["sign_agreement_off_band"] = metrics.sign_agreement;
  std::string report_path = out_dir + "/training_report.json";
  {
    std::ofstream os(report_path);
    os << report.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "train";
  man.seed = cfg.seed;
  man.config = report["config"];
  man.add_output(net_path);
  man.add_output(report_path);
  man.write(out_dir + "/manifest.json");
  {
    std::ofstream os(out_dir + "/timings.json");
    os << json({{"train_s", rep.wall_s}}).dump(2) << "\n";
  }

  std::cout << "val MSE (unit scale): " << metrics.mse_unit
            << ", false-safe rate: " << metrics.false_safe_rate
            << ", sign agreement: " << metrics.sign_agreement << "\n";
  std::cout << "wrote " << net_path << "\n";
  return 0;
}

std::optional<PlanResult> plan_for_scenario(const Scenario &scn, double T,
                                            const Eigen::VectorXd &x0) {
  Formula phi = scn.formula(T);
  return plan(phi, scn.system, scn.planner.dt, x0, scn.plan_steps(T),
              scn.planner.objective, scn.planner.milp);
}

int cmd_plan(const std::string &scenario, double T_opt, const std::string &x0_spec,
             std::string out_dir, const std::string &feas_path, std::uint64_t seed) {
  Scenario scn = load_scenario(scenario);
  double T = T_opt > 0 ? T_opt : scn.mission_time;
  Eigen::VectorXd x0 = parse_x0(x0_spec, scn.system.state_dim());
  if (out_dir.empty()) out_dir = "out/plan-" + scn.name;
  fs::create_directories(out_dir);

  Timer timer;
  auto result = plan_for_scenario(scn, T, x0);
  if (!result) {
    std::cout << "infeasible start";
    if (!feas_path.empty()) {
      LevelSetGrid lsg = load_level_set(feas_path);
      std::cout << ": h(0, x0) = " << lsg.value_at(0.0, x0);
    }
    std::cout << "\n";
    return 3;
  }

  json pj;
  pj["trajectory"] = trajectory_to_json(result->trajectory);
  pj["rho"] = result->rho;
  pj["objective"] = result->objective;
  pj["stats"] = {{"nodes", result->stats.nodes},
                 {"lp_iterations", result->stats.lp_iterations},
                 {"gap", result->stats.gap}};
  pj["scenario"] = scn.name;
  pj["T"] = T;
  std::string plan_path = out_dir + "/plan.json";
  {
    std::ofstream os(plan_path);
    os << pj.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "plan";
  man.scenario = scn.name;
  man.seed = seed;
  man.config = {{"T", T}, {"x0", x0_spec}};
  man.add_output(plan_path);
  man.write(out_dir + "/manifest.json");
  {
    std::ofstream os(out_dir + "/timings.json");
    os << json({{"plan_s", timer.seconds()}}).dump(2) << "\n";
  }

  std::cout << "feasible plan, rho = " << result->rho
            << ", nodes = " << result->stats.nodes << "\n";
  std::cout << "wrote " << plan_path << "\n";
  return 0;
}

int cmd_simulate(const std::string &scenario, double T_opt, const std::string &x0_spec,
                 std::string out_dir, const std::string &feas_path,
                 const std::vector<std::string> &move_obstacle, double move_at,
                 double extend, std::uint64_t seed) {
  Scenario scn = load_scenario(scenario);
  double T = T_opt > 0 ? T_opt : scn.mission_time;
  Eigen::VectorXd x0 = parse_x0(x0_spec, scn.system.state_dim());
  if (out_dir.empty()) out_dir = "out/simulate-" + scn.name;
  fs::create_directories(out_dir);

  Timer timer;
  auto result = plan_for_scenario(scn, T, x0);
  if (!result) {
    std::cout << "infeasible start";
    if (!feas_path.empty()) {
      LevelSetGrid lsg = load_level_set(feas_path);
      std::cout << ": h(0, x0) = " << lsg.value_at(0.0, x0);
    }
    std::cout << "\n";
    return 3;
  }

  World world = scn.world();
  if (!move_obstacle.empty()) {
    if (move_obstacle.size() != 3)
      throw ConfigError("--move-obstacle needs NAME DX DY (with --at T)");
    world.script.push_back({move_obstacle[0], std::stod(move_obstacle[1]),
                            std::stod(move_obstacle[2]), move_at});
  }

  Trajectory ref = resample_plan(scn.system, result->trajectory, scn.controller.substeps);
  TrackingController ctrl(scn.system, ref, scn.controller);
  double dt_c = ref.dt;
  int steps = static_cast<int>(std::lround(T * extend / dt_c));
  ClosedLoopResult loop = run_closed_loop(scn.system, ctrl, world, steps, x0);

  double rho_cl = robustness(loop.trace, 0, scn.formula(T));

  std::string plan_path = out_dir + "/plan.json";
  {
    json pj;
    pj["trajectory"] = trajectory_to_json(result->trajectory);
    pj["rho"] = result->rho;
    pj["scenario"] = scn.name;
    pj["T"] = T;
    std::ofstream os(plan_path);
    os << pj.dump(2) << "\n";
  }
  std::string trace_path = out_dir + "/trace.csv";
  write_trajectory_csv(trace_path, loop.trace);
  std::string events_path = out_dir + "/events.jsonl";
  {
    std::ofstream os(events_path);
    for (const auto &ev : loop.events) {
      json e;
      e["t"] = ev.t;
      e["x"] = std::vector<double>(ev.x.data(), ev.x.data() + ev.x.size());
      e["u"] = std::vector<double>(ev.u.data(), ev.u.data() + ev.u.size());
      e["qp_status"] = ev.qp_status == QpStatus::Solved ? "solved"
                       : ev.qp_status == QpStatus::MaxIterations ? "max_iterations"
                                                                 : "infeasible";
      e["active_constraints"] = ev.active_constraints;
      e["violation_flag"] = ev.violation;
      e["emergency_brake"] = ev.emergency_brake;
      os << e.dump() << "\n";
    }
  }

  RunManifest man;
  man.command = "simulate";
  man.scenario = scn.name;
  man.seed = seed;
  man.config = {{"T", T}, {"x0", x0_spec}, {"extend", extend}};
  if (!move_obstacle.empty())
    man.config["move_obstacle"] = {{"name", move_obstacle[0]},
                                   {"dx", std::stod(move_obstacle[1])},
                                   {"dy", std::stod(move_obstacle[2])},
                                   {"at", move_at}};
  man.add_output(plan_path);
  man.add_output(trace_path);
  man.add_output(events_path);
  man.write(out_dir + "/manifest.json");
  {
    std::ofstream os(out_dir + "/timings.json");
    os << json({{"simulate_s", timer.seconds()}}).dump(2) << "\n";
  }

  std::cout << "plan rho = " << result->rho << ", closed-loop rho = " << rho_cl
            << ", collisions = " << loop.violations
            << ", flagged steps = " << loop.flagged_steps << "\n";
  std::cout << "wrote " << trace_path << "\n";
  return 0;
}

int cmd_compare(const std::string &feas_path, const std::string &net_path,
                std::string out_dir) {
  LevelSetGrid lsg = load_level_set(feas_path);
  // Sidecar carries the provenance needed to re-solve.
  fs::path sidecar_path = fs::path(feas_path).replace_extension(".json");
  std::ifstream sif(sidecar_path);
  if (!sif) throw ConfigError("missing sidecar " + sidecar_path.string());
  json sidecar;
  sif >> sidecar;
  Scenario scn = load_scenario(sidecar.at("scenario_source").get<std::string>());
  double T = sidecar.at("T").get<double>();
  Grid grid = lsg.grid;
  if (out_dir.empty()) out_dir = "out/compare";
  fs::create_directories(out_dir);

  // Baseline: fresh solve of the feasibility set.
  ReachOptions opt;
  opt.out_dt = sidecar.value("out_dt", scn.planner.dt);
  Timer t_solve;
  FeasibilitySet fresh = verify_formula(scn.system, scn.formula(T), T, grid, opt);
  double solve_s = t_solve.seconds();

  // Proposed: surrogate sweep over the full spatial grid at t = 0. Passing
  // a second level-set file instead of a network degenerates to a second
  // solve (solver vs solver).
  double sweep_s = 0.0;
  bool is_network = true;
  {
    std::ifstream probe(net_path, std::ios::binary);
    if (!probe) throw ConfigError("missing network file " + net_path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    is_network = std::string(magic, 4) == "MLP1";
  }
  json overlay;
  if (is_network) {
    Mlp net = load_mlp(net_path);
    Timer t_sweep;
    Eigen::VectorXd pred = evaluate_grid_slice(net, grid, 0.0);
    sweep_s = t_sweep.seconds();
    overlay["sweep_points"] = grid.num_nodes();
    // Contour overlay data on the zero-velocity position slice.
    OverlayReport ov = brt_overlay_report(scn, lsg, net, 0.0);
    overlay["hausdorff"] = ov.hausdorff;
    overlay["cell"] = ov.cell;
    write_contour_csv(out_dir + "/contour_solver.csv", ov.solver_contour, "solver");
    write_contour_csv(out_dir + "/contour_surrogate.csv", ov.surrogate_contour,
                      "surrogate");
    (void)pred;
  } else {
    Timer t_sweep;
    FeasibilitySet again = verify_formula(scn.system, scn.formula(T), T, grid, opt);
    sweep_s = t_sweep.seconds();
    overlay["sweep_points"] = grid.num_nodes();
    (void)again;
  }

  double speedup = solve_s / std::max(sweep_s, 1e-12);
  json report;
  report["solve_s"] = solve_s;
  report["sweep_s"] = sweep_s;
  report["speedup"] = speedup;
  report["overlay"] = overlay;
  {
    std::ofstream os(out_dir + "/compare.json");
    os << report.dump(2) << "\n";
  }
  std::cout << "solve: " << solve_s << " s, sweep: " << sweep_s
            << " s, speedup: " << speedup << "x\n";
  (void)fresh;
  return 0;
}

int cmd_montecarlo(const std::string &scenario, double T_opt, int n, std::uint64_t seed,
                   const std::string &feas_path, std::string out_dir) {
  Scenario scn = load_scenario(scenario);
  double T = T_opt > 0 ? T_opt : scn.mission_time;
  if (out_dir.empty()) out_dir = "out/montecarlo-" + scn.name;
  fs::create_directories(out_dir);

  FeasibilitySet fset;
  if (!feas_path.empty()) {
    fset.value = std::make_shared<LevelSetGrid>(load_level_set(feas_path));
    fset.formula = scn.formula(T);
  } else {
    ReachOptions opt;
    opt.out_dt = scn.planner.dt;
    fset = verify_formula(scn.system, scn.formula(T), T, scn.grid, opt);
  }

  MonteCarloReport rep = monte_carlo_feasibility(scn, fset, T, n, seed);
  json j;
  j["n"] = rep.n;
  j["band"] = rep.band;
  j["both_feasible"] = rep.both_feasible;
  j["both_infeasible"] = rep.both_infeasible;
  j["band_excluded"] = rep.band_excluded;
  j["off_band_disagreements"] = rep.off_band_disagreements;
  j["samples"] = json::array();
  for (const auto &s : rep.samples)
    j["samples"].push_back({{"x", s.x0[0]},
                            {"y", s.x0[1]},
                            {"h", s.h},
                            {"brt", s.brt_feasible},
                            {"milp", s.milp_feasible},
                            {"in_band", s.in_band}});
  std::string report_path = out_dir + "/montecarlo.json";
  {
    std::ofstream os(report_path);
    os << j.dump(2) << "\n";
  }
  RunManifest man;
  man.command = "montecarlo";
  man.scenario = scn.name;
  man.seed = seed;
  man.config = {{"T", T}, {"n", n}};
  man.add_output(report_path);
  man.write(out_dir + "/manifest.json");

  std::cout << "agree feasible: " << rep.both_feasible
            << ", agree infeasible: " << rep.both_infeasible
            << ", band excluded: " << rep.band_excluded
            << ", off-band disagreements: " << rep.off_band_disagreements << "\n";
  return 0;
}

int cmd_plot(const std::string &scenario, const std::string &feas_path,
             const std::string &trace_path, double t_slice, std::string out_dir) {
  Scenario scn = load_scenario(scenario);
  if (out_dir.empty()) out_dir = "out/plot-" + scn.name;
  fs::create_directories(out_dir);

  std::vector<std::array<Eigen::Vector2d, 2>> contour;
  if (!feas_path.empty()) {
    LevelSetGrid lsg = load_level_set(feas_path);
    const Grid &g = lsg.grid;
    const int nx = g.counts[0], ny = g.counts[1];
    std::vector<double> field(static_cast<std::size_t>(nx) * ny);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(g.dim());
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        x[0] = g.coord(0, i);
        x[1] = g.coord(1, j);
        field[static_cast<std::size_t>(i) * ny + j] = lsg.value_at(t_slice, x);
      }
    contour = zero_contour(field, nx, ny, g.lo[0], g.lo[1], g.spacing(0), g.spacing(1));
    write_contour_csv(out_dir + "/contour.csv", contour, "brt");
  }

  std::vector<PlotSeries> lines;
  if (!trace_path.empty()) {
    std::ifstream is(trace_path);
    if (!is) throw ConfigError("missing trace file " + trace_path);
    std::string line;
    std::getline(is, line); // header
    PlotSeries s;
    s.name = "trajectory";
    s.color = "#f4f4f4";
    while (std::getline(is, line)) {
      std::stringstream ss(line);
      std::string tok;
      std::vector<double> row;
      while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
      if (row.size() >= 3) s.points.push_back({row[1], row[2]});
    }
    s.color = "#888888";
    lines.push_back(std::move(s));
  }

  write_scene_svg(out_dir + "/scene.svg", scn.system.state_lo[0], scn.system.state_hi[0],
                  scn.system.state_lo[1], scn.system.state_hi[1], plot_regions(scn),
                  contour, lines);
  std::cout << "wrote " << out_dir << "/scene.svg\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"STL mission feasibility via reachability, with MILP planning "
               "and MPC tracking"};
  app.require_subcommand(1);

  std::string scenario, grid_spec, out_dir, x0_spec, feas_path, net_path, trace_path;
  double T = 0.0;
  std::uint64_t seed = 0;
  int n_samples = 100;
  double subsample = 1.0;
  double move_at = 0.0, extend = 1.5, t_slice = 0.0;
  std::vector<std::string> move_obstacle;
  TrainConfig tcfg;

  auto *verify = app.add_subcommand("verify", "compute the feasibility set");
  verify->add_option("--scenario", scenario)->required();
  verify->add_option("--T", T);
  verify->add_option("--grid", grid_spec, "counts, e.g. 31,31,21,21");
  verify->add_option("--out", out_dir);
  verify->add_option("--seed", seed);

  auto *train_cmd = app.add_subcommand("train", "train the value surrogate");
  train_cmd->add_option("--feasibility", feas_path)->required();
  train_cmd->add_option("--out", out_dir);
  train_cmd->add_option("--seed", tcfg.seed);
  train_cmd->add_option("--epochs", tcfg.epochs);
  train_cmd->add_option("--batch", tcfg.batch_size);
  train_cmd->add_option("--lr", tcfg.learning_rate);
  train_cmd->add_option("--lambda", tcfg.lambda);
  train_cmd->add_option("--epsilon", tcfg.epsilon);
  train_cmd->add_option("--patience", tcfg.patience);
  train_cmd->add_option("--subsample", subsample);

  auto *plan_cmd = app.add_subcommand("plan", "STL-constrained global plan");
  plan_cmd->add_option("--scenario", scenario)->required();
  plan_cmd->add_option("--T", T);
  plan_cmd->add_option("--x0", x0_spec)->required();
  plan_cmd->add_option("--out", out_dir);
  plan_cmd->add_option("--feasibility", feas_path);
  plan_cmd->add_option("--seed", seed);

  auto *sim = app.add_subcommand("simulate", "plan then track with the MPC");
  sim->add_option("--scenario", scenario)->required();
  sim->add_option("--T", T);
  sim->add_option("--x0", x0_spec)->required();
  sim->add_option("--out", out_dir);
  sim->add_option("--feasibility", feas_path);
  sim->add_option("--move-obstacle", move_obstacle, "NAME DX DY")->expected(3);
  sim->add_option("--at", move_at, "teleport time for --move-obstacle");
  sim->add_option("--extend", extend, "simulate to extend*T");
  sim->add_option("--seed", seed);

  auto *cmp = app.add_subcommand("compare", "fresh solve vs surrogate sweep timing");
  cmp->add_option("--feasibility", feas_path)->required();
  cmp->add_option("--network", net_path)->required();
  cmp->add_option("--out", out_dir);

  auto *mc = app.add_subcommand("montecarlo", "BRT sign vs planner feasibility");
  mc->add_option("--scenario", scenario)->required();
  mc->add_option("--T", T);
  mc->add_option("--n", n_samples);
  mc->add_option("--seed", seed);
  mc->add_option("--feasibility", feas_path);
  mc->add_option("--out", out_dir);

  auto *plot = app.add_subcommand("plot", "emit SVG / CSV plot data");
  plot->add_option("--scenario", scenario)->required();
  plot->add_option("--feasibility", feas_path);
  plot->add_option("--trace", trace_path);
  plot->add_option("--t-slice", t_slice);
  plot->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
    if (verify->parsed()) return cmd_verify(scenario, T, grid_spec, out_dir, seed);
    if (train_cmd->parsed()) return cmd_train(feas_path, out_dir, tcfg, subsample);
    if (plan_cmd->parsed()) return cmd_plan(scenario, T, x0_spec, out_dir, feas_path, seed);
    if (sim->parsed())
      return cmd_simulate(scenario, T, x0_spec, out_dir, feas_path, move_obstacle,
                          move_at, extend, seed);
    if (cmp->parsed()) return cmd_compare(feas_path, net_path, out_dir);
    if (mc->parsed())
      return cmd_montecarlo(scenario, T, n_samples, seed, feas_path, out_dir);
    if (plot->parsed()) return cmd_plot(scenario, feas_path, trace_path, t_slice, out_dir);
    return 2;
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError &e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError &e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
