#include "tnav/config.hpp"

#include "tnav/json_fields.hpp"

#include <fstream>

namespace tnav {

void SimConfig::validate() const {
  if (!(replan_interval > 0)) throw ConfigError("sim.replan_interval", "must be positive");
  if (max_cycles < 1) throw ConfigError("sim.max_cycles", "must be at least 1");
  if (!(sensing_radius > 0)) throw ConfigError("sim.sensing_radius", "must be positive");
  if (!(goal_tolerance > 0)) throw ConfigError("sim.goal_tolerance", "must be positive");
  if (max_plan_failures < 1) throw ConfigError("sim.max_plan_failures", "must be at least 1");
  if (replan_iterations < 0) throw ConfigError("sim.replan_iterations", "must be non-negative");
  if (!(sensing_noise >= 0)) throw ConfigError("sim.sensing_noise", "must be non-negative");
}

void BenchConfig::validate() const {
  if (trials < 1) throw ConfigError("bench.trials", "must be at least 1");
  if (workers < 1) throw ConfigError("bench.workers", "must be at least 1");
  if (!(matched_cost_factor >= 1.0)) throw ConfigError("bench.matched_cost_factor", "must be >= 1");
}

AppConfig AppConfig::defaults() {
  AppConfig cfg;
  cfg.gpr.hyper.length = 2.0 * cfg.planner.step;
  return cfg;
}

void AppConfig::validate() const {
  if (!(map_res > 0)) throw ConfigError("map.res", "must be positive");
  if (map_res > assessment.side / 2) throw ConfigError("map.res", "must not exceed assessment.side / 2");
  assessment.validate();
  planner.validate(assessment.side);
  gpr.validate();
  nmpc.validate();
  sim.validate();
  bench.validate();
}

namespace {

int to_int(JsonFields& f, const std::string& key, int fallback) {
  const long long v = f.integer(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(f.child(key), "out of range");
  }
  return static_cast<int>(v);
}

void read_assessment(const nlohmann::json& j, AssessmentConfig& a) {
  JsonFields f(j, "assessment");
  if (f.has("alpha")) {
    const auto v = f.numbers("alpha", 3);
    a.alpha = {v[0], v[1], v[2]};
  }
  a.s_crit = f.number("s_crit", a.s_crit);
  a.f_crit = f.number("f_crit", a.f_crit);
  a.lambda_crit = f.number("lambda_crit", a.lambda_crit);
  a.kappa_s = f.number("kappa_s", a.kappa_s);
  a.kappa_f = f.number("kappa_f", a.kappa_f);
  a.r_min = f.number("r_min", a.r_min);
  a.r_max = f.number("r_max", a.r_max);
  a.t_trace = f.number("t_trace", a.t_trace);
  a.raster = to_int(f, "raster", a.raster);
  const long long mins = f.integer("min_support_points", static_cast<long long>(a.min_support_points));
  if (mins < 0) throw ConfigError("assessment.min_support_points", "must be non-negative");
  a.min_support_points = static_cast<std::size_t>(mins);
  a.side = f.number("side", a.side);
  f.finish();
}

void read_planner(const nlohmann::json& j, PlannerConfig& p) {
  JsonFields f(j, "planner");
  p.step = f.number("step", p.step);
  p.neighbor_radius = f.number("neighbor_radius", p.neighbor_radius);
  p.goal_region_radius = f.number("goal_region_radius", p.goal_region_radius);
  p.max_iterations = to_int(f, "max_iterations", p.max_iterations);
  p.omega = f.number("omega", p.omega);
  p.tau_max_accept = f.number("tau_max_accept", p.tau_max_accept);
  p.goal_bias_period = to_int(f, "goal_bias_period", p.goal_bias_period);
  f.finish();
}

// Returns whether the length scale was given explicitly.
bool read_gpr(const nlohmann::json& j, DensifyConfig& g) {
  JsonFields f(j, "gpr");
  g.step = f.number("step", g.step);
  g.hyper.sigma_f = f.number("sigma_f", g.hyper.sigma_f);
  const bool explicit_length = f.has("length");
  g.hyper.length = f.number("length", g.hyper.length);
  g.hyper.noise_var = f.number("noise_var", g.hyper.noise_var);
  const long long mt = f.integer("max_train", static_cast<long long>(g.max_train));
  if (mt < 1) throw ConfigError("gpr.max_train", "must be at least 1");
  g.max_train = static_cast<std::size_t>(mt);
  f.finish();
  return explicit_length;
}

void read_nmpc(const nlohmann::json& j, NmpcConfig& n) {
  JsonFields f(j, "nmpc");
  n.horizon = to_int(f, "horizon", n.horizon);
  n.dt = f.number("dt", n.dt);
  if (f.has("q_diag")) {
    const auto v = f.numbers("q_diag", 3);
    n.q_diag = {v[0], v[1], v[2]};
  }
  if (f.has("r_diag")) {
    const auto v = f.numbers("r_diag", 2);
    n.r_diag = {v[0], v[1]};
  }
  n.v_max = f.number("v_max", n.v_max);
  n.omega_max = f.number("omega_max", n.omega_max);
  n.d_safe = f.number("d_safe", n.d_safe);
  n.v_ref = f.number("v_ref", n.v_ref);
  n.traversability_weight = f.boolean("traversability_weight", n.traversability_weight);
  n.inner_iterations = to_int(f, "inner_iterations", n.inner_iterations);
  if (f.has("penalty_schedule")) {
    const auto& raw = f.raw("penalty_schedule");
    if (!raw.is_array()) throw ConfigError("nmpc.penalty_schedule", "expected an array of numbers");
    n.penalty_schedule.clear();
    for (const auto& e : raw) {
      if (!e.is_number()) throw ConfigError("nmpc.penalty_schedule", "expected numbers");
      n.penalty_schedule.push_back(e.get<double>());
    }
  }
  n.clearance_margin = f.number("clearance_margin", n.clearance_margin);
  n.time_budget = f.number("time_budget", n.time_budget);
  n.goal_tolerance = f.number("goal_tolerance", n.goal_tolerance);
  n.max_infeasible = to_int(f, "max_infeasible", n.max_infeasible);
  f.finish();
}

void read_sim(const nlohmann::json& j, SimConfig& s) {
  JsonFields f(j, "sim");
  s.replan_interval = f.number("replan_interval", s.replan_interval);
  s.max_cycles = to_int(f, "max_cycles", s.max_cycles);
  s.sensing_radius = f.number("sensing_radius", s.sensing_radius);
  s.goal_tolerance = f.number("goal_tolerance", s.goal_tolerance);
  s.max_plan_failures = to_int(f, "max_plan_failures", s.max_plan_failures);
  s.replan_iterations = to_int(f, "replan_iterations", s.replan_iterations);
  s.sensing_noise = f.number("sensing_noise", s.sensing_noise);
  f.finish();
}

void read_bench(const nlohmann::json& j, BenchConfig& b) {
  JsonFields f(j, "bench");
  b.trials = to_int(f, "trials", b.trials);
  b.workers = to_int(f, "workers", b.workers);
  b.matched_cost_factor = f.number("matched_cost_factor", b.matched_cost_factor);
  f.finish();
}

}  // namespace

AppConfig parse_config(const nlohmann::json& doc) {
  AppConfig cfg = AppConfig::defaults();
  JsonFields root(doc, "");
  if (root.has("map")) {
    JsonFields m(root.raw("map"), "map");
    cfg.map_res = m.number("res", cfg.map_res);
    m.finish();
  }
  if (root.has("assessment")) read_assessment(root.raw("assessment"), cfg.assessment);
  if (root.has("planner")) read_planner(root.raw("planner"), cfg.planner);
  bool explicit_length = false;
  if (root.has("gpr")) explicit_length = read_gpr(root.raw("gpr"), cfg.gpr);
  if (!explicit_length) cfg.gpr.hyper.length = 2.0 * cfg.planner.step;
  if (root.has("nmpc")) read_nmpc(root.raw("nmpc"), cfg.nmpc);
  if (root.has("sim")) read_sim(root.raw("sim"), cfg.sim);
  if (root.has("bench")) read_bench(root.raw("bench"), cfg.bench);
  if (root.has("seed")) {
    const auto& s = root.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "config not found");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const AppConfig& c) {
  using nlohmann::json;
  const auto& a = c.assessment;
  const auto& p = c.planner;
  const auto& g = c.gpr;
  const auto& n = c.nmpc;
  return json{
      {"map", {{"res", c.map_res}}},
      {"assessment",
       {{"alpha", {a.alpha[0], a.alpha[1], a.alpha[2]}},
        {"s_crit", a.s_crit},
        {"f_crit", a.f_crit},
        {"lambda_crit", a.lambda_crit},
        {"kappa_s", a.kappa_s},
        {"kappa_f", a.kappa_f},
        {"r_min", a.r_min},
        {"r_max", a.r_max},
        {"t_trace", a.t_trace},
        {"raster", a.raster},
        {"min_support_points", a.min_support_points},
        {"side", a.side}}},
      {"planner",
       {{"step", p.step},
        {"neighbor_radius", p.neighbor_radius},
        {"goal_region_radius", p.goal_region_radius},
        {"max_iterations", p.max_iterations},
        {"omega", p.omega},
        {"tau_max_accept", p.tau_max_accept},
        {"goal_bias_period", p.goal_bias_period}}},
      {"gpr",
       {{"step", g.step},
        {"sigma_f", g.hyper.sigma_f},
        {"length", g.hyper.length},
        {"noise_var", g.hyper.noise_var},
        {"max_train", g.max_train}}},
      {"nmpc",
       {{"horizon", n.horizon},
        {"dt", n.dt},
        {"q_diag", {n.q_diag[0], n.q_diag[1], n.q_diag[2]}},
        {"r_diag", {n.r_diag[0], n.r_diag[1]}},
        {"v_max", n.v_max},
        {"omega_max", n.omega_max},
        {"d_safe", n.d_safe},
        {"v_ref", n.v_ref},
        {"traversability_weight", n.traversability_weight},
        {"inner_iterations", n.inner_iterations},
        {"penalty_schedule", n.penalty_schedule},
        {"clearance_margin", n.clearance_margin},
        {"time_budget", n.time_budget},
        {"goal_tolerance", n.goal_tolerance},
        {"max_infeasible", n.max_infeasible}}},
      {"sim",
       {{"replan_interval", c.sim.replan_interval},
        {"max_cycles", c.sim.max_cycles},
        {"sensing_radius", c.sim.sensing_radius},
        {"goal_tolerance", c.sim.goal_tolerance},
        {"max_plan_failures", c.sim.max_plan_failures},
        {"replan_iterations", c.sim.replan_iterations},
        {"sensing_noise", c.sim.sensing_noise}}},
      {"bench",
       {{"trials", c.bench.trials},
        {"workers", c.bench.workers},
        {"matched_cost_factor", c.bench.matched_cost_factor}}},
      {"seed", c.seed},
  };
}

}  // namespace tnav
