#include "tnav/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace tnav {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

namespace {

struct Scales {
  double ax;
  double ay;
};

// |n x e_x| = sqrt(n_y^2 + n_z^2), |n x e_y| = sqrt(n_x^2 + n_z^2).
Scales plane_scales(const Vec3& n) {
  return {n.cross(Vec3::UnitX()).norm(), n.cross(Vec3::UnitY()).norm()};
}

}  // namespace

RobotState dynamics_step(const RobotState& s, const ControlInput& u, const Vec3& normal,
                         double dt) {
  const Scales sc = plane_scales(normal);
  RobotState out;
  out.x = s.x + sc.ax * std::cos(s.theta) * u.v * dt;
  out.y = s.y + sc.ay * std::sin(s.theta) * u.v * dt;
  out.theta = wrap_angle(s.theta + u.omega * dt);
  return out;
}

double control_weight(double t_mean, double sigma_mean) {
  const double t = std::clamp(t_mean, 0.0, 0.99);
  const double s = std::clamp(sigma_mean, 0.0, 0.99);
  const double base = (1.0 - t) * (1.0 - s);
  return 1.0 / (base * base);
}

void NmpcConfig::validate() const {
  const std::string p = "nmpc.";
  if (horizon < 1) throw ConfigError(p + "horizon", "must be >= 1");
  if (!(dt > 0)) throw ConfigError(p + "dt", "must be > 0");
  if ((q_diag.array() <= 0).any()) throw ConfigError(p + "q_diag", "must be positive (Q positive definite)");
  if ((r_diag.array() <= 0).any()) throw ConfigError(p + "r_diag", "must be positive (R positive definite)");
  if (!(v_max > 0)) throw ConfigError(p + "v_max", "must be > 0");
  if (!(omega_max > 0)) throw ConfigError(p + "omega_max", "must be > 0");
  if (!(d_safe >= 0)) throw ConfigError(p + "d_safe", "must be >= 0");
  if (!(v_ref > 0)) throw ConfigError(p + "v_ref", "must be > 0");
  if (inner_iterations < 1) throw ConfigError(p + "inner_iterations", "must be >= 1");
  if (penalty_schedule.empty()) throw ConfigError(p + "penalty_schedule", "must not be empty");
  for (std::size_t i = 0; i < penalty_schedule.size(); ++i) {
    if (!(penalty_schedule[i] > 0) || (i > 0 && penalty_schedule[i] < penalty_schedule[i - 1])) {
      throw ConfigError(p + "penalty_schedule", "must be positive and non-decreasing");
    }
  }
  if (!(clearance_margin >= 0)) throw ConfigError(p + "clearance_margin", "must be >= 0");
  if (!(time_budget >= 0)) throw ConfigError(p + "time_budget", "must be >= 0");
  if (!(goal_tolerance > 0)) throw ConfigError(p + "goal_tolerance", "must be > 0");
  if (max_infeasible < 1) throw ConfigError(p + "max_infeasible", "must be >= 1");
}

// ---------------------------------------------------------------------------

std::vector<RobotState> rollout(const NmpcProblem& problem,
                                const std::vector<ControlInput>& controls) {
  std::vector<RobotState> states;
  states.reserve(controls.size() + 1);
  states.push_back(problem.start);
  for (const auto& u : controls) {
    states.push_back(dynamics_step(states.back(), u, problem.normal, problem.dt));
  }
  return states;
}

namespace {

Eigen::Vector3d tracking_error(const RobotState& s, const RobotState& ref) {
  return {s.x - ref.x, s.y - ref.y, wrap_angle(s.theta - ref.theta)};
}

// Value and position gradient of the per-state constraint penalties.
double state_penalty(const NmpcProblem& p, const RobotState& s, double mu, double radius,
                     Eigen::Vector2d* grad) {
  double pen = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  const Vec2 pos = s.position();
  for (const auto& o : p.obstacles) {
    const Vec2 d = pos - o;
    const double dist = d.norm();
    if (dist >= radius) continue;
    const double viol = radius - dist;
    pen += mu * viol * viol;
    if (dist > 1e-12) g += -2.0 * mu * viol * d / dist;
  }
  if (p.bounds_min && p.bounds_max) {
    for (int a = 0; a < 2; ++a) {
      const double lo = (*p.bounds_min)[a] - pos[a];
      const double hi = pos[a] - (*p.bounds_max)[a];
      if (lo > 0) {
        pen += mu * lo * lo;
        g[a] += -2.0 * mu * lo;
      }
      if (hi > 0) {
        pen += mu * hi * hi;
        g[a] += 2.0 * mu * hi;
      }
    }
  }
  if (grad) *grad = g;
  return pen;
}

}  // namespace

double tracking_objective(const NmpcProblem& problem, const std::vector<ControlInput>& controls) {
  const auto states = rollout(problem, controls);
  double j = 0.0;
  for (int k = 0; k < problem.horizon(); ++k) {
    const Eigen::Vector3d e = tracking_error(states[k], problem.reference[k]);
    const Eigen::Vector2d u(controls[k].v, controls[k].omega);
    j += 0.25 * e.dot(problem.q * e) + problem.lambda * 0.25 * u.dot(problem.r * u);
  }
  return j;
}

double penalized_objective(const NmpcProblem& problem, const std::vector<ControlInput>& controls,
                           double mu, double radius, Eigen::VectorXd* grad) {
  const int n = problem.horizon();
  const auto states = rollout(problem, controls);
  const Scales sc = plane_scales(problem.normal);
  const double dt = problem.dt;

  double j = 0.0;
  std::vector<Eigen::Vector3d> errors(n);
  std::vector<Eigen::Vector2d> pen_grad(n + 1, Eigen::Vector2d::Zero());
  for (int k = 0; k < n; ++k) {
    errors[k] = tracking_error(states[k], problem.reference[k]);
    const Eigen::Vector2d u(controls[k].v, controls[k].omega);
    j += 0.25 * errors[k].dot(problem.q * errors[k]) + problem.lambda * 0.25 * u.dot(problem.r * u);
  }
  for (int k = 1; k <= n; ++k) {
    j += state_penalty(problem, states[k], mu, radius, grad ? &pen_grad[k] : nullptr);
  }
  if (!grad) return j;

  grad->resize(2 * n);
  // Adjoint of x_N carries only the penalty term.
  Eigen::Vector3d adj(pen_grad[n].x(), pen_grad[n].y(), 0.0);
  for (int k = n - 1; k >= 0; --k) {
    const RobotState& s = states[k];
    const ControlInput& u = controls[k];
    const double c = std::cos(s.theta);
    const double si = std::sin(s.theta);
    const Eigen::Vector2d uv(u.v, u.omega);
    const Eigen::Vector2d gu =
        Eigen::Vector2d(adj.x() * sc.ax * c * dt + adj.y() * sc.ay * si * dt, adj.z() * dt) +
        problem.lambda * 0.5 * (problem.r * uv);
    (*grad)(2 * k) = gu.x();
    (*grad)(2 * k + 1) = gu.y();

    Eigen::Vector3d next = adj;
    next.z() += adj.x() * (-sc.ax * si * u.v * dt) + adj.y() * (sc.ay * c * u.v * dt);
    next += 0.5 * (problem.q * errors[k]);
    next.x() += pen_grad[k].x();
    next.y() += pen_grad[k].y();
    adj = next;
  }
  return j;
}

bool verify_feasible(const NmpcProblem& problem, const NmpcSolution& sol) {
  for (const auto& u : sol.controls) {
    if (std::abs(u.v) > problem.v_max || std::abs(u.omega) > problem.omega_max) return false;
  }
  for (std::size_t k = 1; k < sol.states.size(); ++k) {
    const Vec2 p = sol.states[k].position();
    for (const auto& o : problem.obstacles) {
      if ((p - o).norm() < problem.d_safe) return false;
    }
    if (problem.bounds_min && problem.bounds_max) {
      if ((p.array() < problem.bounds_min->array()).any() ||
          (p.array() > problem.bounds_max->array()).any()) {
        return false;
      }
    }
  }
  return true;
}

namespace {

using Controls = std::vector<ControlInput>;

Controls from_vector(const Eigen::VectorXd& z) {
  Controls u(static_cast<std::size_t>(z.size() / 2));
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = {z(2 * k), z(2 * k + 1)};
  return u;
}

Eigen::VectorXd to_vector(const Controls& u) {
  Eigen::VectorXd z(2 * u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    z(2 * k) = u[k].v;
    z(2 * k + 1) = u[k].omega;
  }
  return z;
}

void project_box(Eigen::VectorXd& z, double v_max, double w_max) {
  for (Eigen::Index i = 0; i < z.size(); i += 2) {
    z(i) = std::clamp(z(i), -v_max, v_max);
    z(i + 1) = std::clamp(z(i + 1), -w_max, w_max);
  }
}

}  // namespace

namespace {

// Penalty-escalated projected gradient descent from one initial guess.
NmpcSolution descend(const NmpcProblem& problem, Eigen::VectorXd z, const NmpcConfig& cfg,
                     const std::chrono::steady_clock::time_point& t0) {
  project_box(z, problem.v_max, problem.omega_max);
  const double radius = problem.d_safe + cfg.clearance_margin;
  NmpcSolution sol;
  auto out_of_time = [&] {
    return cfg.time_budget > 0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
               cfg.time_budget;
  };

  Eigen::VectorXd g;
  Eigen::VectorXd g_new;
  for (double mu : cfg.penalty_schedule) {
    double f = penalized_objective(problem, from_vector(z), mu, radius, &g);
    double alpha = 1e-2;
    for (int it = 0; it < cfg.inner_iterations; ++it) {
      ++sol.iterations;
      Eigen::VectorXd z_new;
      double f_new = 0.0;
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        z_new = z - alpha * g;
        project_box(z_new, problem.v_max, problem.omega_max);
        f_new = penalized_objective(problem, from_vector(z_new), mu, radius, nullptr);
        if (f_new <= f - 1e-4 * g.dot(z - z_new)) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      const Eigen::VectorXd s = z_new - z;
      penalized_objective(problem, from_vector(z_new), mu, radius, &g_new);
      const Eigen::VectorXd y = g_new - g;
      z = z_new;
      g = g_new;
      const double improvement = f - f_new;
      f = f_new;
      if (s.norm() < 1e-10 || improvement < 1e-14 * std::max(1.0, std::abs(f))) break;
      const double sy = s.dot(y);
      alpha = sy > 1e-16 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e3) : alpha * 2.0;
      if (out_of_time()) break;
    }
    sol.controls = from_vector(z);
    sol.states = rollout(problem, sol.controls);
    sol.feasible = verify_feasible(problem, sol);
    if (sol.feasible || out_of_time()) break;
  }
  sol.objective = tracking_objective(problem, sol.controls);
  return sol;
}

bool better(const NmpcSolution& a, const NmpcSolution& b) {
  if (a.feasible != b.feasible) return a.feasible;
  return a.objective < b.objective;
}

}  // namespace

NmpcSolution solve(const NmpcProblem& problem, const std::optional<NmpcSolution>& warm_start,
                   const NmpcConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = problem.horizon();
  Controls init(static_cast<std::size_t>(n), ControlInput{0.0, 1e-3});
  if (warm_start && static_cast<int>(warm_start->controls.size()) == n && n > 0) {
    for (int k = 0; k + 1 < n; ++k) init[k] = warm_start->controls[k + 1];
    init[n - 1] = warm_start->controls[n - 1];
  }
  NmpcSolution best = descend(problem, to_vector(init), cfg, t0);
  if (problem.obstacles.empty()) return best;

  // Near obstacles the descent can stall against the clearance penalty, so
  // also try arcs that swing to either side.
  int iterations = best.iterations;
  for (double side : {1.0, -1.0}) {
    Controls arc(static_cast<std::size_t>(n),
                 ControlInput{0.5 * problem.v_max, side * 0.5 * problem.omega_max});
    NmpcSolution cand = descend(problem, to_vector(arc), cfg, t0);
    iterations += cand.iterations;
    if (better(cand, best)) best = std::move(cand);
  }
  best.iterations = iterations;
  return best;
}

// ---------------------------------------------------------------------------

ReferenceWindow select_reference(const DensePath& dense, const RobotState& state, int horizon,
                                 double dt, double v_ref, std::size_t search_from) {
  if (dense.empty()) throw std::invalid_argument("select_reference: empty dense path");
  const auto& w = dense.waypoints;
  const std::size_t m = w.size();
  std::vector<double> arc(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) {
    arc[i] = arc[i - 1] + (xy(w[i].position) - xy(w[i - 1].position)).norm();
  }
  const double total = arc.back();
  const Vec2 p = state.position();

  search_from = std::min(search_from, m - 1);
  constexpr double kLookahead = 5.0;
  std::size_t closest = search_from;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = search_from; i < m && arc[i] <= arc[search_from] + kLookahead; ++i) {
    const double d = (xy(w[i].position) - p).squaredNorm();
    if (d < best) {
      best = d;
      closest = i;
    }
  }

  // Lost track of the window (e.g. a robot far past the end): search everything.
  if (best > kLookahead * kLookahead) {
    for (std::size_t i = 0; i < m; ++i) {
      const double d = (xy(w[i].position) - p).squaredNorm();
      if (d < best) {
        best = d;
        closest = i;
      }
    }
  }

  // Refine to the foot point on the adjacent segments.
  double s0 = arc[closest];
  best = std::numeric_limits<double>::infinity();
  for (std::size_t i = closest > 0 ? closest - 1 : 0; i <= closest && i + 1 < m; ++i) {
    const Vec2 a = xy(w[i].position);
    const Vec2 b = xy(w[i + 1].position);
    const double len2 = (b - a).squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(b - a) / len2, 0.0, 1.0) : 0.0;
    const double d = (a + t * (b - a) - p).squaredNorm();
    if (d < best) {
      best = d;
      s0 = arc[i] + t * (arc[i + 1] - arc[i]);
    }
  }

  auto heading_at = [&](std::size_t seg) {
    std::size_t i = std::min(seg, m >= 2 ? m - 2 : 0);
    if (m < 2) return state.theta;
    const Vec2 d = xy(w[i + 1].position) - xy(w[i].position);
    return std::atan2(d.y(), d.x());
  };

  ReferenceWindow out;
  out.closest = closest;
  out.normal = w[closest].normal;
  out.past_end = s0 + (horizon - 1) * v_ref * dt > total;
  std::size_t seg = 0;
  for (int k = 0; k < horizon; ++k) {
    const double s = std::min(s0 + k * v_ref * dt, total);
    while (seg + 2 < m && arc[seg + 1] < s) ++seg;
    RobotState ref;
    double tau = w.back().tau;
    double sigma = w.back().sigma;
    if (m >= 2) {
      const double span = arc[seg + 1] - arc[seg];
      const double t = span > 0 ? std::clamp((s - arc[seg]) / span, 0.0, 1.0) : 0.0;
      const Vec2 pos = (1 - t) * xy(w[seg].position) + t * xy(w[seg + 1].position);
      ref.x = pos.x();
      ref.y = pos.y();
      tau = (1 - t) * w[seg].tau + t * w[seg + 1].tau;
      sigma = (1 - t) * w[seg].sigma + t * w[seg + 1].sigma;
    } else {
      ref.x = w[0].position.x();
      ref.y = w[0].position.y();
    }
    ref.theta = heading_at(seg);
    out.states.push_back(ref);
    out.t_mean += tau;
    out.sigma_mean += sigma;
  }
  out.t_mean /= horizon;
  out.sigma_mean /= horizon;
  return out;
}

NmpcController::Step NmpcController::step(const DensePath& dense, const RobotState& state,
                                          std::vector<Vec2> obstacles,
                                          const std::optional<std::pair<Vec2, Vec2>>& bounds) {
  Step out;
  out.window = select_reference(dense, state, cfg_.horizon, cfg_.dt, cfg_.v_ref, progress_);
  progress_ = out.window.closest;
  out.lambda = cfg_.traversability_weight
                   ? control_weight(out.window.t_mean, out.window.sigma_mean)
                   : 1.0;

  NmpcProblem problem;
  problem.start = state;
  problem.reference = out.window.states;
  problem.normal = out.window.normal;
  problem.obstacles = std::move(obstacles);
  problem.q = cfg_.q_diag.asDiagonal();
  problem.r = cfg_.r_diag.asDiagonal();
  problem.lambda = out.lambda;
  problem.d_safe = cfg_.d_safe;
  problem.dt = cfg_.dt;
  problem.v_max = cfg_.v_max;
  problem.omega_max = cfg_.omega_max;
  if (bounds) {
    problem.bounds_min = bounds->first;
    problem.bounds_max = bounds->second;
  }
  out.solution = solve(problem, warm_, cfg_);
  warm_ = out.solution;
  out.applied = out.solution.feasible ? out.solution.controls.front() : ControlInput{0.0, 0.0};
  return out;
}

void NmpcController::reset() {
  warm_.reset();
  progress_ = 0;
}

std::string to_string(LoopStatus s) {
  switch (s) {
    case LoopStatus::GoalReached: return "goal_reached";
    case LoopStatus::StepLimit: return "step_limit";
    case LoopStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

LoopResult control_loop(const DensePath& dense, SimWorld& world, NmpcController& controller,
                        int max_steps, TrajectoryLog& log) {
  LoopResult res;
  if (dense.empty()) throw std::invalid_argument("control_loop: empty dense path");
  const auto& cfg = controller.config();
  const Vec2 goal = xy(dense.waypoints.back().position);
  const double reach = cfg.v_max * cfg.horizon * cfg.dt + cfg.d_safe + cfg.clearance_margin;
  const std::pair<Vec2, Vec2> bounds{world.map().xy_min(), world.map().xy_max()};
  int infeasible = 0;
  for (int k = 0; k < max_steps; ++k) {
    if ((world.robot.position() - goal).norm() <= cfg.goal_tolerance) {
      res.status = LoopStatus::GoalReached;
      return res;
    }
    auto obstacles = world.sense_obstacles(world.robot.position(), reach);
    for (const auto& o : obstacles) {
      res.min_clearance = std::min(res.min_clearance, (o - world.robot.position()).norm());
    }
    const auto st = controller.step(dense, world.robot, std::move(obstacles), bounds);
    log.rows.push_back({world.clock, world.robot.x, world.robot.y, world.robot.theta,
                        st.applied.v, st.applied.omega, st.window.t_mean, st.window.sigma_mean,
                        st.lambda});
    world.robot = dynamics_step(world.robot, st.applied, st.window.normal, cfg.dt);
    world.clock += cfg.dt;
    ++res.steps;
    if (!st.solution.feasible) {
      if (++infeasible >= cfg.max_infeasible) {
        res.status = LoopStatus::Infeasible;
        return res;
      }
    } else {
      infeasible = 0;
    }
  }
  res.status = (world.robot.position() - goal).norm() <= cfg.goal_tolerance
                   ? LoopStatus::GoalReached
                   : LoopStatus::StepLimit;
  return res;
}

}  // namespace tnav
