#pragma once

#include "tnav/gpr.hpp"
#include "tnav/world.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tnav {

struct ControlInput {
  double v = 0.0;
  double omega = 0.0;
};

double wrap_angle(double a);

/// Plane-scaled differential drive: translational advance along world X and
/// Y is scaled by |n x e_x| and |n x e_y|.
RobotState dynamics_step(const RobotState& s, const ControlInput& u, const Vec3& normal, double dt);

/// ((1 - t)(1 - sigma))^-2 with both means clamped to [0, 0.99].
double control_weight(double t_mean, double sigma_mean);

struct NmpcConfig {
  int horizon = 20;
  double dt = 0.05;
  Eigen::Vector3d q_diag{1.0, 1.0, 0.1};
  Eigen::Vector2d r_diag{0.1, 0.05};
  double v_max = 1.5;
  double omega_max = 1.5;
  double d_safe = 0.5;
  double v_ref = 2.0;  // above v_max so the speed bound binds on easy ground
  bool traversability_weight = true;  // false forces lambda = 1

  int inner_iterations = 60;
  std::vector<double> penalty_schedule{1e1, 1e2, 1e3, 1e4, 1e5};
  double clearance_margin = 2e-3;  // penalty radius is d_safe + margin
  double time_budget = 0.0;        // seconds per solve; 0 = iteration budget only

  double goal_tolerance = 0.3;
  int max_infeasible = 20;  // consecutive infeasible solves before abort

  void validate() const;
};

struct NmpcProblem {
  RobotState start;
  std::vector<RobotState> reference;  // x_k^d for k = 0..N-1
  Vec3 normal = Vec3::UnitZ();
  std::vector<Vec2> obstacles;
  Eigen::Matrix3d q = Eigen::Matrix3d::Identity();
  Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  double lambda = 1.0;
  double d_safe = 0.5;
  double dt = 0.05;
  double v_max = 1.5;
  double omega_max = 1.5;
  std::optional<Vec2> bounds_min;  // admissible state set: map XY box
  std::optional<Vec2> bounds_max;

  int horizon() const { return static_cast<int>(reference.size()); }
};

struct NmpcSolution {
  std::vector<RobotState> states;  // N + 1
  std::vector<ControlInput> controls;  // N
  double objective = 0.0;
  bool feasible = false;
  int iterations = 0;
};

/// States from rolling out `controls` from `start`.
std::vector<RobotState> rollout(const NmpcProblem& problem, const std::vector<ControlInput>& controls);

/// Tracking plus lambda-weighted control cost; ||x||_A^2 = x^T A x / 4.
double tracking_objective(const NmpcProblem& problem, const std::vector<ControlInput>& controls);

/// Penalized objective with obstacle clearance radius `radius` and weight
/// `mu`. Fills `grad` (size 2N, [v_0, w_0, v_1, ...]) by reverse sweep
/// through the rollout when non-null.
double penalized_objective(const NmpcProblem& problem, const std::vector<ControlInput>& controls,
                           double mu, double radius, Eigen::VectorXd* grad);

/// Hard check of bounds, state set and clearance on the rolled-out states.
bool verify_feasible(const NmpcProblem& problem, const NmpcSolution& sol);

NmpcSolution solve(const NmpcProblem& problem, const std::optional<NmpcSolution>& warm_start,
                   const NmpcConfig& cfg);

struct ReferenceWindow {
  std::vector<RobotState> states;
  double t_mean = 0.0;
  double sigma_mean = 0.0;
  Vec3 normal = Vec3::UnitZ();
  std::size_t closest = 0;
  bool past_end = false;
};

/// N references spaced v_ref * dt along the dense path, starting at the
/// waypoint closest to the robot at or after `search_from`.
ReferenceWindow select_reference(const DensePath& dense, const RobotState& state, int horizon,
                                 double dt, double v_ref, std::size_t search_from = 0);

/// Receding-horizon tracker keeping its warm start between calls.
class NmpcController {
 public:
  explicit NmpcController(const NmpcConfig& cfg) : cfg_(cfg) {}

  struct Step {
    ControlInput applied;
    ReferenceWindow window;
    double lambda = 1.0;
    NmpcSolution solution;
  };

  Step step(const DensePath& dense, const RobotState& state, std::vector<Vec2> obstacles,
            const std::optional<std::pair<Vec2, Vec2>>& bounds);

  /// Forgets the warm start and path progress (new path).
  void reset();

  const NmpcConfig& config() const { return cfg_; }

 private:
  NmpcConfig cfg_;
  std::optional<NmpcSolution> warm_;
  std::size_t progress_ = 0;
};

struct LogRow {
  double t, x, y, theta, v, omega, t_mean, sigma_mean, lambda;
};

struct TrajectoryLog {
  std::vector<LogRow> rows;
};

enum class LoopStatus { GoalReached, StepLimit, Infeasible };

std::string to_string(LoopStatus s);

struct LoopResult {
  LoopStatus status = LoopStatus::StepLimit;
  int steps = 0;
  double min_clearance = std::numeric_limits<double>::infinity();
};

/// Runs select -> solve -> apply on `world` for at most `max_steps` control
/// periods, appending to `log`. Obstacles are sensed from the world's ground
/// truth each period.
LoopResult control_loop(const DensePath& dense, SimWorld& world, NmpcController& controller,
                        int max_steps, TrajectoryLog& log);

}  // namespace tnav
