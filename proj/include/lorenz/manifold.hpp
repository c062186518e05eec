#pragma once

// The positive branch of the origin's unstable manifold: seeding, the
// quantitative checkpoints at large R, and the bisection for the homoclinic
// parameter.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorenz/integrator.hpp"
#include "lorenz/trace.hpp"

namespace lorenz {

struct SeedConfig {
  double epsilon = 1e-8;
  /// Add the quadratic manifold correction epsilon^2 w.
  bool richardson = false;

  void validate() const;
};

State seed_gamma_plus(const Params& params, const SeedConfig& cfg = {});

/// Integrator settings for following the branch from a seed: the absolute
/// tolerance is clamped to rel_tol * |seed| so the seeding phase is resolved
/// at the requested relative accuracy.
IntegratorConfig gamma_plus_config(const IntegratorConfig& base, const State& seed);

/// Angle between the backward-integrated seed and the unstable eigenvector.
double seed_backward_angle(const Params& params, const SeedConfig& cfg = {},
                           double backward_time = -1.0);

Trajectory follow_gamma_plus(const Params& params, const SeedConfig& seed,
                             const IntegratorConfig& config, const std::vector<EventSpec>& events,
                             const StopPredicate& stop = {});

struct InequalityCheck {
  std::string expression;
  double value = 0.0;
  bool pass = false;
};

struct CheckpointLevel {
  std::string level;
  bool found = false;
  double t = 0.0;
  State state = State::Zero();
  std::vector<InequalityCheck> checks;

  bool pass() const;
};

struct CheckpointReport {
  Params params;
  CheckpointLevel at_y_equals_1;
  CheckpointLevel at_z_equals_1000;
  CheckpointLevel at_y_equals_0;
  /// x, y, z strictly increasing on every node up to the y = 1 crossing.
  bool monotone_to_y1 = false;

  bool all_pass() const;
};

/// Throws MissingCheckpoint when a level is not crossed before the horizon.
CheckpointReport lemma2_checkpoints(const Params& params, const SeedConfig& seed = {},
                                    const IntegratorConfig& config = {});

struct ClassifyOptions {
  SeedConfig seed;
  IntegratorConfig integrator;
  /// Fixed horizon; when absent it is derived from the unstable rate at the
  /// origin and the slowest decay rate at p0.
  std::optional<double> horizon;
  PositivityOptions positivity;
};

double default_classification_horizon(const Params& params, const SeedConfig& seed);

BranchClass classify_gamma_plus(const Params& params, const ClassifyOptions& opts = {});

struct RStarProbe {
  double R = 0.0;
  BranchTag tag = BranchTag::Undetermined;
  bool positive_side = false;
};

struct RStarResult {
  double s = 0.0;
  double q = 0.0;
  double R_lo = 0.0;
  double R_hi = 0.0;
  BranchClass lo_class;
  BranchClass hi_class;
  int iterations = 0;
  bool resolved = false;
  bool nonmonotone = false;
  std::vector<RStarProbe> history;
  std::string note;

  double width() const { return R_hi - R_lo; }
  double midpoint() const { return 0.5 * (R_lo + R_hi); }
};

struct RStarOptions {
  ClassifyOptions classify;
  int max_iterations = 200;
  int max_consecutive_undetermined = 5;
  /// Extra probes inside the initial bracket used to detect flip-flops.
  int monotonicity_probes = 6;
};

/// Bisection between the all-positive and the crossing regime. Throws
/// SameClassAtEndpoints; an unresolved search returns resolved = false.
RStarResult find_r_star(double s, double q, std::pair<double, double> bracket0, double width_tol,
                        const RStarOptions& opts = {});

struct NearHomoclinicReport {
  double R = 0.0;
  std::optional<double> tau1;
  double closest_approach = 0.0;
  double t_closest = 0.0;
  double min_max_x_xprime = 0.0;
  bool reentered_ball = false;
  double ball_radius = 1e-2;
  double horizon = 0.0;
  double rel_tol = 0.0;
};

NearHomoclinicReport near_homoclinic_diagnostics(const Params& params,
                                                 const ClassifyOptions& opts = {},
                                                 double ball_radius = 1e-2);

}  // namespace lorenz
