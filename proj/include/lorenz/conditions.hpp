#pragma once

// Checkers for the event-ordering hypothesis on the unstable branch
// (Condition A) and for the backward-time dichotomy from M inside E
// (Condition B), plus the sweep over R.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorenz/manifold.hpp"

namespace lorenz {

enum class ConditionAFailure { None, TooFewTaus, NoXZero, OrderViolation, Horizon };

std::string_view to_string(ConditionAFailure f);

struct ConditionAReport {
  Params params;
  bool holds = false;
  /// Degenerate event or integrator failure; holds is false and the verdict
  /// should not be trusted.
  bool inconclusive = false;
  bool degenerate = false;
  ConditionAFailure failure = ConditionAFailure::None;
  /// Labels tau1..tau5, t1, t2 in time order.
  std::vector<std::string> ordering;
  std::vector<double> taus;
  std::optional<double> t1;
  /// Absent means infinity (no second zero before the horizon).
  std::optional<double> t2;
  double horizon = 0.0;
};

struct ConditionAOptions {
  SeedConfig seed;
  IntegratorConfig integrator;
};

ConditionAReport check_condition_a(const Params& params, double horizon = 100.0,
                                   const ConditionAOptions& opts = {});

struct SweepResult {
  double s = 0.0;
  double q = 0.0;
  /// Sorted grid including refinement points.
  std::vector<double> grid;
  std::vector<ConditionAReport> verdicts;
  /// Longest contiguous run of holds = true (inconclusive breaks runs).
  std::optional<std::pair<double, double>> estimated_range;
  int inconclusive = 0;
};

struct SweepOptions {
  ConditionAOptions check;
  double horizon = 100.0;
  int refinement_rounds = 3;
};

SweepResult sweep_condition_a(double s, double q, const std::vector<double>& R_grid,
                              const SweepOptions& opts = {});

/// Uniform grid lo, lo + step, ..., up to hi (inclusive within step/2).
std::vector<double> uniform_grid(double lo, double hi, double step);

struct P1Result {
  State p1 = State::Zero();
  double t = 0.0;
  /// z - (R - 1).
  double margin = 0.0;
  /// |x (R - 1 - z)|, the rate of y - x at the crossing up to the sign.
  double transversality = 0.0;
};

/// First transversal crossing of x = y along the unstable branch. Throws
/// NoCrossing when the branch enters the trapping region of p0 or reaches
/// the horizon first.
P1Result find_p1(const Params& params, double horizon = 50.0, const ConditionAOptions& opts = {});

enum class BVerdict { LeavesEBeforeL, FourChangesLocal, Violation, Inconclusive };

std::string_view to_string(BVerdict v);

struct ConditionBSample {
  double xi = 0.0;
  BVerdict verdict = BVerdict::Inconclusive;
  bool satisfies_2a = false;
  bool satisfies_2b = false;
  std::optional<double> t_exit;
  std::optional<double> t_hit;
  double min_dist_to_L = 0.0;
  /// Window (a, b) around t = 0 on which x != 0, and the x' changes inside.
  double window_lo = 0.0;
  double window_hi = 0.0;
  int window_changes = 0;
};

struct ConditionBOptions {
  IntegratorConfig integrator;
  /// Exclusion radius around the equilibria on M.
  double delta = 1e-4;
  /// Tube radius around L.
  double ell_tol = 1e-6;
  double window_forward = 10.0;
  double pos_tol = 1e-8;
  bool ellipsoid_override = false;
  double p1_horizon = 50.0;
};

struct ConditionBReport {
  Params params;
  Geometry geometry;
  std::vector<ConditionBSample> samples;
  int excluded = 0;
  int count_2a = 0;
  int count_2b = 0;
  int violations = 0;
  int inconclusive = 0;
  bool holds = false;
  double back_horizon = 0.0;
  ConditionBOptions options;
  std::vector<std::string> warnings;
};

/// Backward-time dichotomy for a single point of M.
ConditionBSample condition_b_sample(double xi, const Geometry& geometry, double back_horizon,
                                    const ConditionBOptions& opts = {});

ConditionBReport check_condition_b(const Params& params, int n_samples = 4096,
                                   double back_horizon = 20.0, const ConditionBOptions& opts = {});

/// Minimum distance to the segment over the nodes and dense samples of a
/// trajectory, up to (and including) time t_stop along the direction of
/// integration.
double min_distance_to_segment(const Trajectory& traj, const Segment& L, double t_stop,
                               int samples_per_step = 8);

}  // namespace lorenz
