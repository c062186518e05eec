#pragma once

// Combinatorial data read off a trajectory: zeros of x, sign changes of x',
// the counts between consecutive zeros, and branch classification.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorenz/integrator.hpp"

namespace lorenz {

struct TraceSummary {
  std::vector<double> x_zeros;
  std::vector<double> xprime_changes;
  /// Completed counts, followed by the open tail count when sigma_tail_open.
  std::vector<int> sigma;
  bool sigma_tail_open = false;
  /// Counts on completed intervals (t_i, t_{i+1}) only.
  std::vector<int> word;
  /// Sign changes of x' before the first zero of x (all of them if x never vanishes).
  int changes_before_first_zero = 0;
  bool degenerate = false;
  double t_end = 0.0;

  int open_tail() const { return sigma_tail_open ? sigma.back() : 0; }
};

/// Requires a trajectory integrated with XZero and XPrimeSignChange events.
TraceSummary summarize(const Trajectory& trajectory);

enum class BranchTag { AllPositive, CrossesZero, Undetermined };

std::string_view to_string(BranchTag tag);

struct BranchClass {
  BranchTag tag = BranchTag::Undetermined;
  /// First zero of x for CrossesZero.
  std::optional<double> t1;
  /// Sign changes of x' in (-inf, t1] for CrossesZero.
  int changes_before_t1 = 0;
  double horizon = 0.0;
  /// Time the trajectory entered the trapping region of p0 (AllPositive only).
  std::optional<double> certified_at;
  /// Undetermined only because y or z dipped below pos_tol while x stayed
  /// positive and the trapping region was entered.
  bool positive_side = false;
  std::string cause;
};

struct PositivityOptions {
  double pos_tol = 1e-8;
  /// Positivity of y and z is only required once |p| exceeds this radius; the
  /// linear seed has z = 0 exactly.
  double escape_radius = 1e-3;
};

/// Classify an unstable-branch trajectory: CrossesZero iff x has a certified
/// zero; AllPositive iff x, y, z stay positive and the trajectory enters the
/// Lyapunov trapping region around p0 within the horizon.
BranchClass classify_branch(const Trajectory& trajectory, double positivity_horizon,
                            const PositivityOptions& opts = {});

}  // namespace lorenz
