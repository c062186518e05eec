#pragma once

// Rigorous enclosures of short flow segments: a first-order Taylor step
// whose remainder is bounded over an a-priori (Picard) box, with QR-based
// wrapping control of the propagated error set.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorenz/dynamics.hpp"
#include "lorenz/interval.hpp"

namespace lorenz {

/// Natural interval extension of the vector field.
Box interval_rhs(const Box& box, const Params& params);

enum class EnclosureMode {
  /// Error set carried as x_hat + C r0 + B r with B re-orthogonalized by QR.
  Lohner,
  /// Plain box propagation; shows the wrapping effect.
  Naive,
};

std::string_view to_string(EnclosureMode mode);

struct EnclosureOptions {
  EnclosureMode mode = EnclosureMode::Lohner;
  /// Halvings of the step allowed when the a-priori box cannot be validated.
  int max_halvings = 20;
  int picard_iterations = 12;
  double inflation = 0.1;
};

struct EnclosureStep {
  double t = 0.0;
  double h = 0.0;
  /// Enclosure of the solution set at time t.
  Box box;
  /// Enclosure of all solutions over the step ending at t.
  Box apriori;
};

struct EnclosureRun {
  Params params;
  EnclosureMode mode = EnclosureMode::Lohner;
  /// steps.front() is the initial set at t = 0.
  std::vector<EnclosureStep> steps;
  double initial_width = 0.0;
  double final_width = 0.0;
  double elapsed = 0.0;
  double digits_lost_per_unit = 0.0;
  int halvings = 0;
  bool stopped_early = false;

  const Box& final_box() const { return steps.back().box; }
};

/// Called after every accepted step; returning false stops the run.
using EnclosureObserver = std::function<bool(const EnclosureStep&)>;

/// Encloses the flow of every point of start over t_span (negative for
/// backward time) with nominal step size step > 0. Throws ValidationFailed
/// when the a-priori box cannot be certified after max_halvings.
EnclosureRun enclose_flow(const Box& start, const Params& params, double t_span, double step,
                          const EnclosureOptions& opts = {}, const EnclosureObserver& observer = {});

/// Start set given as centre + C r0 (for thin sets such as segments).
EnclosureRun enclose_flow(const Eigen::Vector3d& centre, const Eigen::Matrix3d& C,
                          const IVector3& r0, const Params& params, double t_span, double step,
                          const EnclosureOptions& opts = {}, const EnclosureObserver& observer = {});

/// Rigorous lower bound on the distance from every point of the box to the
/// segment.
double distance_lower_bound(const Box& box, const Segment& L);

/// Interval enclosure of the ellipsoid function V over the box.
Interval ellipsoid_enclosure(const Box& box, double R);

enum class SegmentVerdict { Certified2A, Inconclusive };

std::string_view to_string(SegmentVerdict v);

struct SegmentCertificate {
  SegmentVerdict verdict = SegmentVerdict::Inconclusive;
  Interval xi;
  std::optional<double> t_exit;
  /// Smallest lower bound on the distance to L over all a-priori boxes.
  double min_distance_lb = 0.0;
  double final_width = 0.0;
  std::size_t steps = 0;
  std::string reason;
};

struct SegmentCertifyOptions {
  double step = 1e-4;
  double ell_tol = 1e-6;
  EnclosureOptions enclosure;
};

/// Backward enclosure from {(xi, xi, R - 1) : xi in xi_interval}. Certified2A
/// only when a final box lies entirely outside E and every a-priori box stays
/// farther than ell_tol from L. Throws InvalidArgument when xi_interval
/// contains the x-coordinate of p0 or of its mirror image.
SegmentCertificate certify_condition_b_segment(const Interval& xi_interval, const Geometry& geometry,
                                               double back_span,
                                               const SegmentCertifyOptions& opts = {});

}  // namespace lorenz
