#pragma once

// Adaptive Dormand-Prince 5(4) stepping with continuous extension and
// root-resolved event detection.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "lorenz/dynamics.hpp"

namespace lorenz {

enum class Direction { Forward, Backward };

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  double t_max = 50.0;
  Direction direction = Direction::Forward;
  double event_tol = 1e-12;
  double tangency_tol = 1e-9;
  double blow_up = 1e8;
  double min_step = 1e-14;
  /// Accepted steps before giving up with StepLimit.
  long max_steps = 1000000;
  /// Sub-intervals per accepted step on which event functions are sampled.
  int event_samples = 8;

  void validate() const;
  /// Copy with both tolerances divided by factor.
  IntegratorConfig tightened(double factor) const;
  double sign() const { return direction == Direction::Forward ? 1.0 : -1.0; }
};

enum class EventKind {
  XZero,
  XPrimeSignChange,
  PlaneXYCross,
  PlaneYCross,
  PlaneZCross,
  EllipsoidExit,
  SegmentLHit,
};

std::string_view to_string(EventKind kind);

struct EventSpec {
  EventKind kind = EventKind::XZero;
  /// Level for PlaneYCross / PlaneZCross.
  double level = 0.0;
  /// +1 only increasing, -1 only decreasing, 0 both. Measured along the
  /// integration direction.
  int direction = 0;
  /// Stop integrating once this many (non-degenerate) records of this spec
  /// exist; 0 never stops.
  int stop_after = 0;
  /// Tube radius for SegmentLHit.
  double tube_radius = 1e-6;
  Segment segment;

  static EventSpec x_zero(int stop_after = 0);
  static EventSpec xprime_sign_change();
  static EventSpec plane_xy(int direction = 0, int stop_after = 0);
  static EventSpec plane_y(double level, int direction, int stop_after = 0);
  static EventSpec plane_z(double level, int direction, int stop_after = 0);
  static EventSpec ellipsoid_exit(bool terminal = true);
  static EventSpec segment_hit(const Segment& L, double tube_radius, bool terminal = false);
};

struct EventRecord {
  EventKind kind = EventKind::XZero;
  std::size_t spec_index = 0;
  double t = 0.0;
  State state = State::Zero();
  /// Sign of the event function change along the integration direction.
  int crossing = 0;
  /// Tangential or non-transversal root; excluded from counts.
  bool degenerate = false;
};

enum class IntegrationStatus {
  Completed,
  StoppedByEvent,
  StoppedByPredicate,
  BlowUp,
  StepUnderflow,
  StepLimit,
};

std::string_view to_string(IntegrationStatus status);

/// Continuous extension of one accepted step.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State, 5> coeffs;

  State evaluate(double t) const;
};

class Trajectory {
 public:
  Params params;
  Direction direction = Direction::Forward;
  IntegrationStatus status = IntegrationStatus::Completed;
  std::vector<double> times;
  std::vector<State> states;
  /// steps[i] spans times[i] .. times[i + 1].
  std::vector<DenseStep> steps;
  std::vector<EventRecord> events;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  const State& final_state() const { return states.back(); }
  bool ok() const {
    return status == IntegrationStatus::Completed || status == IntegrationStatus::StoppedByEvent ||
           status == IntegrationStatus::StoppedByPredicate;
  }
  bool covers(double t) const;
  /// Dense-output value; node states are returned exactly. Throws OutOfSpan.
  State evaluate(double t) const;
  std::vector<EventRecord> events_of(EventKind kind, bool include_degenerate = false) const;
  bool has_degenerate() const;
};

using StopPredicate = std::function<bool(double t, const State& p)>;

Trajectory integrate(const State& start, const Params& params, const IntegratorConfig& config,
                     const std::vector<EventSpec>& events, const StopPredicate& stop = {});

State evaluate(const Trajectory& trajectory, double t);

/// Root of a scalar function bracketed by [a, b] (either order). Uses Illinois
/// steps safeguarded by bisection so the bracket at least halves every
/// iteration. Throws NoSignChange when g(a) and g(b) have the same strict sign.
double locate_event(const std::function<double(double)>& g, double a, double b, double tol,
                    std::vector<double>* widths = nullptr);

/// Event function value and its time derivative along the flow.
double event_value(const EventSpec& spec, const State& p, const Params& params);
double event_rate(const EventSpec& spec, const State& p, const Params& params);

}  // namespace lorenz
