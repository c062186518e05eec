#include "lorenz/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lorenz {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension of order 4.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double error_norm(const State& err, const State& y0, const State& y1, const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / 3.0);
}

double initial_step(const State& y0, const State& f0, const Params& params,
                    const IntegratorConfig& cfg) {
  State sc;
  for (int i = 0; i < 3; ++i) sc(i) = cfg.abs_tol + cfg.rel_tol * std::abs(y0(i));
  const double dnf = f0.cwiseQuotient(sc).squaredNorm() / 3.0;
  const double dny = y0.cwiseQuotient(sc).squaredNorm() / 3.0;
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, cfg.max_step);
  const State y1 = y0 + cfg.sign() * h * f0;
  const State f1 = rhs(y1, params);
  const double der2 = (f1 - f0).cwiseQuotient(sc).norm() / std::sqrt(3.0) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, cfg.max_step});
}

struct Tracker {
  int last_sign = 0;
  double last_t = 0.0;
  int count = 0;
};

struct Sample {
  double t;
  double g;
};

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::XZero: return "X_ZERO";
    case EventKind::XPrimeSignChange: return "XPRIME_SIGN_CHANGE";
    case EventKind::PlaneXYCross: return "PLANE_XY_CROSS";
    case EventKind::PlaneYCross: return "PLANE_Y_CROSS";
    case EventKind::PlaneZCross: return "PLANE_Z_CROSS";
    case EventKind::EllipsoidExit: return "ELLIPSOID_EXIT";
    case EventKind::SegmentLHit: return "SEGMENT_L_HIT";
  }
  return "UNKNOWN";
}

std::string_view to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::Completed: return "COMPLETED";
    case IntegrationStatus::StoppedByEvent: return "STOPPED_BY_EVENT";
    case IntegrationStatus::StoppedByPredicate: return "STOPPED_BY_PREDICATE";
    case IntegrationStatus::BlowUp: return "BLOW_UP";
    case IntegrationStatus::StepUnderflow: return "STEP_UNDERFLOW";
    case IntegrationStatus::StepLimit: return "STEP_LIMIT";
  }
  return "UNKNOWN";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(event_tol > 0.0)) {
    throw LabError(ErrorCode::InvalidArgument, "integrator tolerances must be positive");
  }
  if (!(t_max > 0.0) || !(max_step > 0.0)) {
    throw LabError(ErrorCode::InvalidArgument, "t_max, max_step and max_steps must be positive");
  }
  if (event_samples < 1) {
    throw LabError(ErrorCode::InvalidArgument, "event_samples must be at least 1");
  }
}

IntegratorConfig IntegratorConfig::tightened(double factor) const {
  IntegratorConfig out = *this;
  out.rel_tol /= factor;
  out.abs_tol /= factor;
  return out;
}

EventSpec EventSpec::x_zero(int stop_after) {
  EventSpec e;
  e.kind = EventKind::XZero;
  e.stop_after = stop_after;
  return e;
}

EventSpec EventSpec::xprime_sign_change() {
  EventSpec e;
  e.kind = EventKind::XPrimeSignChange;
  return e;
}

EventSpec EventSpec::plane_xy(int direction, int stop_after) {
  EventSpec e;
  e.kind = EventKind::PlaneXYCross;
  e.direction = direction;
  e.stop_after = stop_after;
  return e;
}

EventSpec EventSpec::plane_y(double level, int direction, int stop_after) {
  EventSpec e;
  e.kind = EventKind::PlaneYCross;
  e.level = level;
  e.direction = direction;
  e.stop_after = stop_after;
  return e;
}

EventSpec EventSpec::plane_z(double level, int direction, int stop_after) {
  EventSpec e;
  e.kind = EventKind::PlaneZCross;
  e.level = level;
  e.direction = direction;
  e.stop_after = stop_after;
  return e;
}

EventSpec EventSpec::ellipsoid_exit(bool terminal) {
  EventSpec e;
  e.kind = EventKind::EllipsoidExit;
  e.direction = +1;
  e.stop_after = terminal ? 1 : 0;
  return e;
}

EventSpec EventSpec::segment_hit(const Segment& L, double tube_radius, bool terminal) {
  EventSpec e;
  e.kind = EventKind::SegmentLHit;
  e.segment = L;
  e.tube_radius = tube_radius;
  e.direction = -1;
  e.stop_after = terminal ? 1 : 0;
  return e;
}

double event_value(const EventSpec& spec, const State& p, const Params& params) {
  switch (spec.kind) {
    case EventKind::XZero: return p(0);
    case EventKind::XPrimeSignChange:
    case EventKind::PlaneXYCross: return p(1) - p(0);
    case EventKind::PlaneYCross: return p(1) - spec.level;
    case EventKind::PlaneZCross: return p(2) - spec.level;
    case EventKind::EllipsoidExit: return ellipsoid_value(p, params) - ellipsoid_level(params.R);
    case EventKind::SegmentLHit: return spec.segment.distance(p) - spec.tube_radius;
  }
  return 0.0;
}

double event_rate(const EventSpec& spec, const State& p, const Params& params) {
  const State f = rhs(p, params);
  switch (spec.kind) {
    case EventKind::XZero: return f(0);
    case EventKind::XPrimeSignChange:
    case EventKind::PlaneXYCross: return f(1) - f(0);
    case EventKind::PlaneYCross: return f(1);
    case EventKind::PlaneZCross: return f(2);
    case EventKind::EllipsoidExit: {
      const double c = kEllipsoidCoefficient / params.R;
      return 2.0 * p(0) * f(0) + 2.0 * c * p(1) * f(1) + 2.0 * c * (p(2) - 2.0 * params.R) * f(2);
    }
    case EventKind::SegmentLHit: {
      const State d = spec.segment.head() - spec.segment.tail();
      const double len2 = d.squaredNorm();
      double alpha = 0.0;
      if (len2 > 0.0) alpha = std::clamp((p - spec.segment.tail()).dot(d) / len2, 0.0, 1.0);
      const State diff = p - spec.segment.point(alpha);
      const double dist = diff.norm();
      return dist > 0.0 ? diff.dot(f) / dist : 0.0;
    }
  }
  return 0.0;
}

State DenseStep::evaluate(double t) const {
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  return coeffs[0] +
         theta * (coeffs[1] + theta1 * (coeffs[2] + theta * (coeffs[3] + theta1 * coeffs[4])));
}

bool Trajectory::covers(double t) const {
  if (times.empty()) return false;
  const double lo = std::min(times.front(), times.back());
  const double hi = std::max(times.front(), times.back());
  return t >= lo && t <= hi;
}

State Trajectory::evaluate(double t) const {
  if (!covers(t)) {
    std::ostringstream os;
    os << "time " << t << " outside trajectory span";
    throw LabError(ErrorCode::OutOfSpan, os.str());
  }
  const bool forward = direction == Direction::Forward;
  // Index of the first node not before t along the integration direction.
  auto it = forward ? std::lower_bound(times.begin(), times.end(), t)
                    : std::lower_bound(times.begin(), times.end(), t, std::greater<double>());
  const auto idx = static_cast<std::size_t>(it - times.begin());
  if (idx < times.size() && times[idx] == t) return states[idx];
  return steps[idx - 1].evaluate(t);
}

std::vector<EventRecord> Trajectory::events_of(EventKind kind, bool include_degenerate) const {
  std::vector<EventRecord> out;
  for (const auto& e : events) {
    if (e.kind == kind && (include_degenerate || !e.degenerate)) out.push_back(e);
  }
  return out;
}

bool Trajectory::has_degenerate() const {
  return std::any_of(events.begin(), events.end(), [](const EventRecord& e) { return e.degenerate; });
}

State evaluate(const Trajectory& trajectory, double t) { return trajectory.evaluate(t); }

double locate_event(const std::function<double(double)>& g, double a, double b, double tol,
                    std::vector<double>* widths) {
  double ga = g(a);
  double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if (sign_of(ga) == sign_of(gb)) {
    throw LabError(ErrorCode::NoSignChange, "event function does not change sign on bracket");
  }
  int stale_side = 0;
  for (int iter = 0; iter < 200; ++iter) {
    const double width = std::abs(b - a);
    if (widths) widths->push_back(width);
    if (width <= tol) break;
    double c = (a * gb - b * ga) / (gb - ga);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(c > lo && c < hi)) c = 0.5 * (a + b);
    double gc = g(c);
    if (gc == 0.0) {
      if (widths) widths->push_back(0.0);
      return c;
    }
    if (sign_of(gc) == sign_of(ga)) {
      a = c;
      ga = gc;
      if (stale_side == -1) gb *= 0.5;
      stale_side = -1;
    } else {
      b = c;
      gb = gc;
      if (stale_side == 1) ga *= 0.5;
      stale_side = 1;
    }
    // Bisection safeguard: the bracket must at least halve per iteration.
    if (std::abs(b - a) > 0.5 * width) {
      const double m = 0.5 * (a + b);
      const double gm = g(m);
      if (gm == 0.0) {
        if (widths) widths->push_back(0.0);
        return m;
      }
      if (sign_of(gm) == sign_of(ga)) {
        a = m;
        ga = gm;
      } else {
        b = m;
        gb = gm;
      }
      stale_side = 0;
    }
  }
  return 0.5 * (a + b);
}

namespace {

class EventProcessor {
 public:
  EventProcessor(const std::vector<EventSpec>& specs, const Params& params,
                 const IntegratorConfig& cfg)
      : specs_(specs), params_(params), cfg_(cfg), trackers_(specs.size()) {}

  void start(double t0, const State& y0) {
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const double g = event_value(specs_[i], y0, params_);
      trackers_[i].last_sign = sign_of(g);
      trackers_[i].last_t = t0;
    }
  }

  /// Appends events found inside the step to out (time ordered). Returns the
  /// time at which integration must stop, if any.
  std::optional<double> process(const DenseStep& step, std::vector<EventRecord>& out) {
    std::vector<EventRecord> found;
    const int m = cfg_.event_samples;
    std::vector<double> ts(static_cast<std::size_t>(m) + 1);
    std::vector<State> ps(ts.size());
    for (int j = 0; j <= m; ++j) {
      ts[static_cast<std::size_t>(j)] = step.t0 + step.h * static_cast<double>(j) / m;
      ps[static_cast<std::size_t>(j)] = step.evaluate(ts[static_cast<std::size_t>(j)]);
    }
    for (std::size_t i = 0; i < specs_.size(); ++i) scan(i, step, ts, ps, found);

    std::stable_sort(found.begin(), found.end(), [&](const EventRecord& a, const EventRecord& b) {
      return (a.t - step.t0) * step.h < (b.t - step.t0) * step.h;
    });
    std::optional<double> stop;
    for (auto& rec : found) {
      const EventSpec& spec = specs_[rec.spec_index];
      out.push_back(rec);
      if (rec.degenerate) continue;
      Tracker& tr = trackers_[rec.spec_index];
      ++tr.count;
      if (spec.stop_after > 0 && tr.count >= spec.stop_after) {
        stop = rec.t;
        break;
      }
    }
    return stop;
  }

 private:
  void scan(std::size_t i, const DenseStep& step, const std::vector<double>& ts,
            const std::vector<State>& ps, std::vector<EventRecord>& found) {
    const EventSpec& spec = specs_[i];
    Tracker& tr = trackers_[i];
    auto g_at = [&](double t) { return event_value(spec, step.evaluate(t), params_); };
    auto rate_at = [&](double t) { return event_rate(spec, step.evaluate(t), params_); };

    std::vector<Sample> samples;
    samples.reserve(ts.size() + 4);
    double g_prev = event_value(spec, ps[0], params_);
    double r_prev = event_rate(spec, ps[0], params_) * step.h;
    for (std::size_t j = 1; j < ts.size(); ++j) {
      const double g_next = event_value(spec, ps[j], params_);
      const double r_next = event_rate(spec, ps[j], params_) * step.h;
      const int s = sign_of(g_prev);
      // Same sign at both ends while the function first approaches zero and
      // then recedes: an extremum inside may hide a pair of roots.
      if (s != 0 && sign_of(g_next) == s && sign_of(r_prev) == -s && sign_of(r_next) == s) {
        double tm = ts[j - 1];
        try {
          tm = locate_event(rate_at, ts[j - 1], ts[j], cfg_.event_tol);
        } catch (const LabError&) {
        }
        const double gm = g_at(tm);
        if (sign_of(gm) != s) samples.push_back({tm, gm});
      }
      samples.push_back({ts[j], g_next});
      g_prev = g_next;
      r_prev = r_next;
    }

    for (const Sample& smp : samples) {
      const int s = sign_of(smp.g);
      if (s == 0) continue;
      if (tr.last_sign != 0 && s != tr.last_sign) {
        double t_root = smp.t;
        try {
          t_root = locate_event(g_at, tr.last_t, smp.t, cfg_.event_tol);
        } catch (const LabError&) {
          // The sampled signs and the dense output disagree only at rounding
          // level; the change is pinned to the sample.
        }
        const int crossing = s;
        if (spec.direction == 0 || spec.direction == crossing) {
          EventRecord rec;
          rec.kind = spec.kind;
          rec.spec_index = i;
          rec.t = t_root;
          rec.state = step.evaluate(t_root);
          rec.crossing = crossing;
          rec.degenerate = is_degenerate(spec, rec.state);
          found.push_back(rec);
        }
      }
      tr.last_sign = s;
      tr.last_t = smp.t;
    }
  }

  bool is_degenerate(const EventSpec& spec, const State& p) const {
    // Zeros of x and x' are judged relative to |p| so that slow but
    // transversal crossings near the origin are still counted.
    const double scale = p.norm();
    switch (spec.kind) {
      case EventKind::XPrimeSignChange:
      case EventKind::PlaneXYCross:
        // On y = x the rate of y - x reduces to x (R - 1 - z).
        return std::abs(p(0) * (params_.R - 1.0 - p(2))) <= cfg_.tangency_tol * scale;
      case EventKind::XZero:
        return std::abs(event_rate(spec, p, params_)) <= cfg_.tangency_tol * scale;
      case EventKind::SegmentLHit: return false;
      default: return std::abs(event_rate(spec, p, params_)) <= cfg_.tangency_tol;
    }
  }

  const std::vector<EventSpec>& specs_;
  const Params& params_;
  const IntegratorConfig& cfg_;
  std::vector<Tracker> trackers_;
};

}  // namespace

Trajectory integrate(const State& start, const Params& params, const IntegratorConfig& config,
                     const std::vector<EventSpec>& events, const StopPredicate& stop) {
  config.validate();
  if (!start.allFinite()) {
    throw LabError(ErrorCode::InvalidArgument, "start state must be finite");
  }
  Trajectory traj;
  traj.params = params;
  traj.direction = config.direction;
  traj.times.push_back(0.0);
  traj.states.push_back(start);

  const double dir = config.sign();
  const double t_end = dir * config.t_max;
  EventProcessor processor(events, params, config);
  processor.start(0.0, start);

  double t = 0.0;
  State y = start;
  State k1 = rhs(y, params);
  double h = initial_step(y, k1, params, config);
  bool last_rejected = false;

  while (dir * (t_end - t) > 0.0) {
    if (h < config.min_step) {
      traj.status = IntegrationStatus::StepUnderflow;
      return traj;
    }
    if (static_cast<long>(traj.steps.size()) >= config.max_steps) {
      traj.status = IntegrationStatus::StepLimit;
      return traj;
    }
    bool final_step = false;
    if (h >= dir * (t_end - t)) {
      h = dir * (t_end - t);
      final_step = true;
    }
    const double hs = dir * h;
    const State k2 = rhs<double>(y + hs * (a21 * k1), params);
    const State k3 = rhs<double>(y + hs * (a31 * k1 + a32 * k2), params);
    const State k4 = rhs<double>(y + hs * (a41 * k1 + a42 * k2 + a43 * k3), params);
    const State k5 = rhs<double>(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), params);
    const State k6 =
        rhs<double>(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), params);
    const State y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const State k7 = rhs(y1, params);
    const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = y1.allFinite() ? error_norm(err, y, y1, config) : 1e10;

    if (!(en <= 1.0)) {
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= std::min(fac, 1.0);
      last_rejected = true;
      continue;
    }

    DenseStep step;
    step.t0 = t;
    step.h = hs;
    const State ydiff = y1 - y;
    const State bspl = hs * k1 - ydiff;
    step.coeffs[0] = y;
    step.coeffs[1] = ydiff;
    step.coeffs[2] = bspl;
    step.coeffs[3] = ydiff - hs * k7 - bspl;
    step.coeffs[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

    const double t_new = final_step ? t_end : t + hs;
    if (!(y1.norm() <= config.blow_up)) {
      traj.status = IntegrationStatus::BlowUp;
      return traj;
    }

    const auto stop_at = processor.process(step, traj.events);
    if (stop_at) {
      traj.steps.push_back(step);
      traj.times.push_back(*stop_at);
      traj.states.push_back(*stop_at == t_new ? y1 : step.evaluate(*stop_at));
      traj.status = IntegrationStatus::StoppedByEvent;
      return traj;
    }

    traj.steps.push_back(step);
    traj.times.push_back(t_new);
    traj.states.push_back(y1);
    t = t_new;
    y = y1;
    k1 = k7;

    if (stop && stop(t, y)) {
      traj.status = IntegrationStatus::StoppedByPredicate;
      return traj;
    }

    double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    last_rejected = false;
    h = std::min(h * fac, config.max_step);
  }
  traj.status = IntegrationStatus::Completed;
  return traj;
}

}  // namespace lorenz
