#include "lorenz/trace.hpp"

#include <algorithm>
#include <cmath>

namespace lorenz {

std::string_view to_string(BranchTag tag) {
  switch (tag) {
    case BranchTag::AllPositive: return "ALL_POSITIVE";
    case BranchTag::CrossesZero: return "CROSSES_ZERO";
    case BranchTag::Undetermined: return "UNDETERMINED";
  }
  return "UNKNOWN";
}

TraceSummary summarize(const Trajectory& trajectory) {
  TraceSummary out;
  out.t_end = trajectory.t_end();
  const double t0 = trajectory.t_begin();
  for (const auto& e : trajectory.events) {
    if (e.t == t0) continue;
    if (e.kind == EventKind::XZero) {
      if (e.degenerate) {
        out.degenerate = true;
      } else {
        out.x_zeros.push_back(e.t);
      }
    } else if (e.kind == EventKind::XPrimeSignChange) {
      if (e.degenerate) {
        out.degenerate = true;
      } else {
        out.xprime_changes.push_back(e.t);
      }
    }
  }
  std::sort(out.x_zeros.begin(), out.x_zeros.end());
  std::sort(out.xprime_changes.begin(), out.xprime_changes.end());

  const auto& tau = out.xprime_changes;
  auto count_between = [&](double a, double b) {
    return static_cast<int>(std::count_if(tau.begin(), tau.end(),
                                          [&](double t) { return t > a && t < b; }));
  };

  if (out.x_zeros.empty()) {
    out.changes_before_first_zero = static_cast<int>(tau.size());
    return out;
  }
  out.changes_before_first_zero =
      static_cast<int>(std::count_if(tau.begin(), tau.end(), [&](double t) { return t < out.x_zeros.front(); }));
  for (std::size_t i = 0; i + 1 < out.x_zeros.size(); ++i) {
    const int c = count_between(out.x_zeros[i], out.x_zeros[i + 1]);
    out.sigma.push_back(c);
    out.word.push_back(c);
  }
  const double last = out.x_zeros.back();
  out.sigma.push_back(
      static_cast<int>(std::count_if(tau.begin(), tau.end(), [&](double t) { return t > last; })));
  out.sigma_tail_open = true;
  return out;
}

BranchClass classify_branch(const Trajectory& trajectory, double positivity_horizon,
                            const PositivityOptions& opts) {
  BranchClass out;
  out.horizon = std::min(positivity_horizon, trajectory.t_end());

  // A zero flagged degenerate is still a sign change of x.
  const auto zeros = trajectory.events_of(EventKind::XZero, true);
  for (const auto& z : zeros) {
    if (z.t > trajectory.t_begin() && z.t <= positivity_horizon) {
      out.tag = BranchTag::CrossesZero;
      out.t1 = z.t;
      if (z.degenerate) out.cause = "first zero of x has a small rate relative to |p|";
      const auto taus = trajectory.events_of(EventKind::XPrimeSignChange);
      out.changes_before_t1 = static_cast<int>(
          std::count_if(taus.begin(), taus.end(), [&](const EventRecord& e) { return e.t <= z.t; }));
      return out;
    }
  }

  const Params& params = trajectory.params;
  const auto region = trapping_region_at_p0(params);
  const State p0 = equilibria(params).p0;
  bool dipped = false;
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const double t = trajectory.times[i];
    if (t > positivity_horizon) break;
    const State& p = trajectory.states[i];
    if (i > 0 && !(p(0) > 0.0)) {
      out.cause = "x not positive at a node without a recorded zero";
      return out;
    }
    if (p.norm() >= opts.escape_radius && !(p.minCoeff() > opts.pos_tol)) dipped = true;
    if (region && region->value(p, p0) < region->level) {
      out.certified_at = t;
      if (dipped) {
        out.positive_side = true;
        out.cause = "y or z fell below pos_tol; x stayed positive";
      } else {
        out.tag = BranchTag::AllPositive;
      }
      return out;
    }
  }
  if (dipped) {
    out.cause = "component fell below pos_tol";
    return out;
  }

  if (!trajectory.ok()) {
    out.cause = std::string("integrator: ") + std::string(to_string(trajectory.status));
  } else if (!region) {
    out.cause = "p0 not linearly stable; positivity holds only up to the horizon";
  } else {
    out.cause = "horizon reached before entering the trapping region";
  }
  return out;
}

}  // namespace lorenz
