#include "lorenz/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lorenz/parallel.hpp"

namespace lorenz {

std::string_view to_string(ConditionAFailure f) {
  switch (f) {
    case ConditionAFailure::None: return "NONE";
    case ConditionAFailure::TooFewTaus: return "TOO_FEW_TAUS";
    case ConditionAFailure::NoXZero: return "NO_X_ZERO";
    case ConditionAFailure::OrderViolation: return "ORDER_VIOLATION";
    case ConditionAFailure::Horizon: return "HORIZON";
  }
  return "UNKNOWN";
}

std::string_view to_string(BVerdict v) {
  switch (v) {
    case BVerdict::LeavesEBeforeL: return "LEAVES_E_BEFORE_L";
    case BVerdict::FourChangesLocal: return "FOUR_CHANGES_LOCAL";
    case BVerdict::Violation: return "VIOLATION";
    case BVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

ConditionAReport check_condition_a(const Params& params, double horizon,
                                   const ConditionAOptions& opts) {
  params.validate();
  ConditionAReport rep;
  rep.params = params;
  rep.horizon = horizon;

  IntegratorConfig ic = opts.integrator;
  ic.t_max = horizon;
  const auto region = trapping_region_at_p0(params);
  const State p0 = equilibria(params).p0;
  StopPredicate stop;
  if (region) {
    stop = [&](double, const State& p) { return region->value(p, p0) < region->level; };
  }
  const Trajectory traj = follow_gamma_plus(
      params, opts.seed, ic, {EventSpec::x_zero(2), EventSpec::xprime_sign_change()}, stop);
  const TraceSummary sum = summarize(traj);

  if (!sum.x_zeros.empty()) rep.t1 = sum.x_zeros[0];
  if (sum.x_zeros.size() > 1) rep.t2 = sum.x_zeros[1];
  const double t2 = rep.t2 ? *rep.t2 : std::numeric_limits<double>::infinity();
  for (double tau : sum.xprime_changes) {
    if (tau < t2 && rep.taus.size() < 5) rep.taus.push_back(tau);
  }

  std::vector<std::pair<double, std::string>> labelled;
  for (std::size_t i = 0; i < rep.taus.size(); ++i) {
    labelled.emplace_back(rep.taus[i], "tau" + std::to_string(i + 1));
  }
  if (rep.t1) labelled.emplace_back(*rep.t1, "t1");
  labelled.emplace_back(t2, "t2");
  std::stable_sort(labelled.begin(), labelled.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& l : labelled) rep.ordering.push_back(l.second);

  // Only events up to the last one that enters the ordering matter.
  double cutoff = t2;
  if (!rep.t2 && rep.taus.size() == 5) cutoff = std::max(rep.taus.back(), rep.t1.value_or(0.0));
  for (const auto& e : traj.events) {
    if (e.degenerate && e.t > traj.t_begin() && e.t <= cutoff &&
        (e.kind == EventKind::XZero || e.kind == EventKind::XPrimeSignChange)) {
      rep.degenerate = true;
    }
  }
  if (!traj.ok() || rep.degenerate) rep.inconclusive = true;

  if (!rep.t1) {
    if (traj.status == IntegrationStatus::StoppedByPredicate) {
      rep.failure = ConditionAFailure::NoXZero;
    } else {
      rep.failure = ConditionAFailure::Horizon;
      rep.inconclusive = true;
    }
    return rep;
  }
  if (rep.taus.empty() || rep.taus[0] > *rep.t1 ||
      (rep.taus.size() > 1 && rep.taus[1] < *rep.t1)) {
    rep.failure = ConditionAFailure::OrderViolation;
    return rep;
  }
  if (rep.taus.size() < 5) {
    // Without a second zero the missing changes may lie past the horizon.
    rep.failure = rep.t2 ? ConditionAFailure::TooFewTaus : ConditionAFailure::Horizon;
    if (!rep.t2) rep.inconclusive = true;
    return rep;
  }
  rep.holds = !rep.inconclusive;
  return rep;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw LabError(ErrorCode::InvalidArgument, "grid needs step > 0 and hi >= lo");
  }
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

SweepResult sweep_condition_a(double s, double q, const std::vector<double>& R_grid,
                              const SweepOptions& opts) {
  for (std::size_t i = 1; i < R_grid.size(); ++i) {
    if (!(R_grid[i] > R_grid[i - 1])) {
      throw LabError(ErrorCode::InvalidArgument, "sweep grid must be strictly increasing");
    }
  }
  std::map<double, ConditionAReport> results;
  auto evaluate = [&](const std::vector<double>& Rs) {
    std::vector<ConditionAReport> out(Rs.size());
    parallel_for(Rs.size(), [&](std::size_t i) {
      out[i] = check_condition_a(Params{s, q, Rs[i]}, opts.horizon, opts.check);
    });
    for (std::size_t i = 0; i < Rs.size(); ++i) results[Rs[i]] = out[i];
  };
  evaluate(R_grid);

  auto verdict_of = [](const ConditionAReport& r) { return r.inconclusive ? 2 : (r.holds ? 1 : 0); };
  for (int round = 0; round < opts.refinement_rounds; ++round) {
    std::vector<double> inserts;
    for (auto it = results.begin(); std::next(it) != results.end(); ++it) {
      auto nx = std::next(it);
      if (verdict_of(it->second) != verdict_of(nx->second)) {
        inserts.push_back(0.5 * (it->first + nx->first));
      }
    }
    if (inserts.empty()) break;
    evaluate(inserts);
  }

  SweepResult out;
  out.s = s;
  out.q = q;
  for (const auto& [R, rep] : results) {
    out.grid.push_back(R);
    out.verdicts.push_back(rep);
    if (rep.inconclusive) ++out.inconclusive;
  }
  std::size_t best_len = 0, best_start = 0;
  for (std::size_t i = 0; i < out.verdicts.size();) {
    if (!out.verdicts[i].holds) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < out.verdicts.size() && out.verdicts[j].holds) ++j;
    if (j - i > best_len) {
      best_len = j - i;
      best_start = i;
    }
    i = j;
  }
  if (best_len > 0) {
    out.estimated_range = std::make_pair(out.grid[best_start], out.grid[best_start + best_len - 1]);
  }
  return out;
}

P1Result find_p1(const Params& params, double horizon, const ConditionAOptions& opts) {
  params.validate();
  IntegratorConfig ic = opts.integrator;
  ic.t_max = horizon;
  const auto region = trapping_region_at_p0(params);
  const State p0 = equilibria(params).p0;
  StopPredicate stop;
  if (region) {
    stop = [&](double, const State& p) { return region->value(p, p0) < region->level; };
  }
  const Trajectory traj = follow_gamma_plus(params, opts.seed, ic, {EventSpec::plane_xy(0, 1)}, stop);
  for (const auto& e : traj.events) {
    if (e.degenerate || e.t == traj.t_begin()) continue;
    P1Result r;
    r.p1 = e.state;
    r.t = e.t;
    r.margin = e.state(2) - (params.R - 1.0);
    r.transversality = std::abs(e.state(0) * (params.R - 1.0 - e.state(2)));
    return r;
  }
  std::string why = "no transversal crossing of x = y";
  if (traj.status == IntegrationStatus::StoppedByPredicate) why += " before entering the trapping region of p0";
  else why += " before the horizon";
  throw LabError(ErrorCode::NoCrossing, why);
}

double min_distance_to_segment(const Trajectory& traj, const Segment& L, double t_stop,
                               int samples_per_step) {
  const double dir = traj.direction == Direction::Forward ? 1.0 : -1.0;
  double best = L.distance(traj.states.front());
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const DenseStep& st = traj.steps[i];
    if (dir * (st.t0 - t_stop) >= 0.0) break;
    for (int j = 1; j <= samples_per_step; ++j) {
      double t = st.t0 + st.h * j / samples_per_step;
      if (dir * (t - t_stop) > 0.0) t = t_stop;
      best = std::min(best, L.distance(st.evaluate(t)));
    }
  }
  return best;
}

ConditionBSample condition_b_sample(double xi, const Geometry& geometry, double back_horizon,
                                    const ConditionBOptions& opts) {
  const Params& params = geometry.params;
  const State start = point_on_M(xi, params);
  ConditionBSample out;
  out.xi = xi;

  IntegratorConfig back = opts.integrator;
  back.direction = Direction::Backward;
  back.t_max = back_horizon;
  const std::vector<EventSpec> back_events = {
      EventSpec::x_zero(), EventSpec::xprime_sign_change(), EventSpec::ellipsoid_exit(true),
      EventSpec::segment_hit(geometry.L, opts.ell_tol, false)};
  const Trajectory bt = integrate(start, params, back, back_events);

  IntegratorConfig fwd = opts.integrator;
  fwd.direction = Direction::Forward;
  fwd.t_max = opts.window_forward;
  const Trajectory ft =
      integrate(start, params, fwd, {EventSpec::x_zero(1), EventSpec::xprime_sign_change()});

  // (2b): the maximal window around 0 free of zeros of x.
  double a = bt.t_end();
  double b = ft.t_end();
  for (const auto& e : bt.events_of(EventKind::XZero, true)) a = std::max(a, e.t);
  for (const auto& e : ft.events_of(EventKind::XZero, true)) b = std::min(b, e.t);
  out.window_lo = a;
  out.window_hi = b;
  bool x_clear = std::abs(start(0)) > opts.pos_tol;
  for (std::size_t i = 0; i < bt.times.size() && bt.times[i] >= a; ++i) {
    if (!(std::abs(bt.states[i](0)) > opts.pos_tol)) x_clear = false;
  }
  for (std::size_t i = 0; i < ft.times.size() && ft.times[i] <= b; ++i) {
    if (!(std::abs(ft.states[i](0)) > opts.pos_tol)) x_clear = false;
  }
  bool degenerate_inside = false;
  int changes = 0;
  for (const auto& e : bt.events_of(EventKind::XPrimeSignChange, true)) {
    if (e.t > a && e.t < 0.0) e.degenerate ? void(degenerate_inside = true) : void(++changes);
  }
  for (const auto& e : ft.events_of(EventKind::XPrimeSignChange, true)) {
    if (e.t < b && e.t > 0.0) e.degenerate ? void(degenerate_inside = true) : void(++changes);
  }
  out.window_changes = changes;
  out.satisfies_2b = x_clear && !degenerate_inside && changes >= 4;

  // (2a): backward path leaves E before meeting the tube around L.
  const auto exits = bt.events_of(EventKind::EllipsoidExit);
  const auto hits = bt.events_of(EventKind::SegmentLHit, true);
  if (!exits.empty()) out.t_exit = exits.front().t;
  if (!hits.empty()) out.t_hit = hits.front().t;
  const double t_stop = out.t_exit ? *out.t_exit : bt.t_end();
  out.min_dist_to_L = min_distance_to_segment(bt, geometry.L, t_stop);
  const bool hit_before_exit = out.t_hit && (!out.t_exit || *out.t_hit > *out.t_exit);
  out.satisfies_2a = out.t_exit && !hit_before_exit && out.min_dist_to_L > opts.ell_tol;

  if (out.satisfies_2b) {
    out.verdict = BVerdict::FourChangesLocal;
  } else if (out.satisfies_2a) {
    out.verdict = BVerdict::LeavesEBeforeL;
  } else if (hit_before_exit || (out.t_exit && out.min_dist_to_L <= opts.ell_tol)) {
    out.verdict = BVerdict::Violation;
  } else {
    out.verdict = BVerdict::Inconclusive;
  }
  return out;
}

ConditionBReport check_condition_b(const Params& params, int n_samples, double back_horizon,
                                   const ConditionBOptions& opts) {
  params.validate();
  if (n_samples < 2) throw LabError(ErrorCode::InvalidArgument, "n_samples must be at least 2");
  ConditionBReport rep;
  rep.params = params;
  rep.back_horizon = back_horizon;
  rep.options = opts;
  if (params.s != 10.0) {
    if (!opts.ellipsoid_override) {
      throw LabError(ErrorCode::InvalidParams,
                     "the ellipsoid E is only known to be invariant for s = 10");
    }
    rep.warnings.push_back("s != 10: ellipsoid invariance not guaranteed");
  }

  ConditionAOptions aopts;
  aopts.integrator = opts.integrator;
  const P1Result p1 = find_p1(params, opts.p1_horizon, aopts);
  rep.geometry = Geometry::from_p1(params, p1.p1);

  const auto [lo, hi] = m_cap_e_extent(params);
  const double xi0 = rep.geometry.p0(0);
  std::vector<double> xis;
  for (int i = 0; i < n_samples; ++i) {
    const double xi = lo + (hi - lo) * (i + 0.5) / n_samples;
    if (std::abs(xi - xi0) < opts.delta || std::abs(xi + xi0) < opts.delta) {
      ++rep.excluded;
      continue;
    }
    xis.push_back(xi);
  }
  rep.samples.resize(xis.size());
  parallel_for(xis.size(), [&](std::size_t i) {
    rep.samples[i] = condition_b_sample(xis[i], rep.geometry, back_horizon, opts);
  });
  for (const auto& s : rep.samples) {
    switch (s.verdict) {
      case BVerdict::LeavesEBeforeL: ++rep.count_2a; break;
      case BVerdict::FourChangesLocal: ++rep.count_2b; break;
      case BVerdict::Violation: ++rep.violations; break;
      case BVerdict::Inconclusive: ++rep.inconclusive; break;
    }
  }
  rep.holds = rep.violations == 0 && rep.inconclusive == 0;
  return rep;
}

}  // namespace lorenz
