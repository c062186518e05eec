#include "lorenz/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lorenz {

void SeedConfig::validate() const {
  if (!(epsilon > 0.0) || epsilon > 1e-4) {
    throw LabError(ErrorCode::InvalidArgument, "seed epsilon must lie in (0, 1e-4]");
  }
}

State seed_gamma_plus(const Params& params, const SeedConfig& cfg) {
  cfg.validate();
  const auto pair = unstable_eigenpair(params);
  State seed = cfg.epsilon * pair.eigenvector;
  if (cfg.richardson) {
    // Second-order term of the manifold graph: (2 lambda + q) w_z = vx vy.
    const State& v = pair.eigenvector;
    const double wz = v(0) * v(1) / (2.0 * pair.eigenvalue + params.q);
    seed(2) += cfg.epsilon * cfg.epsilon * wz;
  }
  return seed;
}

IntegratorConfig gamma_plus_config(const IntegratorConfig& base, const State& seed) {
  IntegratorConfig cfg = base;
  const double scale = seed.norm();
  if (scale > 0.0) cfg.abs_tol = std::min(base.abs_tol, base.rel_tol * scale);
  cfg.direction = Direction::Forward;
  return cfg;
}

double seed_backward_angle(const Params& params, const SeedConfig& cfg, double backward_time) {
  const auto pair = unstable_eigenpair(params);
  const State seed = seed_gamma_plus(params, cfg);
  IntegratorConfig ic;
  ic.direction = Direction::Backward;
  // Backward time grows the stable components, fastest at rate s + 1 + lambda.
  const double fast = params.s + 1.0 + pair.eigenvalue;
  ic.t_max = backward_time > 0.0 ? backward_time : 2.0 / std::max(pair.eigenvalue, fast);
  ic.abs_tol = ic.rel_tol * seed.norm() * 1e-3;
  ic.max_step = ic.t_max / 8.0;
  const Trajectory back = integrate(seed, params, ic, {});
  const State& p = back.final_state();
  const double cross = p.cross(pair.eigenvector).norm();
  const double dot = p.dot(pair.eigenvector);
  return std::atan2(cross, dot);
}

Trajectory follow_gamma_plus(const Params& params, const SeedConfig& seed,
                             const IntegratorConfig& config, const std::vector<EventSpec>& events,
                             const StopPredicate& stop) {
  const State start = seed_gamma_plus(params, seed);
  return integrate(start, params, gamma_plus_config(config, start), events, stop);
}

bool CheckpointLevel::pass() const {
  return found && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

bool CheckpointReport::all_pass() const {
  return at_y_equals_1.pass() && at_z_equals_1000.pass() && at_y_equals_0.pass();
}

CheckpointReport lemma2_checkpoints(const Params& params, const SeedConfig& seed,
                                    const IntegratorConfig& config) {
  params.validate();
  const std::vector<EventSpec> events = {
      EventSpec::plane_y(1.0, +1),
      EventSpec::plane_z(1000.0, +1),
      EventSpec::plane_y(0.0, -1, 1),
  };
  const Trajectory traj = follow_gamma_plus(params, seed, config, events);

  auto first_of = [&](std::size_t index) -> const EventRecord* {
    for (const auto& e : traj.events) {
      if (e.spec_index == index && !e.degenerate) return &e;
    }
    return nullptr;
  };

  CheckpointReport report;
  report.params = params;
  const char* names[3] = {"y=1", "z=1000", "y=0"};
  CheckpointLevel* levels[3] = {&report.at_y_equals_1, &report.at_z_equals_1000,
                                &report.at_y_equals_0};
  for (std::size_t i = 0; i < 3; ++i) {
    const EventRecord* e = first_of(i);
    if (!e) {
      throw LabError(ErrorCode::MissingCheckpoint,
                     std::string("level ") + names[i] + " not crossed before the horizon");
    }
    levels[i]->level = names[i];
    levels[i]->found = true;
    levels[i]->t = e->t;
    levels[i]->state = e->state;
  }

  {
    const State& p = report.at_y_equals_1.state;
    const double x = p(0), z = p(2);
    report.at_y_equals_1.checks = {
        {"0.096 <= x <= 0.1", x, x >= 0.096 && x <= 0.1},
        {"x^2/20 < z < 0.1", z, x * x / 20.0 < z && z < 0.1},
    };
  }
  {
    const State& p = report.at_z_equals_1000.state;
    report.at_z_equals_1000.checks = {
        {"126.4 < x < 135.6", p(0), p(0) > 126.4 && p(0) < 135.6},
        {"798 < y < 1000", p(1), p(1) > 798.0 && p(1) < 1000.0},
    };
  }
  {
    const State& p = report.at_y_equals_0.state;
    report.at_y_equals_0.checks = {
        {"155 < x < 189", p(0), p(0) > 155.0 && p(0) < 189.0},
        {"z > 10.4 x", p(2), p(2) > 10.4 * p(0)},
    };
  }

  bool monotone = true;
  const double t_y1 = report.at_y_equals_1.t;
  State prev = traj.states.front();
  for (std::size_t i = 1; i < traj.times.size() && traj.times[i] <= t_y1; ++i) {
    if (!((traj.states[i] - prev).minCoeff() > 0.0)) monotone = false;
    prev = traj.states[i];
  }
  if (!((report.at_y_equals_1.state - prev).minCoeff() > 0.0)) monotone = false;
  report.monotone_to_y1 = monotone;
  return report;
}

double default_classification_horizon(const Params& params, const SeedConfig& seed) {
  const double lambda = unstable_eigenpair(params).eigenvalue;
  double horizon = 60.0 + (std::log(1.0 / seed.epsilon) + 25.0) / lambda;
  const auto eq = equilibria(params);
  const auto lin = linearize(eq.p0, params);
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& mu : lin.eigenvalues) slowest = std::min(slowest, std::abs(mu.real()));
  if (slowest > 0.0 && std::isfinite(slowest)) horizon += 25.0 / slowest;
  return horizon;
}

BranchClass classify_gamma_plus(const Params& params, const ClassifyOptions& opts) {
  params.validate();
  const double horizon = opts.horizon ? *opts.horizon : default_classification_horizon(params, opts.seed);
  IntegratorConfig ic = opts.integrator;
  ic.t_max = horizon;
  const auto region = trapping_region_at_p0(params);
  const State p0 = equilibria(params).p0;
  StopPredicate stop;
  if (region) {
    stop = [&](double, const State& p) { return region->value(p, p0) < region->level; };
  }
  const Trajectory traj = follow_gamma_plus(
      params, opts.seed, ic, {EventSpec::x_zero(1), EventSpec::xprime_sign_change()}, stop);
  return classify_branch(traj, horizon, opts.positivity);
}

namespace {

BranchClass classify_with_retry(const Params& params, const ClassifyOptions& opts) {
  BranchClass c = classify_gamma_plus(params, opts);
  if (c.tag != BranchTag::Undetermined || c.positive_side) return c;
  ClassifyOptions longer = opts;
  longer.horizon = 2.0 * (opts.horizon ? *opts.horizon : default_classification_horizon(params, opts.seed));
  return classify_gamma_plus(params, longer);
}

}  // namespace

RStarResult find_r_star(double s, double q, std::pair<double, double> bracket0, double width_tol,
                        const RStarOptions& opts) {
  if (!(bracket0.first < bracket0.second) || !(width_tol > 0.0)) {
    throw LabError(ErrorCode::InvalidArgument, "bracket must be increasing and width_tol positive");
  }
  RStarResult out;
  out.s = s;
  out.q = q;
  auto classify = [&](double R) {
    BranchClass c = classify_with_retry(Params{s, q, R}, opts.classify);
    out.history.push_back({R, c.tag, c.positive_side});
    return c;
  };
  auto lower_side = [](const BranchClass& c) {
    return c.tag == BranchTag::AllPositive || c.positive_side;
  };

  double lo = bracket0.first, hi = bracket0.second;
  BranchClass c_lo = classify(lo);
  BranchClass c_hi = classify(hi);
  auto side = [&](const BranchClass& c) { return lower_side(c) ? 0 : c.tag == BranchTag::CrossesZero ? 1 : 2; };
  if (side(c_lo) == 2 || side(c_hi) == 2) {
    throw LabError(ErrorCode::Unresolved, "bracket endpoint could not be classified");
  }
  if (side(c_lo) == side(c_hi)) {
    throw LabError(ErrorCode::SameClassAtEndpoints,
                   std::string("both endpoints classified ") + std::string(to_string(c_lo.tag)));
  }
  if (side(c_lo) != 0) {
    throw LabError(ErrorCode::InvalidArgument,
                   "expected the lower endpoint all-positive and the upper endpoint crossing");
  }

  int undetermined_run = 0;
  const double offsets[] = {0.5, 0.25, 0.75, 0.125, 0.875, 0.0625};
  out.resolved = true;
  while (hi - lo >= width_tol && out.iterations < opts.max_iterations) {
    const double probe = lo + offsets[std::min(undetermined_run, 5)] * (hi - lo);
    ++out.iterations;
    BranchClass c = classify(probe);
    if (side(c) == 2) {
      if (++undetermined_run >= opts.max_consecutive_undetermined) {
        out.resolved = false;
        out.note = "consecutive undetermined classifications; bracket returned as-is";
        break;
      }
      continue;
    }
    undetermined_run = 0;
    if (side(c) == 0) {
      lo = probe;
      c_lo = c;
    } else {
      hi = probe;
      c_hi = c;
    }
  }
  if (hi - lo >= width_tol && out.resolved) {
    out.resolved = false;
    out.note = "iteration limit reached";
  }
  out.R_lo = lo;
  out.R_hi = hi;
  out.lo_class = c_lo;
  out.hi_class = c_hi;

  // Flip-flop probe on a geometric grid of the initial bracket.
  if (opts.monotonicity_probes > 0) {
    const double a = std::log(bracket0.first), b = std::log(bracket0.second);
    for (int i = 1; i <= opts.monotonicity_probes; ++i) {
      const double R = std::exp(a + (b - a) * i / (opts.monotonicity_probes + 1.0));
      const BranchClass c = classify(R);
      const bool expected_positive = R < out.R_lo;
      const bool expected_crossing = R > out.R_hi;
      if ((expected_positive && side(c) == 1) || (expected_crossing && side(c) == 0)) {
        out.nonmonotone = true;
        std::ostringstream os;
        os << "classification flip-flop at R=" << R << " (" << to_string(c.tag) << ")";
        out.note = out.note.empty() ? os.str() : out.note + "; " + os.str();
      }
    }
  }
  return out;
}

NearHomoclinicReport near_homoclinic_diagnostics(const Params& params, const ClassifyOptions& opts,
                                                 double ball_radius) {
  params.validate();
  NearHomoclinicReport report;
  report.R = params.R;
  report.ball_radius = ball_radius;
  report.rel_tol = opts.integrator.rel_tol;
  report.horizon = opts.horizon ? *opts.horizon : default_classification_horizon(params, opts.seed);

  IntegratorConfig ic = opts.integrator;
  ic.t_max = report.horizon;
  const auto region = trapping_region_at_p0(params);
  const State p0 = equilibria(params).p0;
  StopPredicate stop;
  if (region) {
    stop = [&](double, const State& p) { return region->value(p, p0) < region->level; };
  }
  const Trajectory traj = follow_gamma_plus(
      params, opts.seed, ic, {EventSpec::x_zero(1), EventSpec::xprime_sign_change()}, stop);

  const auto taus = traj.events_of(EventKind::XPrimeSignChange);
  report.closest_approach = std::numeric_limits<double>::infinity();
  report.min_max_x_xprime = std::numeric_limits<double>::infinity();
  if (taus.empty()) return report;
  const double tau1 = taus.front().t;
  report.tau1 = tau1;

  auto radius_at = [&](double t) { return traj.evaluate(t).norm(); };
  constexpr int kSamples = 16;
  double best_t = tau1;
  double best_r = radius_at(tau1);
  for (const auto& step : traj.steps) {
    const double t_lo = std::min(step.t0, step.t0 + step.h);
    const double t_hi = std::min(std::max(step.t0, step.t0 + step.h), traj.t_end());
    if (t_hi <= tau1) continue;
    for (int j = 0; j <= kSamples; ++j) {
      const double t = std::max(tau1, t_lo + (t_hi - t_lo) * j / kSamples);
      const State p = step.evaluate(t);
      const double r = p.norm();
      if (r < best_r) {
        best_r = r;
        best_t = t;
      }
      const double xprime = params.s * (p(1) - p(0));
      report.min_max_x_xprime = std::min(report.min_max_x_xprime, std::max(std::abs(p(0)), std::abs(xprime)));
    }
  }
  // Golden-section refinement around the sampled minimum.
  double a = std::max(tau1, best_t - 0.05), b = std::min(traj.t_end(), best_t + 0.05);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = radius_at(c), fd = radius_at(d);
  for (int i = 0; i < 80 && b - a > 1e-13; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = radius_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = radius_at(d);
    }
  }
  const double t_ref = 0.5 * (a + b);
  const double r_ref = radius_at(t_ref);
  if (r_ref < best_r) {
    best_r = r_ref;
    best_t = t_ref;
  }
  report.closest_approach = best_r;
  report.t_closest = best_t;
  report.reentered_ball = best_r < ball_radius;
  return report;
}

}  // namespace lorenz
