#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lorenz/conditions.hpp"
#include "lorenz/validated.hpp"

using namespace lorenz;

namespace {

using Quad = __float128;

// Exact for products of doubles and for sums within ~60 binades.
bool contains_exact(const Interval& i, Quad v) { return Quad(i.lo()) <= v && v <= Quad(i.hi()); }

Interval random_interval(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double a = u(rng), b = u(rng);
  return Interval(std::min(a, b), std::max(a, b));
}

double sample_in(const Interval& i, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t = u(rng);
  if (t < 0.05) return i.lo();
  if (t > 0.95) return i.hi();
  return std::clamp(i.lo() + (i.hi() - i.lo()) * t, i.lo(), i.hi());
}

long ulps_between(double a, double b) {
  long n = 0;
  while (a < b && n < 1000) {
    a = std::nextafter(a, b);
    ++n;
  }
  return n;
}

std::array<Quad, 3> rhs_quad(const State& p, const Params& par) {
  const Quad x = p(0), y = p(1), z = p(2);
  return {Quad(par.s) * (y - x), Quad(par.R) * x - y - x * z, x * y - Quad(par.q) * z};
}

Geometry geometry_at_12() {
  const Params p{10, 1, 12};
  return Geometry::from_p1(p, find_p1(p).p1);
}

EnclosureRun gamma_plus_box_run(const Params& p, EnclosureMode mode, double span) {
  IntegratorConfig c;
  c.t_max = 20.0;
  const State centre = follow_gamma_plus(p, SeedConfig{}, c, {}).final_state();
  EnclosureOptions o;
  o.mode = mode;
  return enclose_flow(Box::around(centre, 0.5e-12), p, span, 1e-3, o);
}

}  // namespace

TEST(IntervalOps, Examples) {
  const Interval s = Interval(1, 2) + Interval(3, 4);
  EXPECT_LE(s.lo(), 4.0);
  EXPECT_GE(s.hi(), 6.0);
  EXPECT_LE(ulps_between(s.lo(), 4.0) + ulps_between(6.0, s.hi()), 2);
  // Corner products 3, -4, -6, 8.
  EXPECT_EQ(Interval(-1, 2) * Interval(-3, 4), Interval(-6, 8));
  EXPECT_EQ(square(Interval(-2, 1)), Interval(0, 4));
  EXPECT_EQ(Interval(-2, 3) - Interval(1, 5), Interval(-7, 2));
}

TEST(IntervalOps, RejectsReversedBounds) { EXPECT_THROW(Interval(2, 1), LabError); }

TEST(IntervalOps, OutwardRoundingOfInexactSum) {
  const Interval s = Interval(0.1) + Interval(0.2);
  EXPECT_TRUE(contains_exact(s, Quad(0.1) + Quad(0.2)));
  EXPECT_FALSE(s.is_point());
  EXPECT_EQ(ulps_between(s.lo(), s.hi()), 1);
}

TEST(IntervalRhs, PointAtP0) {
  const Params p{10, 1, 12};
  const Box b = interval_rhs(Box::point(equilibria(p).p0), p);
  EXPECT_TRUE(b.contains(State::Zero()));
  // Largest term is R x.
  const double scale = p.R * equilibria(p).p0(0);
  const double ulp = std::nextafter(scale, 2 * scale) - scale;
  EXPECT_LE(b.width(), 4 * ulp);
}

TEST(IntervalRhs, HandSubstitution) {
  const Box b = interval_rhs(Box::point(State(1, 0, 0)), Params{10, 1, 12});
  EXPECT_TRUE(b.contains(State(-10, 12, 0)));
}

TEST(IntervalRhs, ContainmentFuzzOnRandomBox) {
  std::mt19937_64 rng(21);
  const Params p{10, 8.0 / 3.0, 28};
  const Box box(random_interval(rng, 20), random_interval(rng, 20), random_interval(rng, 40));
  const Box f = interval_rhs(box, p);
  for (int i = 0; i < 1000; ++i) {
    const State s(sample_in(box.x(), rng), sample_in(box.y(), rng), sample_in(box.z(), rng));
    const auto v = rhs_quad(s, p);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(contains_exact(f.v(k), v[k]));
  }
}

TEST(Enclosure, EquilibriumBoxStaysThin) {
  const Params p{10, 1, 12};
  const EnclosureRun r = enclose_flow(Box::point(equilibria(p).p0), p, 1.0, 1e-2);
  EXPECT_LT(r.final_width, 1e-6);
  EXPECT_TRUE(r.final_box().contains(equilibria(p).p0));
}

TEST(Enclosure, DigitsLostOnChaoticBranch) {
  // At q = 1 the box reaches unit width before t = 2, so a shorter span.
  for (const auto& [p, span] : {std::pair{Params{10, 8.0 / 3.0, 28}, 2.0}, std::pair{Params{10, 1, 28}, 1.0}}) {
    const EnclosureRun r = gamma_plus_box_run(p, EnclosureMode::Lohner, span);
    EXPECT_TRUE(std::isfinite(r.digits_lost_per_unit));
    EXPECT_GE(r.digits_lost_per_unit, 2.0) << p.q;
    EXPECT_LE(r.digits_lost_per_unit, 15.0) << p.q;
    EXPECT_FALSE(r.stopped_early);
  }
}

TEST(Enclosure, CentreTrajectoryInsideEveryBox) {
  const Params p{10, 8.0 / 3.0, 28};
  IntegratorConfig c;
  c.t_max = 20.0;
  const State centre = follow_gamma_plus(p, SeedConfig{}, c, {}).final_state();
  const EnclosureRun r = enclose_flow(Box::around(centre, 0.5e-12), p, 2.0, 1e-3);
  IntegratorConfig fine;
  fine.rel_tol = 1e-14;
  fine.abs_tol = 1e-15;
  fine.max_step = 1e-3;
  fine.t_max = 2.0;
  const Trajectory tr = integrate(centre, p, fine, {});
  int outside = 0;
  for (const auto& step : r.steps) {
    if (!step.box.contains(tr.evaluate(std::min(step.t, tr.t_end())))) ++outside;
  }
  EXPECT_EQ(outside, 0);
}

TEST(Enclosure, BackwardSpan) {
  const Params p{10, 1, 12};
  const EnclosureRun r = enclose_flow(Box::around(State(1, 2, 3), 1e-10), p, -0.5, 1e-3);
  ASSERT_FALSE(r.steps.empty());
  EXPECT_LT(r.steps.back().t, 0.0);
  IntegratorConfig c;
  c.direction = Direction::Backward;
  c.t_max = 0.5;
  c.rel_tol = 1e-14;
  c.abs_tol = 1e-15;
  EXPECT_TRUE(r.final_box().contains(integrate(State(1, 2, 3), p, c, {}).final_state()));
}

TEST(Enclosure, ObserverStopsRun) {
  const Params p{10, 1, 12};
  int calls = 0;
  const EnclosureRun r = enclose_flow(Box::around(State(1, 2, 3), 1e-10), p, 1.0, 1e-2, {},
                                      [&](const EnclosureStep&) { return ++calls < 5; });
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(calls, 5);
}

TEST(DistanceBound, SegmentAndBox) {
  const Segment L(State(0, 0, 0), State(1, 0, 0));
  EXPECT_LE(distance_lower_bound(Box::around(State(0.5, 2, 0), 0.1), L), 1.9);
  EXPECT_GT(distance_lower_bound(Box::around(State(0.5, 2, 0), 0.1), L), 1.8);
  EXPECT_EQ(distance_lower_bound(Box::around(State(0.5, 0, 0), 0.1), L), 0.0);
  const Segment diag(State(0, 0, 0), State(1, 1, 0));
  const double lb = distance_lower_bound(Box::around(State(1, 0, 0), 0.1), diag);
  // Nearest corner (0.9, 0.1) has |y - x| = 0.8.
  EXPECT_NEAR(lb, 0.8 / std::sqrt(2.0), 1e-12);
  EXPECT_LE(lb, 0.8 / std::sqrt(2.0));
}

TEST(DistanceBound, NeverExceedsSampledDistance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 400; ++i) {
    const double ha = u(rng), ta = u(rng);
    // Half the segments lie in the plane x = y, as L does.
    const Segment L = i % 2 ? Segment(State(ha, ha, u(rng)), State(ta, ta, u(rng)))
                            : Segment(State(u(rng), u(rng), u(rng)), State(u(rng), u(rng), u(rng)));
    const Box b = Box::around(State(u(rng), u(rng), u(rng)), 0.3);
    const double lb = distance_lower_bound(b, L);
    for (int k = 0; k < 20; ++k) {
      const State s(sample_in(b.x(), rng), sample_in(b.y(), rng), sample_in(b.z(), rng));
      EXPECT_LE(lb, L.distance(s));
    }
  }
}

TEST(CertifySegment, NearXiMaxAtR12) {
  const Geometry g = geometry_at_12();
  const double hi = m_cap_e_extent(g.params).second;
  const double lo = 13.6;
  ASSERT_LT(lo + 1e-10, hi);
  const SegmentCertificate c = certify_condition_b_segment(Interval(lo, lo + 1e-10), g, 2.0);
  EXPECT_EQ(c.verdict, SegmentVerdict::Certified2A) << c.reason;
  ASSERT_TRUE(c.t_exit.has_value());
  EXPECT_GT(c.min_distance_lb, 1e-6);
  const ConditionBSample s = condition_b_sample(c.xi.mid(), g, 20.0);
  EXPECT_EQ(s.verdict, BVerdict::LeavesEBeforeL);
}

TEST(CertifySegment, RejectsIntervalAroundP0) {
  const Geometry g = geometry_at_12();
  const double x0 = g.p0(0);
  EXPECT_THROW(certify_condition_b_segment(Interval(x0 - 1e-3, x0 + 1e-3), g, 2.0), LabError);
  EXPECT_THROW(certify_condition_b_segment(Interval(-x0 - 1e-3, -x0 + 1e-3), g, 2.0), LabError);
}

TEST(ValidatedProperty, ContainmentFuzz) {
  std::mt19937_64 rng(1234);
  const Params p{10, 8.0 / 3.0, 28};
  long violations = 0;
  long samples = 0;
  while (samples < 100000) {
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng));
    const Interval a = random_interval(rng, scale);
    const Interval b = random_interval(rng, scale);
    const Interval sum = a + b, diff = a - b, prod = a * b, sq = square(a), ab = abs(a);
    const Interval root = sqrt(abs(a));
    const Box box(a, b, random_interval(rng, scale) + Interval(scale));
    const Box f = interval_rhs(box, p);
    for (int k = 0; k < 10; ++k, ++samples) {
      const double u = sample_in(a, rng), v = sample_in(b, rng);
      violations += !contains_exact(sum, Quad(u) + Quad(v));
      violations += !contains_exact(diff, Quad(u) - Quad(v));
      violations += !contains_exact(prod, Quad(u) * Quad(v));
      violations += !contains_exact(sq, Quad(u) * Quad(u));
      violations += !contains_exact(ab, Quad(std::abs(u)));
      // sqrt(|u|) inside root iff root.lo^2 <= |u| <= root.hi^2.
      violations += !(Quad(root.lo()) * Quad(root.lo()) <= Quad(std::abs(u)) &&
                      Quad(std::abs(u)) <= Quad(root.hi()) * Quad(root.hi()));
      const State s(u, v, sample_in(box.z(), rng));
      const auto fv = rhs_quad(s, p);
      for (int i = 0; i < 3; ++i) violations += !contains_exact(f.v(i), fv[i]);
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(ValidatedProperty, FlowContainmentOfSampledStarts) {
  const Params p{10, 1, 12};
  const Box start = Box::around(State(2, 3, 10), 1e-6);
  const EnclosureRun r = enclose_flow(start, p, 1.0, 1e-3);
  std::mt19937_64 rng(3);
  IntegratorConfig c;
  c.rel_tol = 1e-14;
  c.abs_tol = 1e-15;
  c.t_max = 1.0;
  for (int i = 0; i < 50; ++i) {
    const State s(sample_in(start.x(), rng), sample_in(start.y(), rng), sample_in(start.z(), rng));
    EXPECT_TRUE(r.final_box().contains(integrate(s, p, c, {}).final_state()));
  }
}

TEST(ValidatedProperty, DegenerateOpsWithinFourUlps) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    for (const Interval& r : {Interval(a) + Interval(b), Interval(a) - Interval(b),
                              Interval(a) * Interval(b), square(Interval(a))}) {
      EXPECT_LE(ulps_between(r.lo(), r.hi()), 4);
    }
  }
}

TEST(ValidatedProperty, WidthMonotoneNaive) {
  const EnclosureRun r = gamma_plus_box_run(Params{10, 8.0 / 3.0, 28}, EnclosureMode::Naive, 1.0);
  int decreases = 0;
  for (std::size_t i = 1; i < r.steps.size(); ++i) decreases += r.steps[i].box.width() < r.steps[i - 1].box.width();
  EXPECT_EQ(decreases, 0);
}

TEST(ValidatedProperty, WidthMonotoneLohner) {
  const EnclosureRun r = gamma_plus_box_run(Params{10, 8.0 / 3.0, 28}, EnclosureMode::Lohner, 2.0);
  int decreases = 0;
  for (std::size_t i = 1; i < r.steps.size(); ++i) decreases += r.steps[i].box.width() < r.steps[i - 1].box.width();
  EXPECT_EQ(decreases, 0) << "of " << r.steps.size() - 1 << " steps";
}

TEST(ValidatedProperty, WideningNeverContradicts) {
  const Geometry g = geometry_at_12();
  const double hi = m_cap_e_extent(g.params).second;
  int certified = 0;
  for (double lo : {-13.6, -13.0, -8.0, 5.0, 10.0, 13.0, 13.6}) {
    const Interval narrow(lo, lo + 1e-10);
    const Interval wide(lo, std::min(lo + 1e-9, hi));
    const auto a = certify_condition_b_segment(narrow, g, 2.0);
    const auto b = certify_condition_b_segment(wide, g, 2.0);
    if (b.verdict == SegmentVerdict::Certified2A) EXPECT_EQ(a.verdict, SegmentVerdict::Certified2A) << lo;
    certified += a.verdict == SegmentVerdict::Certified2A;
  }
  EXPECT_GT(certified, 0);
}

TEST(ValidatedProperty, CertifiedImpliesStandardVerdict) {
  const Geometry g = geometry_at_12();
  for (double lo : {-13.6, -13.0, 13.0, 13.6}) {
    const auto c = certify_condition_b_segment(Interval(lo, lo + 1e-10), g, 2.0);
    if (c.verdict != SegmentVerdict::Certified2A) continue;
    EXPECT_EQ(condition_b_sample(c.xi.mid(), g, 20.0).verdict, BVerdict::LeavesEBeforeL) << lo;
  }
}
