#include <gtest/gtest.h>

#include <cmath>

#include "lorenz/conditions.hpp"
#include "lorenz/report_io.hpp"

using namespace lorenz;

namespace {

Geometry geometry_at(const Params& p) { return Geometry::from_p1(p, find_p1(p).p1); }

}  // namespace

TEST(ConditionA, HoldsAtR12) {
  const auto r = check_condition_a(Params{10, 1, 12});
  EXPECT_TRUE(r.holds);
  EXPECT_FALSE(r.inconclusive);
  EXPECT_EQ(r.failure, ConditionAFailure::None);
  ASSERT_GE(r.ordering.size(), 7u);
  const std::vector<std::string> expected = {"tau1", "t1", "tau2", "tau3", "tau4", "tau5", "t2"};
  EXPECT_EQ(std::vector<std::string>(r.ordering.begin(), r.ordering.begin() + 7), expected);
  // Past the mirror equilibrium's spiral x never vanishes again.
  EXPECT_FALSE(r.t2.has_value());
}

TEST(ConditionA, FailsAtR5) {
  const auto r = check_condition_a(Params{10, 1, 5});
  EXPECT_FALSE(r.holds);
  EXPECT_NE(r.failure, ConditionAFailure::None);
}

TEST(ConditionA, HoldsAtClassicalParams) {
  EXPECT_TRUE(check_condition_a(Params{10, 8.0 / 3.0, 28}).holds);
}

TEST(Sweep, RangeAtQ1) {
  const auto r = sweep_condition_a(10, 1, uniform_grid(5, 20, 0.1));
  ASSERT_TRUE(r.estimated_range.has_value());
  EXPECT_NEAR(r.estimated_range->first, 8.2, 0.5);
  EXPECT_NEAR(r.estimated_range->second, 17.2, 0.5);
  EXPECT_EQ(r.grid.size(), r.verdicts.size());
  for (std::size_t i = 1; i < r.grid.size(); ++i) EXPECT_LT(r.grid[i - 1], r.grid[i]);
}

TEST(Sweep, RangeAtClassicalQ) {
  const auto r = sweep_condition_a(10, 8.0 / 3.0, uniform_grid(10, 50, 0.2));
  ASSERT_TRUE(r.estimated_range.has_value());
  EXPECT_NEAR(r.estimated_range->first, 14.0, 1.0);
  EXPECT_NEAR(r.estimated_range->second, 46.6, 1.0);
}

TEST(Sweep, EndpointsAdjacentToFlips) {
  const auto r = sweep_condition_a(10, 1, uniform_grid(5, 20, 0.5));
  ASSERT_TRUE(r.estimated_range.has_value());
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    if (r.grid[i] == r.estimated_range->first) {
      ASSERT_GT(i, 0u);
      EXPECT_TRUE(r.verdicts[i].holds);
      EXPECT_FALSE(r.verdicts[i - 1].holds);
    }
    if (r.grid[i] == r.estimated_range->second) {
      ASSERT_LT(i + 1, r.grid.size());
      EXPECT_TRUE(r.verdicts[i].holds);
      EXPECT_FALSE(r.verdicts[i + 1].holds);
    }
  }
}

TEST(Sweep, NoHoldsGivesNoRange) {
  const auto r = sweep_condition_a(10, 1, uniform_grid(2, 5, 0.5));
  EXPECT_FALSE(r.estimated_range.has_value());
}

TEST(Sweep, UniformGridEndpoints) {
  const auto g = uniform_grid(5, 20, 0.1);
  EXPECT_EQ(g.size(), 151u);
  EXPECT_DOUBLE_EQ(g.front(), 5.0);
  EXPECT_NEAR(g.back(), 20.0, 1e-12);
}

TEST(FindP1, AboveMAtR12) {
  const Params p{10, 1, 12};
  const P1Result r = find_p1(p);
  EXPECT_GT(r.p1(2), 11.0);
  EXPECT_GT(r.margin, 0.0);
  EXPECT_NEAR(r.p1(0), r.p1(1), 1e-9 * r.p1.norm());
  EXPECT_GT(std::abs(r.p1(0) * (p.R - 1 - r.p1(2))), 1e-9);
  EXPECT_DOUBLE_EQ(r.transversality, std::abs(r.p1(0) * (p.R - 1 - r.p1(2))));
}

TEST(FindP1, NoCrossingNearOnset) {
  try {
    find_p1(Params{10, 1, 1.01});
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCrossing);
  }
}

TEST(ConditionB, SampleNextToP0) {
  const Params p{10, 1, 12};
  const Geometry g = geometry_at(p);
  const double xi = g.p0(0) + 2e-4;
  const ConditionBSample s = condition_b_sample(xi, g, 20.0);
  EXPECT_EQ(s.xi, xi);
  EXPECT_TRUE(s.verdict == BVerdict::LeavesEBeforeL || s.verdict == BVerdict::FourChangesLocal ||
              s.verdict == BVerdict::Inconclusive);
}

TEST(ConditionB, LeavesEVerdictMeansClearOfL) {
  const Params p{10, 1, 12};
  const auto r = check_condition_b(p, 64);
  int seen = 0;
  for (const auto& s : r.samples) {
    if (s.verdict != BVerdict::LeavesEBeforeL) continue;
    ++seen;
    EXPECT_TRUE(s.t_exit.has_value());
    EXPECT_GT(s.min_dist_to_L, r.options.ell_tol);
    EXPECT_LT(*s.t_exit, 0.0);
  }
  EXPECT_GT(seen, 0);
}

TEST(ConditionB, FourChangeWindowVerdict) {
  const Params p{10, 1, 12};
  const auto r = check_condition_b(p, 64);
  int seen = 0;
  for (const auto& s : r.samples) {
    if (s.verdict != BVerdict::FourChangesLocal) continue;
    ++seen;
    EXPECT_GE(s.window_changes, 4);
    EXPECT_LT(s.window_lo, 0.0);
    EXPECT_GT(s.window_hi, 0.0);
    EXPECT_GE(s.window_lo, -r.back_horizon);
    EXPECT_LE(s.window_hi, r.options.window_forward);
  }
  EXPECT_GT(seen, 0);
}

TEST(ConditionB, AggregateAt256Samples) {
  const auto r = check_condition_b(Params{10, 1, 12}, 256);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.count_2a + r.count_2b + r.violations + r.inconclusive,
            static_cast<int>(r.samples.size()));
  EXPECT_EQ(r.samples.size() + r.excluded, 256u);
  EXPECT_EQ(r.holds, r.inconclusive == 0);
}

TEST(ConditionB, RejectsOtherSWithoutOverride) {
  EXPECT_THROW(check_condition_b(Params{12, 1, 12}, 16), LabError);
  ConditionBOptions o;
  o.ellipsoid_override = true;
  const auto r = check_condition_b(Params{12, 1, 12}, 16, 20.0, o);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(ConditionB, RejectsTooFewSamples) {
  EXPECT_THROW(check_condition_b(Params{10, 1, 12}, 1), LabError);
}

TEST(ConditionB, CsvVerdictMap) {
  const auto r = check_condition_b(Params{10, 1, 12}, 16);
  std::stringstream ss;
  write_condition_b_csv(ss, r);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "xi,verdict");
}

TEST(ConditionsProperty, VerdictStableUnderToleranceHalving) {
  const auto sweep = sweep_condition_a(10, 1, uniform_grid(5, 20, 0.5));
  ASSERT_TRUE(sweep.estimated_range.has_value());
  const auto [lo, hi] = *sweep.estimated_range;
  ConditionAOptions fine;
  fine.integrator = IntegratorConfig{}.tightened(2.0);
  for (double R : uniform_grid(5, 20, 0.5)) {
    if (std::abs(R - lo) < 0.2 || std::abs(R - hi) < 0.2) continue;
    const auto a = check_condition_a(Params{10, 1, R});
    const auto b = check_condition_a(Params{10, 1, R}, 100.0, fine);
    EXPECT_EQ(a.holds, b.holds) << R;
  }
}

TEST(ConditionsProperty, P1MarginPositiveWhereConditionAHolds) {
  const auto sweep = sweep_condition_a(10, 1, uniform_grid(5, 20, 0.5));
  for (const auto& v : sweep.verdicts) {
    if (!v.holds) continue;
    EXPECT_GT(find_p1(v.params).margin, 0.0) << v.params.R;
  }
}

TEST(ConditionsProperty, NoReentryAfterBackwardExit) {
  const Params p{10, 1, 12};
  const Geometry g = geometry_at(p);
  const auto r = check_condition_b(p, 64);
  int checked = 0;
  for (const auto& s : r.samples) {
    if (checked == 10) break;
    if (s.verdict != BVerdict::LeavesEBeforeL) continue;
    IntegratorConfig c;
    c.direction = Direction::Backward;
    c.t_max = -*s.t_exit + 1.0;
    const Trajectory tr = integrate(point_on_M(s.xi, p), p, c, {});
    double prev = -1.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      if (tr.times[i] > *s.t_exit) continue;
      const double v = ellipsoid_value(tr.states[i], p.R);
      EXPECT_GE(v, prev) << s.xi << " at t = " << tr.times[i];
      EXPECT_GE(v, ellipsoid_level(p.R) * (1 - 1e-9));
      prev = v;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(ConditionsProperty, ConditionBDeterministic) {
  const auto a = check_condition_b(Params{10, 1, 12}, 64);
  const auto b = check_condition_b(Params{10, 1, 12}, 64);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}
