#include <gtest/gtest.h>

#include "lorenz/manifold.hpp"
#include "lorenz/report_io.hpp"

using namespace lorenz;

namespace {

const std::vector<EventSpec> kTraceEvents = {EventSpec::x_zero(), EventSpec::xprime_sign_change()};

Trajectory gamma_plus(const Params& p, double horizon, double tighten = 1.0) {
  IntegratorConfig c;
  c.t_max = horizon;
  return follow_gamma_plus(p, SeedConfig{}, c.tightened(tighten), kTraceEvents);
}

}  // namespace

TEST(Summarize, ConstantTrajectory) {
  const Params p{10, 1, 12};
  IntegratorConfig c;
  c.t_max = 10.0;
  const TraceSummary s = summarize(integrate(equilibria(p).p0, p, c, kTraceEvents));
  EXPECT_TRUE(s.x_zeros.empty());
  EXPECT_TRUE(s.word.empty());
  EXPECT_TRUE(s.xprime_changes.empty());
  EXPECT_FALSE(s.degenerate);
}

TEST(Summarize, OneChangeBeforeFirstZeroAtLargeR) {
  const TraceSummary s = summarize(gamma_plus(Params{10, 1, 1000}, 5.0));
  ASSERT_FALSE(s.x_zeros.empty());
  EXPECT_EQ(s.changes_before_first_zero, 1);
  EXPECT_LT(s.xprime_changes.front(), s.x_zeros.front());
}

TEST(Summarize, ConditionAOrderingFromMergedEvents) {
  const TraceSummary s = summarize(gamma_plus(Params{10, 1, 12}, 100.0));
  ASSERT_GE(s.xprime_changes.size(), 5u);
  ASSERT_GE(s.x_zeros.size(), 1u);
  const auto& tau = s.xprime_changes;
  const double t1 = s.x_zeros[0];
  EXPECT_LT(tau[0], t1);
  EXPECT_LT(t1, tau[1]);
  for (int i = 1; i < 4; ++i) EXPECT_LT(tau[i], tau[i + 1]);
  if (s.x_zeros.size() > 1) EXPECT_LT(tau[4], s.x_zeros[1]);
}

TEST(Summarize, WordExcludesOpenTail) {
  const TraceSummary s = summarize(gamma_plus(Params{10, 1, 28}, 30.0));
  ASSERT_GE(s.x_zeros.size(), 2u);
  EXPECT_EQ(s.word.size(), s.x_zeros.size() - 1);
  EXPECT_TRUE(s.sigma_tail_open);
  EXPECT_EQ(s.sigma.size(), s.word.size() + 1);
}

TEST(Summarize, JsonShape) {
  const Json j = to_json(summarize(gamma_plus(Params{10, 1, 12}, 30.0)));
  for (const char* key : {"t", "tau", "sigma", "open_tail"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["open_tail"].is_boolean());
}

TEST(ClassifyBranch, AllPositiveNearOnset) {
  const BranchClass c = classify_gamma_plus(Params{10, 1, 1.01});
  EXPECT_EQ(c.tag, BranchTag::AllPositive);
  EXPECT_TRUE(c.certified_at.has_value());
}

TEST(ClassifyBranch, CrossesZeroAtLargeR) {
  const BranchClass c = classify_gamma_plus(Params{10, 1, 1000});
  EXPECT_EQ(c.tag, BranchTag::CrossesZero);
  ASSERT_TRUE(c.t1.has_value());
  EXPECT_EQ(c.changes_before_t1, 1);
}

TEST(ClassifyBranch, ShortHorizonUndetermined) {
  ClassifyOptions o;
  o.horizon = 0.5;
  const BranchClass c = classify_gamma_plus(Params{10, 1, 5}, o);
  EXPECT_EQ(c.tag, BranchTag::Undetermined);
  EXPECT_FALSE(c.cause.empty());
}

TEST(TraceProperty, WordInvariantUnderToleranceHalving) {
  int compared = 0;
  for (double R : {12.0, 20.0, 22.0, 24.0, 28.0}) {
    const TraceSummary a = summarize(gamma_plus(Params{10, 1, R}, 30.0));
    const TraceSummary b = summarize(gamma_plus(Params{10, 1, R}, 30.0, 2.0));
    if (a.degenerate || b.degenerate) continue;
    EXPECT_EQ(a.word, b.word) << R;
    compared += !a.word.empty();
  }
  EXPECT_GE(compared, 1);
}

TEST(TraceProperty, CountedChangesStrictlyInsideIntervals) {
  for (double R : {12.0, 15.0, 28.0}) {
    const TraceSummary s = summarize(gamma_plus(Params{10, 1, R}, 40.0));
    for (std::size_t i = 1; i < s.x_zeros.size(); ++i) EXPECT_LT(s.x_zeros[i - 1], s.x_zeros[i]);
    for (std::size_t j = 1; j < s.xprime_changes.size(); ++j)
      EXPECT_LT(s.xprime_changes[j - 1], s.xprime_changes[j]);
    int total = 0;
    for (std::size_t i = 0; i + 1 < s.x_zeros.size(); ++i) {
      int inside = 0;
      for (double tau : s.xprime_changes) inside += tau > s.x_zeros[i] && tau < s.x_zeros[i + 1];
      EXPECT_EQ(s.word[i], inside);
      total += s.word[i];
    }
    EXPECT_LE(total, static_cast<int>(s.xprime_changes.size()));
  }
}

TEST(TraceProperty, ClassificationStableUnderLongerHorizon) {
  for (double R : {1.5, 3.0, 6.0, 8.0, 8.5, 12.0, 100.0}) {
    ClassifyOptions shorter;
    shorter.horizon = 20.0;
    ClassifyOptions longer;
    longer.horizon = 80.0;
    const BranchClass a = classify_gamma_plus(Params{10, 1, R}, shorter);
    const BranchClass b = classify_gamma_plus(Params{10, 1, R}, longer);
    if (a.tag != BranchTag::Undetermined) EXPECT_EQ(a.tag, b.tag) << R;
  }
}
