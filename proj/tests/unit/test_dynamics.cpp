#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lorenz/dynamics.hpp"
#include "lorenz/integrator.hpp"

using namespace lorenz;

namespace {

// Discriminant of lambda^3 + a lambda^2 + b lambda + c; negative iff there is a
// non-real pair.
double cubic_discriminant(double a, double b, double c) {
  return 18.0 * a * b * c - 4.0 * a * a * a * c + a * a * b * b - 4.0 * b * b * b - 27.0 * c * c;
}

// Coefficients of det(lambda I - J) for the Jacobian at p0, expanded by hand.
std::array<double, 3> cubic_at_p0(const Params& p) {
  const double a = p.s + p.q + 1.0;
  const double b = p.q * (p.s + p.R);
  const double c = 2.0 * p.s * p.q * (p.R - 1.0);
  return {a, b, c};
}

Params random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(0.5, 20.0), q(0.2, 5.0), r(1.01, 200.0);
  return {s(rng), q(rng), r(rng)};
}

}  // namespace

TEST(Rhs, OriginIsEquilibrium) {
  const State f = rhs(State(0, 0, 0), Params{10, 1, 12});
  EXPECT_EQ(f, State(0, 0, 0));
}

TEST(Rhs, VanishesAtP0) {
  const double x = std::sqrt(11.0);
  const State f = rhs(State(x, x, 11.0), Params{10, 1, 12});
  EXPECT_LT(f.norm(), 1e-12);
}

TEST(Rhs, HandSubstitution) {
  EXPECT_EQ(rhs(State(1, 0, 0), Params{10, 1, 12}), State(-10, 12, 0));
}

TEST(Jacobian, AtOrigin) {
  Eigen::Matrix3d expected;
  expected << -10, 10, 0, 12, -1, 0, 0, 0, -1;
  EXPECT_EQ(jacobian(State(0, 0, 0), Params{10, 1, 12}), expected);
}

TEST(Jacobian, ThirdColumnDependsOnXAndQOnly) {
  const Params p{10, 2.5, 12};
  const Eigen::Matrix3d J = jacobian(State(1.5, -2.0, 7.0), p);
  EXPECT_EQ(J(0, 2), 0.0);
  EXPECT_EQ(J(1, 2), -1.5);
  EXPECT_EQ(J(2, 2), -2.5);
}

TEST(Jacobian, MatchesCentralDifferences) {
  const Params p{10, 1, 12};
  const State at(1, 2, 3);
  const double h = 1e-6;
  const Eigen::Matrix3d J = jacobian(at, p);
  for (int j = 0; j < 3; ++j) {
    State e = State::Zero();
    e(j) = h;
    const State col = (rhs<double>(at + e, p) - rhs<double>(at - e, p)) / (2.0 * h);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(J(i, j), col(i), 1e-6);
  }
}

TEST(Equilibria, ClosedFormAtR12) {
  const auto eq = equilibria(Params{10, 1, 12});
  EXPECT_NEAR(eq.p0(0), 3.3166247903554, 1e-12);
  EXPECT_EQ(eq.p0(0), eq.p0(1));
  EXPECT_EQ(eq.p0(2), 11.0);
  EXPECT_EQ(eq.p0_mirror, State(-eq.p0(0), -eq.p0(1), 11.0));
  EXPECT_EQ(eq.origin, State::Zero());
}

TEST(Equilibria, ZIsRMinusOne) {
  EXPECT_EQ(equilibria(Params{10, 8.0 / 3.0, 28}).p0(2), 27.0);
}

TEST(Equilibria, NearDegenerateLimit) {
  const auto eq = equilibria(Params{10, 1, 1 + 1e-9});
  EXPECT_LT(eq.p0.norm(), 1e-4);
}

TEST(Equilibria, RejectsRAtMostOne) {
  try {
    equilibria(Params{10, 1, 1});
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParams);
  }
}

TEST(UnstableEigenpair, ClosedFormAtR12) {
  const auto ep = unstable_eigenpair(Params{10, 1, 12});
  EXPECT_NEAR(ep.eigenvalue, (-11.0 + std::sqrt(561.0)) / 2.0, 1e-12);
  EXPECT_NEAR(ep.eigenvalue, 6.34272, 1e-5);
  EXPECT_NEAR(ep.eigenvector.norm(), 1.0, 1e-14);
  EXPECT_EQ(ep.eigenvector(2), 0.0);
  EXPECT_GT(ep.eigenvector(0), 0.0);
  EXPECT_GT(ep.eigenvector(1), 0.0);
  const Eigen::Matrix3d J = jacobian(State(0, 0, 0), Params{10, 1, 12});
  EXPECT_LT((J * ep.eigenvector - ep.eigenvalue * ep.eigenvector).norm(), 1e-10);
}

TEST(UnstableEigenpair, RejectsBoundary) {
  EXPECT_THROW(unstable_eigenpair(Params{10, 1, 1}), LabError);
}

TEST(ComplexPair, AgreesWithDiscriminant) {
  for (const Params& p : {Params{10, 8.0 / 3.0, 28}, Params{10, 1, 12}}) {
    const auto [a, b, c] = cubic_at_p0(p);
    EXPECT_LT(cubic_discriminant(a, b, c), 0.0);
    EXPECT_TRUE(complex_pair_at_p0(p));
  }
}

TEST(ComplexPair, RealSpectrumNearOnset) {
  const Params p{10, 1, 1.0001};
  const auto [a, b, c] = cubic_at_p0(p);
  EXPECT_GT(cubic_discriminant(a, b, c), 0.0);
  EXPECT_FALSE(complex_pair_at_p0(p));
}

TEST(CharacteristicCubic, MatchesHandExpansion) {
  const Params p{10, 8.0 / 3.0, 28};
  const auto coeffs = characteristic_cubic(jacobian(equilibria(p).p0, p));
  const auto expected = cubic_at_p0(p);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(coeffs[i], expected[i], 1e-10 * std::abs(expected[i]));
}

TEST(Ellipsoid, OriginOnBoundaryCentreAtZero) {
  EXPECT_DOUBLE_EQ(ellipsoid_value(State(0, 0, 0), 12.0), 480.0);
  EXPECT_EQ(ellipsoid_value(State(0, 0, 24), 12.0), 0.0);
}

TEST(Ellipsoid, P0Inside) {
  const Params p{10, 1, 12};
  const double v = ellipsoid_value(equilibria(p).p0, p);
  EXPECT_NEAR(v, 11.0 + 10.0 / 12.0 * 11.0 + 10.0 / 12.0 * 169.0, 1e-9);
  EXPECT_LT(v, ellipsoid_level(12.0));
}

TEST(MonitorSQ, Values) {
  const auto [s0, q0] = monitor_S_Q(State(0, 0, 0));
  EXPECT_EQ(s0, 0.0);
  EXPECT_EQ(q0, 0.0);
  const auto [s, q] = monitor_S_Q(State(0.1, 1, 0.05));
  EXPECT_NEAR(s, 0.00125, 1e-15);
  EXPECT_NEAR(q, 0.0495, 1e-15);
}

TEST(MonitorSQ, QPositiveAboveParabola) {
  const State p(0.0956, 1.0, 0.0956 * 0.0956 / 20.0 + 1e-6);
  EXPECT_GT(monitor_S_Q(p).second, 0.0);
}

TEST(MCapE, ExtentAtR12) {
  const auto [lo, hi] = m_cap_e_extent(Params{10, 1, 12});
  EXPECT_NEAR(hi, std::sqrt(4070.0 / 22.0), 1e-12);
  EXPECT_NEAR(hi, 13.602, 1e-3);
  EXPECT_EQ(lo, -hi);
  const double v0 = ellipsoid_value(point_on_M(0.0, Params{10, 1, 12}), 12.0);
  EXPECT_NEAR(v0, 10.0 / 12.0 * 169.0, 1e-9);
  EXPECT_LT(v0, 480.0);
}

TEST(MCapE, EmptyWhenRadicandNegative) {
  // 40 R^2 - 10 (R + 1)^2 < 0 exactly when R < 1.
  try {
    m_cap_e_extent(Params{10, 1, 0.5});
    FAIL();
  } catch (const LabError& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyIntersection);
  }
}

TEST(Geometry, SegmentAndLine) {
  const Params p{10, 1, 12};
  const State p1(5.0, 5.0, 14.0);
  const Geometry g = Geometry::from_p1(p, p1);
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    const State x = g.L.point(a);
    EXPECT_EQ(x(0), x(1));
  }
  EXPECT_TRUE(g.on_M(g.p0));
  EXPECT_FALSE(g.on_M(g.L.point(0.5)));
  EXPECT_NEAR(g.L.distance(g.L.point(0.3)), 0.0, 1e-12);
}

TEST(DynamicsProperty, EquilibriaResidualRandomParams) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Params p = random_params(rng);
    const auto eq = equilibria(p);
    for (const State& e : {eq.origin, eq.p0, eq.p0_mirror}) {
      EXPECT_LT(rhs(e, p).norm(), 1e-12) << p.s << ' ' << p.q << ' ' << p.R;
    }
  }
}

TEST(DynamicsProperty, EigenEquationRandomParams) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Params p = random_params(rng);
    const auto ep = unstable_eigenpair(p);
    EXPECT_GT(ep.eigenvalue, 0.0);
    const Eigen::Matrix3d J = jacobian(State(0, 0, 0), p);
    EXPECT_LT((J * ep.eigenvector - ep.eigenvalue * ep.eigenvector).norm(), 1e-10);
  }
}

TEST(DynamicsProperty, EllipsoidClosedFormPoints) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(1.01, 500.0);
  for (int i = 0; i < 200; ++i) {
    const double R = r(rng);
    EXPECT_EQ(ellipsoid_value(State(0, 0, 2 * R), R), 0.0);
    EXPECT_NEAR(ellipsoid_value(State(0, 0, 0), R), 40.0 * R, 1e-12 * 40.0 * R);
  }
}

TEST(DynamicsProperty, MCapEEndpointsOnBoundary) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(2.0, 500.0);
  for (int i = 0; i < 200; ++i) {
    const Params p{10, 1, r(rng)};
    const auto [lo, hi] = m_cap_e_extent(p);
    for (double xi : {lo, hi}) {
      const double v = ellipsoid_value(point_on_M(xi, p), p.R);
      EXPECT_NEAR(v / ellipsoid_level(p.R), 1.0, 1e-9);
    }
  }
}

TEST(DynamicsProperty, JacobianFiniteDifferencesRandomStates) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const Params p{10, 8.0 / 3.0, 28};
  const double h = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const State at(u(rng), u(rng), u(rng) + 20.0);
    const Eigen::Matrix3d J = jacobian(at, p);
    for (int j = 0; j < 3; ++j) {
      State e = State::Zero();
      e(j) = h;
      const State col = (rhs<double>(at + e, p) - rhs<double>(at - e, p)) / (2.0 * h);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(J(i, j), col(i), 1e-6);
    }
  }
}

TEST(DynamicsProperty, EllipsoidInvariance) {
  const Params p{10, 1, 12};
  const double level = ellipsoid_level(p.R);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Axis half-lengths of E: sqrt(40 R) in x and sqrt(4 R^2) in y and z.
  const double ax = std::sqrt(level), ayz = 2.0 * p.R;
  IntegratorConfig cfg;
  cfg.t_max = 50.0;
  int started = 0;
  while (started < 1000) {
    const State start(ax * u(rng), ayz * u(rng), 2.0 * p.R + ayz * u(rng));
    if (!(ellipsoid_value(start, p.R) < level)) continue;
    ++started;
    const Trajectory tr = integrate(start, p, cfg, {});
    ASSERT_TRUE(tr.ok());
    double worst = 0.0;
    for (const State& s : tr.states) worst = std::max(worst, ellipsoid_value(s, p.R));
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      for (int k = 1; k < 8; ++k) {
        const double t = tr.times[i] + (tr.times[i + 1] - tr.times[i]) * k / 8.0;
        worst = std::max(worst, ellipsoid_value(tr.steps[i].evaluate(t), p.R));
      }
    }
    EXPECT_LE(worst, level * (1.0 + 1e-6)) << start.transpose();
  }
}
