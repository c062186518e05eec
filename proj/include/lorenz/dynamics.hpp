#pragma once

// The Lorenz family x' = s(y - x), y' = Rx - y - xz, z' = xy - qz together
// with its equilibria, linearizations and the fixed geometric objects used by
// the shooting analysis.

#include <array>
#include <complex>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "lorenz/errors.hpp"

namespace lorenz {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using State = Vector3<double>;

struct Params {
  double s = 10.0;
  double q = 1.0;
  double R = 12.0;

  /// Throws InvalidParams unless s > 0, q > 0, R > 1 and all are finite.
  void validate() const;
};

bool operator==(const Params& a, const Params& b);

/// Vector field. Templated so that the same expression serves double and
/// interval evaluation.
template <typename Scalar>
Vector3<Scalar> rhs(const Vector3<Scalar>& p, const Params& params) {
  const Scalar& x = p(0);
  const Scalar& y = p(1);
  const Scalar& z = p(2);
  Vector3<Scalar> out;
  out(0) = params.s * (y - x);
  out(1) = params.R * x - y - x * z;
  out(2) = x * y - params.q * z;
  return out;
}

template <typename Scalar>
Matrix3<Scalar> jacobian(const Vector3<Scalar>& p, const Params& params) {
  const Scalar zero(0.0);
  const Scalar one(1.0);
  Matrix3<Scalar> J;
  J(0, 0) = Scalar(-params.s);
  J(0, 1) = Scalar(params.s);
  J(0, 2) = zero;
  J(1, 0) = params.R - p(2);
  J(1, 1) = -one;
  J(1, 2) = -p(0);
  J(2, 0) = p(1);
  J(2, 1) = p(0);
  J(2, 2) = Scalar(-params.q);
  return J;
}

/// Second time derivative along the flow, D f(p) f(p).
template <typename Scalar>
Vector3<Scalar> second_derivative(const Vector3<Scalar>& p,
                                  const Params& params) {
  const Vector3<Scalar> f = rhs(p, params);
  const Matrix3<Scalar> J = jacobian(p, params);
  Vector3<Scalar> out;
  for (int i = 0; i < 3; ++i) {
    out(i) = J(i, 0) * f(0) + J(i, 1) * f(1) + J(i, 2) * f(2);
  }
  return out;
}

struct EquilibriumSet {
  State origin;
  State p0;
  State p0_mirror;
};

/// Closed-form equilibria. Throws InvalidParams when R <= 1.
EquilibriumSet equilibria(const Params& params);

struct UnstableEigenpair {
  double eigenvalue = 0.0;
  State eigenvector = State::Zero();
};

/// Unstable eigenpair of the origin; the eigenvector is unit length, has a zero
/// z-component and positive x and y components.
UnstableEigenpair unstable_eigenpair(const Params& params);

struct LinearizationReport {
  Eigen::Matrix3d jacobian;
  std::array<std::complex<double>, 3> eigenvalues;
  std::optional<State> unstable_eigenvector;
};

LinearizationReport linearize(const State& at, const Params& params);

/// Coefficients (a, b, c) of det(lambda I - J) = lambda^3 + a lambda^2 + b lambda + c.
std::array<double, 3> characteristic_cubic(const Eigen::Matrix3d& J);

/// True iff the Jacobian at p0 has a non-real conjugate eigenvalue pair.
bool complex_pair_at_p0(const Params& params);

// Trapping ellipsoid E: V(p) <= 40 R with the literal coefficient 10.
inline constexpr double kEllipsoidCoefficient = 10.0;

template <typename Scalar>
Scalar ellipsoid_value(const Vector3<Scalar>& p, double R) {
  const double c = kEllipsoidCoefficient / R;
  const Scalar dz = p(2) - 2.0 * R;
  return p(0) * p(0) + c * (p(1) * p(1)) + c * (dz * dz);
}

inline double ellipsoid_level(double R) { return 4.0 * kEllipsoidCoefficient * R; }

template <typename Scalar>
Scalar ellipsoid_value(const Vector3<Scalar>& p, const Params& params) {
  return ellipsoid_value(p, params.R);
}

/// Auxiliary monitors S = (y^2 + z^2)/2 - 50 x^2 and Q = z - x^2/20.
std::pair<double, double> monitor_S_Q(const State& p);

/// Extent of the line M = {x = y, z = R - 1} inside E, as the range of the
/// common x = y coordinate. Throws EmptyIntersection when M misses E.
std::pair<double, double> m_cap_e_extent(const Params& params);

/// Point of M with x = y = xi.
State point_on_M(double xi, const Params& params);

/// Closed segment alpha -> alpha * head + (1 - alpha) * tail.
class Segment {
 public:
  Segment() = default;
  Segment(const State& head, const State& tail) : head_(head), tail_(tail) {}

  State point(double alpha) const { return alpha * head_ + (1.0 - alpha) * tail_; }
  const State& head() const { return head_; }
  const State& tail() const { return tail_; }
  double distance(const State& p) const;

 private:
  State head_ = State::Zero();
  State tail_ = State::Zero();
};

/// Shooting geometry: p0, the first plane crossing p1 of the unstable branch,
/// and the segment L between them.
struct Geometry {
  Params params;
  State p0;
  State p1;
  Segment L;

  static Geometry from_p1(const Params& params, const State& p1);
  bool on_M(const State& p, double tol = 1e-12) const;
};

/// Quadratic Lyapunov certificate around p0: inside {u^T P u < level} with
/// u = p - p0 every solution stays in the positive octant and tends to p0.
struct TrappingRegion {
  Eigen::Matrix3d P;
  double level = 0.0;
  double radius = 0.0;

  double value(const State& p, const State& p0) const {
    const State u = p - p0;
    return u.dot(P * u);
  }
};

/// Empty when p0 is not linearly stable.
std::optional<TrappingRegion> trapping_region_at_p0(const Params& params);

}  // namespace lorenz
