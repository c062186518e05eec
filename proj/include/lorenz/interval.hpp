#pragma once

// Closed intervals with outward rounding. Each bound is computed in
// round-to-nearest and then corrected by the exact rounding error (TwoSum,
// FMA), so results are the tightest enclosures representable in double.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>

namespace lorenz {

class Interval {
 public:
  constexpr Interval() = default;
  constexpr Interval(double v) : lo_(v), hi_(v) {}  // NOLINT: implicit from point
  Interval(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const;
  double width() const;
  double rad() const;
  double mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }
  double mig() const;
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }
  bool is_point() const { return lo_ == hi_; }

  static Interval hull(const Interval& a, const Interval& b);
  /// Symmetric interval [-r, r].
  static Interval symmetric(double r);

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval square(const Interval& a);
/// Enclosure of the square root; requires a.lo() >= 0.
Interval sqrt(const Interval& a);
Interval abs(const Interval& a);

bool operator==(const Interval& a, const Interval& b);
inline bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }

std::ostream& operator<<(std::ostream& os, const Interval& a);

// Directed roundings of single operations.
double add_down(double a, double b);
double add_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);

}  // namespace lorenz

namespace Eigen {

template <>
struct NumTraits<lorenz::Interval> : NumTraits<double> {
  using Real = lorenz::Interval;
  using NonInteger = lorenz::Interval;
  using Nested = lorenz::Interval;
  using Literal = lorenz::Interval;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 4,
    MulCost = 8,
  };
};

}  // namespace Eigen

namespace lorenz {

using IVector3 = Eigen::Matrix<Interval, 3, 1>;
using IMatrix3 = Eigen::Matrix<Interval, 3, 3>;

/// Axis-aligned box; a thin wrapper giving names to the three components.
struct Box {
  IVector3 v;

  Box() : v(IVector3::Constant(Interval(0.0))) {}
  explicit Box(const IVector3& iv) : v(iv) {}
  Box(const Interval& x, const Interval& y, const Interval& z) { v << x, y, z; }

  static Box point(const Eigen::Vector3d& p);
  /// Centre plus or minus radius in every component.
  static Box around(const Eigen::Vector3d& p, double radius);

  const Interval& x() const { return v(0); }
  const Interval& y() const { return v(1); }
  const Interval& z() const { return v(2); }
  Eigen::Vector3d mid() const;
  Eigen::Vector3d lower() const;
  Eigen::Vector3d upper() const;
  /// Largest component width.
  double width() const;
  bool contains(const Eigen::Vector3d& p) const;
  bool contains(const Box& other) const;
};

IMatrix3 to_interval(const Eigen::Matrix3d& m);
IVector3 to_interval(const Eigen::Vector3d& v);
Eigen::Matrix3d midpoint(const IMatrix3& m);
/// Infinity norm upper bound of an interval matrix.
double norm_inf_upper(const IMatrix3& m);

}  // namespace lorenz
