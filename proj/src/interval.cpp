#include "lorenz/interval.hpp"

#include <ostream>

#include "lorenz/errors.hpp"

namespace lorenz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude FMA residuals may themselves be inexact.
constexpr double kTiny = 1e-290;

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

double two_sum_error(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

}  // namespace

double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return std::isnan(s) ? -kInf : s;
  return two_sum_error(a, b, s) < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return std::isnan(s) ? kInf : s;
  return two_sum_error(a, b, s) > 0.0 ? up(s) : s;
}

double mul_down(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return std::isnan(p) ? -kInf : p;
  if (std::abs(p) < kTiny) return p == 0.0 && (a == 0.0 || b == 0.0) ? 0.0 : down(p);
  return std::fma(a, b, -p) < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return std::isnan(p) ? kInf : p;
  if (std::abs(p) < kTiny) return p == 0.0 && (a == 0.0 || b == 0.0) ? 0.0 : up(p);
  return std::fma(a, b, -p) > 0.0 ? up(p) : p;
}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo <= hi)) throw LabError(ErrorCode::InvalidArgument, "interval requires lo <= hi");
}

double Interval::mid() const {
  if (lo_ == -hi_) return 0.0;
  const double m = 0.5 * lo_ + 0.5 * hi_;
  return std::clamp(m, lo_, hi_);
}

double Interval::width() const { return add_up(hi_, -lo_); }

double Interval::rad() const {
  const double m = mid();
  return std::max(add_up(hi_, -m), add_up(m, -lo_));
}

double Interval::mig() const { return contains_zero() ? 0.0 : std::min(std::abs(lo_), std::abs(hi_)); }

Interval Interval::hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
}

Interval Interval::symmetric(double r) {
  const double a = std::abs(r);
  return Interval(-a, a);
}

Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(add_down(a.lo(), b.lo()), add_up(a.hi(), b.hi()));
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval(add_down(a.lo(), -b.hi()), add_up(a.hi(), -b.lo()));
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
  if (a.is_point() && b.is_point()) {
    return Interval(std::min(mul_down(a.lo(), b.lo()), mul_up(a.lo(), b.lo())),
                    std::max(mul_down(a.lo(), b.lo()), mul_up(a.lo(), b.lo())));
  }
  const double c[4][2] = {{a.lo(), b.lo()}, {a.lo(), b.hi()}, {a.hi(), b.lo()}, {a.hi(), b.hi()}};
  double lo = kInf, hi = -kInf;
  for (const auto& p : c) {
    lo = std::min(lo, mul_down(p[0], p[1]));
    hi = std::max(hi, mul_up(p[0], p[1]));
  }
  return Interval(lo, hi);
}

Interval square(const Interval& a) {
  const double m = a.mig(), M = a.mag();
  return Interval(m == 0.0 ? 0.0 : mul_down(m, m), mul_up(M, M));
}

Interval sqrt(const Interval& a) {
  if (a.lo() < 0.0) throw LabError(ErrorCode::InvalidArgument, "sqrt of an interval with negative part");
  auto root_down = [](double v) {
    double r = std::sqrt(v);
    while (r > 0.0 && mul_up(r, r) > v) r = down(r);
    return r;
  };
  auto root_up = [](double v) {
    double r = std::sqrt(v);
    while (mul_down(r, r) < v) r = up(r);
    return r;
  };
  return Interval(root_down(a.lo()), root_up(a.hi()));
}

Interval abs(const Interval& a) { return Interval(a.mig(), a.mag()); }

bool operator==(const Interval& a, const Interval& b) { return a.lo() == b.lo() && a.hi() == b.hi(); }

std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << '[' << a.lo() << ", " << a.hi() << ']';
}

Box Box::point(const Eigen::Vector3d& p) { return Box(Interval(p(0)), Interval(p(1)), Interval(p(2))); }

Box Box::around(const Eigen::Vector3d& p, double radius) {
  const Interval r = Interval::symmetric(radius);
  return Box(Interval(p(0)) + r, Interval(p(1)) + r, Interval(p(2)) + r);
}

Eigen::Vector3d Box::mid() const { return {v(0).mid(), v(1).mid(), v(2).mid()}; }
Eigen::Vector3d Box::lower() const { return {v(0).lo(), v(1).lo(), v(2).lo()}; }
Eigen::Vector3d Box::upper() const { return {v(0).hi(), v(1).hi(), v(2).hi()}; }

double Box::width() const { return std::max({v(0).width(), v(1).width(), v(2).width()}); }

bool Box::contains(const Eigen::Vector3d& p) const {
  return v(0).contains(p(0)) && v(1).contains(p(1)) && v(2).contains(p(2));
}

bool Box::contains(const Box& o) const {
  return v(0).contains(o.v(0)) && v(1).contains(o.v(1)) && v(2).contains(o.v(2));
}

IMatrix3 to_interval(const Eigen::Matrix3d& m) { return m.cast<Interval>(); }
IVector3 to_interval(const Eigen::Vector3d& v) { return v.cast<Interval>(); }

Eigen::Matrix3d midpoint(const IMatrix3& m) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m(i, j).mid();
  return out;
}

double norm_inf_upper(const IMatrix3& m) {
  double best = 0.0;
  for (int i = 0; i < 3; ++i) {
    double row = 0.0;
    for (int j = 0; j < 3; ++j) row = add_up(row, m(i, j).mag());
    best = std::max(best, row);
  }
  return best;
}

}  // namespace lorenz
