#include "lorenz/validated.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace lorenz {

namespace {

IVector3 eval(const Eigen::Vector3d& x, const Eigen::Matrix3d& C, const IVector3& r0,
              const Eigen::Matrix3d& B, const IVector3& r) {
  return to_interval(x) + to_interval(C) * r0 + to_interval(B) * r;
}

IVector3 inflate(const IVector3& v, double factor) {
  IVector3 out;
  for (int i = 0; i < 3; ++i) {
    const double w = factor * v(i).width() + 1e-15 * (1.0 + v(i).mag()) + 1e-300;
    out(i) = v(i) + Interval::symmetric(w);
  }
  return out;
}

bool box_contains(const IVector3& outer, const IVector3& inner) {
  for (int i = 0; i < 3; ++i) {
    if (!outer(i).contains(inner(i))) return false;
  }
  return true;
}

/// Picard validation: W with X + [0, h] f(W) inside W. Returns the tighter
/// image X + [0, h] f(W) on success.
std::optional<IVector3> apriori_box(const IVector3& X, double h, const Params& params,
                                    const EnclosureOptions& opts) {
  const Interval H(std::min(0.0, h), std::max(0.0, h));
  IVector3 W = X + H * rhs(X, params);
  for (int k = 0; k < opts.picard_iterations; ++k) {
    const IVector3 Wi = inflate(W, opts.inflation);
    const IVector3 N = X + H * rhs(Wi, params);
    if (box_contains(Wi, N)) return N;
    W = N;
  }
  return std::nullopt;
}

/// Enclosure of the inverse of a nearly orthogonal Q: Q^T + [-e, e].
IMatrix3 orthogonal_inverse(const Eigen::Matrix3d& Q) {
  const IMatrix3 Qi = to_interval(Q);
  const IMatrix3 E = IMatrix3::Identity() - IMatrix3(Qi.transpose() * Qi);
  const double delta = norm_inf_upper(E);
  const IMatrix3 Qt = Qi.transpose();
  if (!(delta < 0.5)) throw LabError(ErrorCode::ValidationFailed, "QR factor far from orthogonal");
  const double e = mul_up(delta / (1.0 - delta) * (1.0 + 1e-14), norm_inf_upper(Qt));
  IMatrix3 out = Qt;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = Qt(i, j) + Interval::symmetric(e);
  return out;
}

Eigen::Vector3d radii(const IVector3& r) { return {r(0).rad(), r(1).rad(), r(2).rad()}; }

}  // namespace

Box interval_rhs(const Box& box, const Params& params) { return Box(rhs(box.v, params)); }

std::string_view to_string(EnclosureMode mode) {
  return mode == EnclosureMode::Lohner ? "lohner" : "naive";
}

std::string_view to_string(SegmentVerdict v) {
  return v == SegmentVerdict::Certified2A ? "CERTIFIED_2A" : "INCONCLUSIVE";
}

EnclosureRun enclose_flow(const Box& start, const Params& params, double t_span, double step,
                          const EnclosureOptions& opts, const EnclosureObserver& observer) {
  const Eigen::Vector3d c = start.mid();
  IVector3 r0 = start.v - to_interval(c);
  return enclose_flow(c, Eigen::Matrix3d::Identity(), r0, params, t_span, step, opts, observer);
}

EnclosureRun enclose_flow(const Eigen::Vector3d& centre, const Eigen::Matrix3d& C0,
                          const IVector3& r0_in, const Params& params, double t_span, double step,
                          const EnclosureOptions& opts, const EnclosureObserver& observer) {
  params.validate();
  if (!(step > 0.0) || !std::isfinite(t_span)) {
    throw LabError(ErrorCode::InvalidArgument, "enclosure needs step > 0 and a finite span");
  }
  EnclosureRun run;
  run.params = params;
  run.mode = opts.mode;

  Eigen::Vector3d xhat = centre;
  Eigen::Matrix3d C = C0;
  IVector3 r0 = r0_in;
  Eigen::Matrix3d B = Eigen::Matrix3d::Identity();
  IVector3 r = IVector3::Constant(Interval(0.0));
  if (opts.mode == EnclosureMode::Naive) {
    // Fold the initial set into a single box.
    r = to_interval(C) * r0;
    C.setZero();
    r0 = IVector3::Constant(Interval(0.0));
  }

  const Box initial(eval(xhat, C, r0, B, r));
  run.steps.push_back({0.0, 0.0, initial, initial});
  run.initial_width = initial.width();

  const double dir = t_span >= 0.0 ? 1.0 : -1.0;
  const double span = std::abs(t_span);
  double t = 0.0;
  double h_mag = std::min(step, span);
  while (span - std::abs(t) > 1e-14 * std::max(1.0, span)) {
    h_mag = std::min(h_mag, span - std::abs(t));
    const IVector3 X = eval(xhat, C, r0, B, r);
    std::optional<IVector3> W;
    int tries = 0;
    while (!(W = apriori_box(X, dir * h_mag, params, opts))) {
      if (++tries > opts.max_halvings) {
        throw LabError(ErrorCode::ValidationFailed,
                       "a-priori box not validated at t = " + std::to_string(dir * std::abs(t)));
      }
      h_mag *= 0.5;
      ++run.halvings;
    }
    const double h = dir * h_mag;
    const Interval hi(h);
    const Interval half_h2 = Interval(0.5) * hi * hi;

    const IVector3 rem = half_h2 * second_derivative(*W, params);
    const IVector3 P = to_interval(xhat) + hi * rhs(to_interval(xhat), params);
    const IMatrix3 M = IMatrix3::Identity() + hi * jacobian(X, params);
    const IVector3 PR = P + rem;
    const Eigen::Vector3d xhat_new(PR(0).mid(), PR(1).mid(), PR(2).mid());
    const IVector3 z0 = PR - to_interval(xhat_new);

    if (opts.mode == EnclosureMode::Naive) {
      r = M * r + z0;
    } else {
      const Eigen::Matrix3d Mm = midpoint(M);
      const Eigen::Matrix3d C_new = Mm * C;
      const IVector3 z = z0 + IMatrix3(M * to_interval(C) - to_interval(C_new)) * r0;
      const IMatrix3 MB = M * to_interval(B);
      // Orthogonalize with the longest error directions first.
      Eigen::Matrix3d A = Mm * B;
      const Eigen::Vector3d rr = radii(r);
      std::array<int, 3> order{0, 1, 2};
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return A.col(a).norm() * rr(a) > A.col(b).norm() * rr(b);
      });
      Eigen::Matrix3d Ap;
      for (int k = 0; k < 3; ++k) Ap.col(k) = A.col(order[static_cast<std::size_t>(k)]);
      Eigen::HouseholderQR<Eigen::Matrix3d> qr(Ap);
      const Eigen::Matrix3d Q = qr.householderQ();
      const IMatrix3 Qinv = orthogonal_inverse(Q);
      r = IMatrix3(Qinv * MB) * r + Qinv * z;
      B = Q;
      C = C_new;
    }
    xhat = xhat_new;
    t += h;
    EnclosureStep st{t, h, Box(eval(xhat, C, r0, B, r)), Box(*W)};
    if (!std::isfinite(st.box.width())) {
      throw LabError(ErrorCode::ValidationFailed,
                     "enclosure overflowed at t = " + std::to_string(t));
    }
    run.steps.push_back(st);
    if (observer && !observer(st)) {
      run.stopped_early = true;
      break;
    }
    h_mag = step;
  }

  run.final_width = run.final_box().width();
  run.elapsed = std::abs(t);
  const double floor = std::numeric_limits<double>::epsilon() * std::max(1.0, centre.cwiseAbs().maxCoeff());
  const double base = std::max(run.initial_width, floor);
  run.digits_lost_per_unit =
      run.elapsed > 0.0 ? std::log10(std::max(run.final_width, base) / base) / run.elapsed : 0.0;
  return run;
}

double distance_lower_bound(const Box& box, const Segment& L) {
  double lb = 0.0;
  if (L.head()(0) == L.head()(1) && L.tail()(0) == L.tail()(1)) {
    // L lies in the plane x = y.
    const Interval d = box.y() - box.x();
    lb = d.mig() / std::sqrt(2.0) * (1.0 - 1e-12);
  }
  // Gap to the bounding box of L (an infinity-norm bound, hence Euclidean).
  for (int i = 0; i < 3; ++i) {
    const double lo = std::min(L.head()(i), L.tail()(i));
    const double hi = std::max(L.head()(i), L.tail()(i));
    const double gap = std::max({0.0, add_down(box.v(i).lo(), -hi), add_down(lo, -box.v(i).hi())});
    lb = std::max(lb, gap);
  }
  return lb;
}

Interval ellipsoid_enclosure(const Box& box, double R) {
  // Division is correctly rounded, so one ulp either way encloses c / R.
  const double c = kEllipsoidCoefficient / R;
  const Interval k(std::nextafter(c, 0.0), std::nextafter(c, std::numeric_limits<double>::infinity()));
  const Interval dz = box.z() - Interval(2.0) * Interval(R);
  return square(box.x()) + k * square(box.y()) + k * square(dz);
}

SegmentCertificate certify_condition_b_segment(const Interval& xi_interval, const Geometry& geometry,
                                               double back_span, const SegmentCertifyOptions& opts) {
  const Params& params = geometry.params;
  const double x0 = geometry.p0(0);
  if (xi_interval.contains(x0) || xi_interval.contains(-x0)) {
    throw LabError(ErrorCode::InvalidArgument,
                   "xi interval contains an equilibrium; the constant solution is excluded");
  }
  SegmentCertificate cert;
  cert.xi = xi_interval;
  const double m = xi_interval.mid();
  const Eigen::Vector3d centre(m, m, params.R - 1.0);
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 0) = 1.0;
  C(1, 0) = 1.0;
  IVector3 r0 = IVector3::Constant(Interval(0.0));
  r0(0) = xi_interval - Interval(m);

  const Interval level(4.0 * kEllipsoidCoefficient * params.R);
  cert.min_distance_lb = std::numeric_limits<double>::infinity();
  bool too_close = false;
  const double span = std::abs(back_span);
  auto observer = [&](const EnclosureStep& st) {
    const double d = distance_lower_bound(st.apriori, geometry.L);
    cert.min_distance_lb = std::min(cert.min_distance_lb, d);
    if (!(d > opts.ell_tol)) {
      too_close = true;
      return false;
    }
    if (ellipsoid_enclosure(st.box, params.R).lo() > level.hi()) {
      cert.t_exit = st.t;
      return false;
    }
    return true;
  };
  EnclosureRun run;
  try {
    run = enclose_flow(centre, C, r0, params, -span, opts.step, opts.enclosure, observer);
  } catch (const LabError& e) {
    if (e.code() != ErrorCode::ValidationFailed) throw;
    cert.reason = e.what();
    return cert;
  }
  cert.steps = run.steps.size() - 1;
  cert.final_width = run.final_width;
  if (too_close) {
    cert.reason = "an enclosure came within ell_tol of L";
  } else if (cert.t_exit) {
    cert.verdict = SegmentVerdict::Certified2A;
    cert.reason = "final box outside E";
  } else {
    cert.reason = "back_span exhausted before the enclosure left E";
  }
  return cert;
}

}  // namespace lorenz
