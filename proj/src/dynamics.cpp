#include "lorenz/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lorenz {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "INVALID_PARAMS";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::BlowUp: return "BLOW_UP";
    case ErrorCode::StepUnderflow: return "STEP_UNDERFLOW";
    case ErrorCode::OutOfSpan: return "OUT_OF_SPAN";
    case ErrorCode::NoSignChange: return "NO_SIGN_CHANGE";
    case ErrorCode::EmptyIntersection: return "EMPTY_INTERSECTION";
    case ErrorCode::MissingCheckpoint: return "MISSING_CHECKPOINT";
    case ErrorCode::SameClassAtEndpoints: return "SAME_CLASS_AT_ENDPOINTS";
    case ErrorCode::Unresolved: return "UNRESOLVED";
    case ErrorCode::NoCrossing: return "NO_CROSSING";
    case ErrorCode::ConditionAFailed: return "CONDITION_A_FAILED";
    case ErrorCode::AnchorNotFound: return "ANCHOR_NOT_FOUND";
    case ErrorCode::HorizonExhausted: return "HORIZON_EXHAUSTED";
    case ErrorCode::ValidationFailed: return "VALIDATION_FAILED";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

void Params::validate() const {
  if (!std::isfinite(s) || !std::isfinite(q) || !std::isfinite(R)) {
    throw LabError(ErrorCode::InvalidParams, "parameters must be finite");
  }
  if (s <= 0.0 || q <= 0.0) {
    throw LabError(ErrorCode::InvalidParams, "s and q must be positive");
  }
  if (R <= 1.0) {
    std::ostringstream os;
    os << "R must exceed 1 (got " << R << ")";
    throw LabError(ErrorCode::InvalidParams, os.str());
  }
}

bool operator==(const Params& a, const Params& b) {
  return a.s == b.s && a.q == b.q && a.R == b.R;
}

EquilibriumSet equilibria(const Params& params) {
  params.validate();
  const double c = std::sqrt(params.q * (params.R - 1.0));
  EquilibriumSet eq;
  eq.origin = State::Zero();
  eq.p0 = State(c, c, params.R - 1.0);
  eq.p0_mirror = State(-c, -c, params.R - 1.0);
  return eq;
}

UnstableEigenpair unstable_eigenpair(const Params& params) {
  params.validate();
  const double s = params.s;
  const double b = s + 1.0;
  const double lambda = 0.5 * (-b + std::sqrt(b * b + 4.0 * s * (params.R - 1.0)));
  // First row of (J - lambda I) v = 0 on the (x, y) block: -s vx + s vy = lambda vx.
  State v(s, lambda + s, 0.0);
  v.normalize();
  return {lambda, v};
}

LinearizationReport linearize(const State& at, const Params& params) {
  LinearizationReport report;
  report.jacobian = jacobian(at, params);
  Eigen::EigenSolver<Eigen::Matrix3d> solver(report.jacobian, true);
  const auto values = solver.eigenvalues();
  int unstable_count = 0;
  int unstable_index = -1;
  for (int i = 0; i < 3; ++i) {
    report.eigenvalues[static_cast<std::size_t>(i)] = values(i);
    if (values(i).real() > 0.0) {
      ++unstable_count;
      unstable_index = i;
    }
  }
  if (unstable_count == 1 && std::abs(values(unstable_index).imag()) == 0.0) {
    State v = solver.eigenvectors().col(unstable_index).real();
    v.normalize();
    if (v(0) < 0.0) v = -v;
    report.unstable_eigenvector = v;
  }
  return report;
}

std::array<double, 3> characteristic_cubic(const Eigen::Matrix3d& J) {
  const double trace = J.trace();
  const double minors = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0) +
                        J(0, 0) * J(2, 2) - J(0, 2) * J(2, 0) +
                        J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
  return {-trace, minors, -J.determinant()};
}

bool complex_pair_at_p0(const Params& params) {
  const auto eq = equilibria(params);
  const Eigen::Matrix3d J = jacobian(eq.p0, params);
  const Eigen::Vector3cd values = Eigen::EigenSolver<Eigen::Matrix3d>(J, false).eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (int i = 0; i < 3; ++i) {
    if (std::abs(values(i).imag()) > 1e-12 * scale) return true;
  }
  return false;
}

std::pair<double, double> monitor_S_Q(const State& p) {
  const double x = p(0), y = p(1), z = p(2);
  return {0.5 * (y * y + z * z) - 50.0 * x * x, z - x * x / 20.0};
}

std::pair<double, double> m_cap_e_extent(const Params& params) {
  const double R = params.R;
  const double k = kEllipsoidCoefficient;
  const double radicand = (4.0 * k * R * R - k * (R + 1.0) * (R + 1.0)) / (R + k);
  if (!(radicand > 0.0)) {
    throw LabError(ErrorCode::EmptyIntersection, "line M does not meet the ellipsoid E");
  }
  const double xi = std::sqrt(radicand);
  return {-xi, xi};
}

State point_on_M(double xi, const Params& params) { return State(xi, xi, params.R - 1.0); }

double Segment::distance(const State& p) const {
  const State d = head_ - tail_;
  const double len2 = d.squaredNorm();
  double alpha = 0.0;
  if (len2 > 0.0) alpha = std::clamp((p - tail_).dot(d) / len2, 0.0, 1.0);
  return (p - point(alpha)).norm();
}

Geometry Geometry::from_p1(const Params& params, const State& p1) {
  const auto eq = equilibria(params);
  return Geometry{params, eq.p0, p1, Segment(eq.p0, p1)};
}

bool Geometry::on_M(const State& p, double tol) const {
  return std::abs(p(0) - p(1)) <= tol && std::abs(p(2) - (params.R - 1.0)) <= tol;
}

std::optional<TrappingRegion> trapping_region_at_p0(const Params& params) {
  const auto eq = equilibria(params);
  const Eigen::Matrix3d J = jacobian(eq.p0, params);
  const Eigen::Vector3cd values = Eigen::EigenSolver<Eigen::Matrix3d>(J, false).eigenvalues();
  if (values.real().maxCoeff() >= 0.0) return std::nullopt;

  // Lyapunov equation J^T P + P J = -I through its Kronecker form.
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 9, 9> K;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      K.block<3, 3>(3 * i, 3 * j) = I(i, j) * J.transpose() + J(j, i) * I;
    }
  }
  Eigen::Matrix<double, 9, 1> rhs_vec;
  Eigen::Map<Eigen::Matrix3d>(rhs_vec.data()) = -I;
  const Eigen::Matrix<double, 9, 1> sol = K.fullPivLu().solve(rhs_vec);
  Eigen::Matrix3d P = Eigen::Map<const Eigen::Matrix3d>(sol.data());
  P = 0.5 * (P + P.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(P);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0)) return std::nullopt;

  // The quadratic part g(u) = (0, -ux uz, ux uy) obeys |g| <= |u|^2 / 2, so
  // dV/dt <= -|u|^2 + |P| |u|^3, negative for |u| < 1/|P|.
  const double positivity = std::min(eq.p0(0), eq.p0(2));
  const double radius = 0.9 * std::min(1.0 / lmax, positivity);
  TrappingRegion region;
  region.P = P;
  region.radius = radius;
  region.level = lmin * radius * radius;
  return region;
}

}  // namespace lorenz
