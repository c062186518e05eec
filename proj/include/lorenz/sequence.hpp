#pragma once

// Shooting along the segment L from p1 to p0 for prescribed words of
// sign-change counts between consecutive zeros of x.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lorenz/conditions.hpp"

namespace lorenz {

struct TargetWord {
  std::vector<int> letters;

  /// Parses a string over {1, 3}; throws InvalidArgument otherwise.
  static TargetWord parse(std::string_view text);
  void validate() const;
  std::string str() const;
  std::size_t size() const { return letters.size(); }
};

/// alpha * p0 + (1 - alpha) * p1. Throws InvalidArgument outside [0, 1].
State point_on_L(double alpha, const Geometry& geometry);

/// Data read off the trajectory started at point_on_L(alpha).
struct AlphaSample {
  double alpha = 0.0;
  int step = 0;
  double horizon = 0.0;
  TraceSummary summary;
  bool ok = true;

  /// k-th positive zero of x (1-based), if seen.
  std::optional<double> t(int k) const;
  /// sigma_k, the count on (t_k, t_{k+1}); open tail counts are lower bounds.
  std::optional<int> sigma(int k) const;
  bool sigma_closed(int k) const;
  /// sigma_k >= 4 established (closed, or at least four changes on the open tail).
  bool sigma_at_least_four(int k) const;
};

struct ShootConfig {
  IntegratorConfig integrator;
  int grid = 64;
  int first_grid = 128;
  int max_refine_rounds = 10;
  int max_samples_per_step = 1500;
  double jump_tol = 5.0;
  double alpha_resolution = 1e-12;
  double horizon_base = 30.0;
  double horizon_per_letter = 15.0;
  /// Witness re-verified with both tolerances divided by this factor.
  double verify_factor = 2.0;
  int max_length = 8;
  double p1_horizon = 50.0;
};

/// Memo of alpha samples shared between shooting runs on the same geometry.
class SampleCache {
 public:
  std::optional<AlphaSample> find(double alpha, int step) const;
  void insert(const AlphaSample& s);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<double, int>, AlphaSample> samples_;
};

/// Integrates from point_on_L(alpha) far enough to read sigma_{step+1}.
AlphaSample sample_alpha(double alpha, int step, const Geometry& geometry,
                         const ShootConfig& config);

struct EndpointBehaviorReport {
  double alpha_near_p0 = 0.999;
  double alpha_near_p1 = 0.01;
  /// Plane y = x is crossed before any zero of x.
  bool near_p0_pass = false;
  std::optional<double> near_p0_plane_cross;
  std::optional<double> near_p0_first_zero;
  /// x decreases monotonically below 0, then x' changes sign at least four
  /// times before the second zero.
  bool near_p1_pass = false;
  bool near_p1_monotone = false;
  std::optional<double> near_p1_t1;
  std::optional<double> near_p1_t2;
  int near_p1_changes = 0;

  bool pass() const { return near_p0_pass && near_p1_pass; }
};

/// Throws ConditionAFailed when Condition A does not hold at the parameters.
EndpointBehaviorReport endpoint_behaviors(const Params& params, const Geometry& geometry,
                                          double horizon = 60.0, double alpha_near_p0 = 0.999,
                                          double alpha_near_p1 = 0.01,
                                          const IntegratorConfig& integrator = {});

struct AuditAlarm {
  std::size_t left = 0;
  std::size_t right = 0;
  int sigma_left = 0;
  int sigma_right = 0;
};

/// Adjacent samples whose counts jump between >= 4 and <= 1 directly.
std::vector<AuditAlarm> sigma_transition_audit(const std::vector<int>& sigmas);
std::vector<AuditAlarm> sigma_transition_audit(const std::vector<AlphaSample>& samples, int k);

enum class AnchorType { A, B, C };

std::string_view to_string(AnchorType t);

struct Anchor {
  AnchorType type = AnchorType::A;
  double alpha = 0.0;
  int sigma_n = 0;
  int sigma_next = 0;
  bool sigma_next_open = false;
  double t_next = 0.0;
};

struct StepCertificate {
  int n = 0;
  /// I_n, on which t_n is continuous.
  std::pair<double, double> interval;
  std::optional<Anchor> a;
  std::optional<Anchor> b;
  std::optional<Anchor> c;
  /// Letter chosen at this step and the anchor matching it.
  int letter = 0;
  Anchor chosen;
  /// I_{n+1}: the sub-interval with sigma_n = letter and t_{n+1} continuous.
  std::pair<double, double> next_interval;
  std::size_t samples = 0;
  std::size_t audit_alarms = 0;
  double horizon = 0.0;
};

struct ShootResult {
  TargetWord target;
  std::pair<double, double> alpha_interval;
  double witness_alpha = 0.0;
  std::vector<int> achieved_word;
  /// Word of the witness at tightened tolerances.
  std::vector<int> verified_word;
  bool verified = false;
  std::vector<StepCertificate> certificates;
  double horizon_used = 0.0;
  /// First interval (0, alpha_bar) on which t_1 is continuous.
  std::pair<double, double> first_interval;
};

/// Throws AnchorNotFound, HorizonExhausted, ConditionAFailed.
ShootResult shoot_word(const TargetWord& target, const Params& params,
                       const ShootConfig& config = {},
                       std::shared_ptr<SampleCache> cache = nullptr);

/// Same, on a precomputed geometry (p1 already known).
ShootResult shoot_word(const TargetWord& target, const Geometry& geometry,
                       const ShootConfig& config = {},
                       std::shared_ptr<SampleCache> cache = nullptr);

}  // namespace lorenz
