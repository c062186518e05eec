#include "lorenz/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lorenz/parallel.hpp"

namespace lorenz {

TargetWord TargetWord::parse(std::string_view text) {
  TargetWord w;
  for (char c : text) {
    if (c != '1' && c != '3') {
      throw LabError(ErrorCode::InvalidArgument, "target word must consist of the letters 1 and 3");
    }
    w.letters.push_back(c - '0');
  }
  w.validate();
  return w;
}

void TargetWord::validate() const {
  if (letters.empty()) throw LabError(ErrorCode::InvalidArgument, "target word is empty");
  for (int l : letters) {
    if (l != 1 && l != 3) throw LabError(ErrorCode::InvalidArgument, "letters must be 1 or 3");
  }
}

std::string TargetWord::str() const {
  std::string s;
  for (int l : letters) s += static_cast<char>('0' + l);
  return s;
}

State point_on_L(double alpha, const Geometry& geometry) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw LabError(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return geometry.p1;
  if (alpha == 1.0) return geometry.p0;
  State p = geometry.L.point(alpha);
  // Both endpoints lie on x = y; keep it exact.
  p(1) = p(0);
  return p;
}

std::optional<double> AlphaSample::t(int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > summary.x_zeros.size()) return std::nullopt;
  return summary.x_zeros[static_cast<std::size_t>(k - 1)];
}

std::optional<int> AlphaSample::sigma(int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > summary.sigma.size()) return std::nullopt;
  return summary.sigma[static_cast<std::size_t>(k - 1)];
}

bool AlphaSample::sigma_closed(int k) const {
  return k >= 1 && static_cast<std::size_t>(k) < summary.x_zeros.size();
}

bool AlphaSample::sigma_at_least_four(int k) const {
  const auto s = sigma(k);
  return s && *s >= 4;
}

std::optional<AlphaSample> SampleCache::find(double alpha, int step) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = samples_.find({alpha, step});
  if (it == samples_.end()) return std::nullopt;
  return it->second;
}

void SampleCache::insert(const AlphaSample& s) {
  std::lock_guard<std::mutex> lock(mutex_);
  samples_.emplace(std::make_pair(s.alpha, s.step), s);
}

std::size_t SampleCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return samples_.size();
}

AlphaSample sample_alpha(double alpha, int step, const Geometry& geometry,
                         const ShootConfig& config) {
  AlphaSample out;
  out.alpha = alpha;
  out.step = step;
  out.horizon = config.horizon_base + config.horizon_per_letter * (step + 1);
  IntegratorConfig ic = config.integrator;
  ic.direction = Direction::Forward;
  ic.t_max = out.horizon;
  const Trajectory traj = integrate(point_on_L(alpha, geometry), geometry.params, ic,
                                    {EventSpec::x_zero(step + 2), EventSpec::xprime_sign_change()});
  out.ok = traj.ok();
  out.summary = summarize(traj);
  return out;
}

EndpointBehaviorReport endpoint_behaviors(const Params& params, const Geometry& geometry,
                                          double horizon, double alpha_near_p0,
                                          double alpha_near_p1, const IntegratorConfig& integrator) {
  ConditionAOptions aopts;
  aopts.integrator = integrator;
  if (!check_condition_a(params, 100.0, aopts).holds) {
    throw LabError(ErrorCode::ConditionAFailed, "Condition A does not hold at these parameters");
  }
  EndpointBehaviorReport rep;
  rep.alpha_near_p0 = alpha_near_p0;
  rep.alpha_near_p1 = alpha_near_p1;
  IntegratorConfig ic = integrator;
  ic.direction = Direction::Forward;
  ic.t_max = horizon;

  {
    const Trajectory traj = integrate(point_on_L(alpha_near_p0, geometry), params, ic,
                                      {EventSpec::x_zero(1), EventSpec::plane_xy(0, 1)});
    const auto zeros = traj.events_of(EventKind::XZero);
    const auto planes = traj.events_of(EventKind::PlaneXYCross);
    if (!zeros.empty()) rep.near_p0_first_zero = zeros.front().t;
    if (!planes.empty()) rep.near_p0_plane_cross = planes.front().t;
    rep.near_p0_pass = rep.near_p0_plane_cross &&
                       (!rep.near_p0_first_zero || *rep.near_p0_plane_cross < *rep.near_p0_first_zero);
  }
  {
    const Trajectory traj = integrate(point_on_L(alpha_near_p1, geometry), params, ic,
                                      {EventSpec::x_zero(2), EventSpec::xprime_sign_change()});
    const TraceSummary sum = summarize(traj);
    if (!sum.x_zeros.empty()) rep.near_p1_t1 = sum.x_zeros[0];
    if (sum.x_zeros.size() > 1) rep.near_p1_t2 = sum.x_zeros[1];
    if (rep.near_p1_t1) {
      const double t1 = *rep.near_p1_t1;
      bool monotone = sum.changes_before_first_zero == 0;
      for (std::size_t i = 1; i < traj.times.size() && traj.times[i] <= t1; ++i) {
        if (!(traj.states[i](1) < traj.states[i](0))) monotone = false;
      }
      rep.near_p1_monotone = monotone;
      rep.near_p1_changes = sum.sigma.empty() ? 0 : sum.sigma.front();
      rep.near_p1_pass = monotone && rep.near_p1_changes >= 4;
    }
  }
  return rep;
}

std::vector<AuditAlarm> sigma_transition_audit(const std::vector<int>& sigmas) {
  std::vector<AuditAlarm> alarms;
  for (std::size_t i = 0; i + 1 < sigmas.size(); ++i) {
    const int a = sigmas[i], b = sigmas[i + 1];
    if ((a >= 4 && b <= 1) || (a <= 1 && b >= 4)) alarms.push_back({i, i + 1, a, b});
  }
  return alarms;
}

std::vector<AuditAlarm> sigma_transition_audit(const std::vector<AlphaSample>& samples, int k) {
  // Samples without a defined sigma_k break adjacency.
  std::vector<AuditAlarm> alarms;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto a = samples[i].sigma(k), b = samples[i + 1].sigma(k);
    if (!a || !b) continue;
    for (auto al : sigma_transition_audit(std::vector<int>{*a, *b})) {
      al.left = i;
      al.right = i + 1;
      alarms.push_back(al);
    }
  }
  return alarms;
}

std::string_view to_string(AnchorType t) {
  switch (t) {
    case AnchorType::A: return "A";
    case AnchorType::B: return "B";
    case AnchorType::C: return "C";
  }
  return "?";
}

namespace {

class Shooter {
 public:
  Shooter(const TargetWord& target, const Geometry& geometry, const ShootConfig& config,
          std::shared_ptr<SampleCache> cache)
      : target_(target), geometry_(geometry), config_(config), cache_(std::move(cache)) {
    if (!cache_) cache_ = std::make_shared<SampleCache>();
  }

  AlphaSample sample(double alpha, int step) {
    if (auto s = cache_->find(alpha, step)) return *s;
    AlphaSample s = sample_alpha(alpha, step, geometry_, config_);
    cache_->insert(s);
    return s;
  }

  std::vector<AlphaSample> sample_all(const std::vector<double>& alphas, int step) {
    std::vector<AlphaSample> out(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) { out[i] = sample(alphas[i], step); });
    return out;
  }

  /// I_1 = (0, alpha_bar): t_1 defined, no x' change before it, continuous.
  std::pair<double, double> first_interval() {
    auto in_i1 = [](const AlphaSample& s) { return s.t(1) && s.summary.changes_before_first_zero == 0; };
    const int n = config_.first_grid;
    std::vector<double> alphas;
    for (int i = 0; i < n; ++i) alphas.push_back(static_cast<double>(i) / n);
    const auto samples = sample_all(alphas, 0);
    if (!in_i1(samples[0])) {
      throw LabError(ErrorCode::AnchorNotFound, "n=1: t_1 is not defined at alpha = 0");
    }
    std::size_t i = 1;
    while (i < samples.size() && in_i1(samples[i]) &&
           std::abs(*samples[i].t(1) - *samples[i - 1].t(1)) < config_.jump_tol) {
      ++i;
    }
    if (i == samples.size()) return {0.0, 1.0};
    double good = samples[i - 1].alpha, bad = samples[i].alpha;
    double t_good = *samples[i - 1].t(1);
    while (bad - good > config_.alpha_resolution) {
      const double mid = 0.5 * (good + bad);
      const AlphaSample s = sample(mid, 0);
      if (in_i1(s) && std::abs(*s.t(1) - t_good) < config_.jump_tol) {
        good = mid;
        t_good = *s.t(1);
      } else {
        bad = mid;
      }
    }
    return {0.0, good};
  }

  ShootResult run() {
    ShootResult res;
    res.target = target_;
    res.first_interval = first_interval();
    std::vector<StepCertificate> chain;
    if (!descend(1, res.first_interval, chain)) {
      throw LabError(ErrorCode::AnchorNotFound, last_failure_);
    }
    res.certificates = chain;
    res.alpha_interval = chain.back().next_interval;
    res.witness_alpha = witness_;
    res.achieved_word = word_of(witness_sample_, static_cast<int>(target_.size()));
    for (const auto& c : chain) res.horizon_used = std::max(res.horizon_used, c.horizon);

    ShootConfig tight = config_;
    tight.integrator = config_.integrator.tightened(config_.verify_factor);
    const AlphaSample v = sample_alpha(witness_, static_cast<int>(target_.size()), geometry_, tight);
    res.verified_word = word_of(v, static_cast<int>(target_.size()));
    res.verified = res.verified_word == target_.letters;
    return res;
  }

 private:
  static std::vector<int> word_of(const AlphaSample& s, int n) {
    std::vector<int> w;
    for (int k = 1; k <= n && s.sigma_closed(k); ++k) w.push_back(*s.sigma(k));
    return w;
  }

  bool prefix_ok(const AlphaSample& s, int n) const {
    for (int k = 1; k < n; ++k) {
      if (!s.sigma_closed(k) || *s.sigma(k) != target_.letters[static_cast<std::size_t>(k - 1)]) {
        return false;
      }
    }
    return s.t(n).has_value();
  }

  bool usable(const AlphaSample& s, int n) const { return prefix_ok(s, n) && s.t(n + 1); }

  std::optional<AnchorType> anchor_type(const AlphaSample& s, int n) const {
    if (!usable(s, n) || !s.sigma_at_least_four(n + 1)) return std::nullopt;
    const int sn = *s.sigma(n);
    if (sn == 1) return AnchorType::A;
    if (sn == 3) return AnchorType::B;
    if (sn >= 4) return AnchorType::C;
    return std::nullopt;
  }

  /// Refinement key: adjacent samples with different keys are split.
  std::vector<int> key(const AlphaSample& s, int n) const {
    if (!prefix_ok(s, n)) return {-1};
    if (!s.t(n + 1)) return {-2, std::min(s.sigma(n).value_or(0), 4)};
    return {std::min(*s.sigma(n), 4), s.sigma_at_least_four(n + 1) ? 4 : s.sigma(n + 1).value_or(0)};
  }

  Anchor make_anchor(AnchorType type, const AlphaSample& s, int n) const {
    Anchor a;
    a.type = type;
    a.alpha = s.alpha;
    a.sigma_n = *s.sigma(n);
    a.sigma_next = *s.sigma(n + 1);
    a.sigma_next_open = !s.sigma_closed(n + 1);
    a.t_next = *s.t(n + 1);
    return a;
  }

  bool continuous(const AlphaSample& a, const AlphaSample& b, int n) const {
    return std::abs(*a.t(n + 1) - *b.t(n + 1)) < config_.jump_tol;
  }

  bool descend(int n, std::pair<double, double> interval, std::vector<StepCertificate>& chain) {
    const int letter = target_.letters[static_cast<std::size_t>(n - 1)];
    const auto [lo, hi] = interval;
    const int g = n == 1 ? config_.first_grid : config_.grid;
    std::vector<double> alphas;
    for (int i = 0; i < g; ++i) alphas.push_back(lo + (hi - lo) * (i + 0.5) / g);
    std::vector<AlphaSample> samples = sample_all(alphas, n);

    auto have = [&](AnchorType t) {
      return std::any_of(samples.begin(), samples.end(),
                         [&](const AlphaSample& s) { return anchor_type(s, n) == t; });
    };
    std::size_t alarms = 0;
    for (int round = 0; round < config_.max_refine_rounds; ++round) {
      if (have(AnchorType::A) && have(AnchorType::B) && have(AnchorType::C)) break;
      if (samples.size() >= static_cast<std::size_t>(config_.max_samples_per_step)) break;
      const auto audit = sigma_transition_audit(samples, n);
      alarms += audit.size();
      std::vector<bool> split(samples.size(), false);
      for (const auto& al : audit) split[al.left] = true;
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (key(samples[i], n) != key(samples[i + 1], n)) split[i] = true;
        if (usable(samples[i], n) && usable(samples[i + 1], n) && !continuous(samples[i], samples[i + 1], n)) {
          split[i] = true;
        }
      }
      std::vector<double> inserts;
      for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (split[i] && samples[i + 1].alpha - samples[i].alpha > config_.alpha_resolution) {
          inserts.push_back(0.5 * (samples[i].alpha + samples[i + 1].alpha));
        }
      }
      const std::size_t room = static_cast<std::size_t>(config_.max_samples_per_step) - samples.size();
      if (inserts.empty()) break;
      if (inserts.size() > room) inserts.resize(room);
      auto extra = sample_all(inserts, n);
      samples.insert(samples.end(), extra.begin(), extra.end());
      std::sort(samples.begin(), samples.end(),
                [](const AlphaSample& a, const AlphaSample& b) { return a.alpha < b.alpha; });
    }

    if (std::none_of(samples.begin(), samples.end(), [&](const AlphaSample& s) { return usable(s, n); })) {
      throw LabError(ErrorCode::HorizonExhausted,
                     "n=" + std::to_string(n) + ": no sample reaches the next zero of x");
    }

    StepCertificate cert;
    cert.n = n;
    cert.interval = interval;
    cert.letter = letter;
    cert.samples = samples.size();
    cert.audit_alarms = alarms;
    cert.horizon = config_.horizon_base + config_.horizon_per_letter * (n + 1);
    for (const auto& s : samples) {
      const auto t = anchor_type(s, n);
      if (!t) continue;
      std::optional<Anchor>* slot = *t == AnchorType::A ? &cert.a : *t == AnchorType::B ? &cert.b : &cert.c;
      if (!*slot) *slot = make_anchor(*t, s, n);
    }
    if (!cert.a || !cert.b || !cert.c) {
      std::ostringstream os;
      os << "n=" << n << ": missing anchor type(s)" << (cert.a ? "" : " A") << (cert.b ? "" : " B")
         << (cert.c ? "" : " C") << " on (" << lo << ", " << hi << ") after " << samples.size()
         << " samples";
      last_failure_ = os.str();
      return false;
    }

    // Runs with sigma_n = letter and t_{n+1} continuous between neighbours.
    const AnchorType want = letter == 1 ? AnchorType::A : AnchorType::B;
    struct Run {
      std::size_t first, last;
    };
    std::vector<Run> runs;
    auto good = [&](const AlphaSample& s) { return usable(s, n) && *s.sigma(n) == letter; };
    for (std::size_t i = 0; i < samples.size();) {
      if (!good(samples[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < samples.size() && good(samples[j + 1]) && continuous(samples[j], samples[j + 1], n)) ++j;
      bool has_anchor = false;
      for (std::size_t k = i; k <= j; ++k) has_anchor = has_anchor || anchor_type(samples[k], n) == want;
      if (has_anchor) runs.push_back({i, j});
      i = j + 1;
    }
    std::stable_sort(runs.begin(), runs.end(),
                     [](const Run& a, const Run& b) { return a.last - a.first > b.last - b.first; });
    if (runs.size() > 3) runs.resize(3);

    for (const Run& run : runs) {
      StepCertificate c = cert;
      const double centre = 0.5 * (samples[run.first].alpha + samples[run.last].alpha);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = run.first; k <= run.last; ++k) {
        if (anchor_type(samples[k], n) == want && std::abs(samples[k].alpha - centre) < best) {
          best = std::abs(samples[k].alpha - centre);
          c.chosen = make_anchor(want, samples[k], n);
        }
      }
      const double left = run.first == 0 ? lo : refine_edge(samples[run.first], samples[run.first - 1], n, letter);
      const double right =
          run.last + 1 == samples.size() ? hi : refine_edge(samples[run.last], samples[run.last + 1], n, letter);
      c.next_interval = {left, right};
      chain.push_back(c);
      if (static_cast<std::size_t>(n) == target_.size()) {
        if (pick_witness(samples, run, n)) return true;
      } else if (descend(n + 1, c.next_interval, chain)) {
        return true;
      }
      chain.pop_back();
    }
    if (runs.empty()) {
      last_failure_ = "n=" + std::to_string(n) + ": no continuity run carries the letter " +
                      std::to_string(letter);
    }
    return false;
  }

  /// Bisects from an inner good sample toward an outer neighbour.
  double refine_edge(AlphaSample inner, const AlphaSample& outer, int n, int letter) {
    double a_in = inner.alpha, a_out = outer.alpha;
    while (std::abs(a_out - a_in) > config_.alpha_resolution) {
      const double mid = 0.5 * (a_in + a_out);
      const AlphaSample s = sample(mid, n);
      if (usable(s, n) && *s.sigma(n) == letter && continuous(inner, s, n)) {
        a_in = mid;
        inner = s;
      } else {
        a_out = mid;
      }
    }
    return a_in;
  }

  /// Central sample of the final run whose word survives re-integration.
  bool pick_witness(const std::vector<AlphaSample>& samples, const auto& run, int n) {
    std::vector<std::size_t> order;
    for (std::size_t k = run.first; k <= run.last; ++k) order.push_back(k);
    const double centre = 0.5 * (samples[run.first].alpha + samples[run.last].alpha);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(samples[a].alpha - centre) < std::abs(samples[b].alpha - centre);
    });
    ShootConfig tight = config_;
    tight.integrator = config_.integrator.tightened(config_.verify_factor);
    for (std::size_t idx : order) {
      const AlphaSample& s = samples[idx];
      if (word_of(s, n) != target_.letters) continue;
      const AlphaSample v = sample_alpha(s.alpha, n, geometry_, tight);
      if (word_of(v, n) == target_.letters) {
        witness_ = s.alpha;
        witness_sample_ = s;
        return true;
      }
    }
    last_failure_ = "n=" + std::to_string(n) + ": no witness reproduces the word at tighter tolerance";
    return false;
  }

  const TargetWord& target_;
  const Geometry& geometry_;
  const ShootConfig& config_;
  std::shared_ptr<SampleCache> cache_;
  double witness_ = 0.0;
  AlphaSample witness_sample_;
  std::string last_failure_ = "no anchors";
};

}  // namespace

ShootResult shoot_word(const TargetWord& target, const Geometry& geometry, const ShootConfig& config,
                       std::shared_ptr<SampleCache> cache) {
  target.validate();
  if (target.size() > static_cast<std::size_t>(config.max_length)) {
    throw LabError(ErrorCode::InvalidArgument,
                   "target longer than max_length = " + std::to_string(config.max_length));
  }
  if (!complex_pair_at_p0(geometry.params)) {
    throw LabError(ErrorCode::ConditionAFailed, "the linearization at p0 has no complex pair");
  }
  Shooter shooter(target, geometry, config, std::move(cache));
  return shooter.run();
}

ShootResult shoot_word(const TargetWord& target, const Params& params, const ShootConfig& config,
                       std::shared_ptr<SampleCache> cache) {
  params.validate();
  ConditionAOptions aopts;
  aopts.integrator = config.integrator;
  if (!check_condition_a(params, 100.0, aopts).holds) {
    throw LabError(ErrorCode::ConditionAFailed, "Condition A does not hold at these parameters");
  }
  const P1Result p1 = find_p1(params, config.p1_horizon, aopts);
  return shoot_word(target, Geometry::from_p1(params, p1.p1), config, std::move(cache));
}

}  // namespace lorenz
