#include "lorenz/report_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace lorenz {

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json checks_json(const CheckpointLevel& level) {
  Json out;
  out["level"] = level.level;
  out["found"] = level.found;
  out["t"] = level.t;
  out["state"] = to_json(level.state);
  Json checks = Json::array();
  for (const auto& c : level.checks) {
    checks.push_back({{"expression", c.expression}, {"value", c.value}, {"pass", c.pass}});
  }
  out["checks"] = checks;
  out["pass"] = level.pass();
  return out;
}

}  // namespace

Json to_json(const Params& p) { return {{"s", p.s}, {"q", p.q}, {"R", p.R}}; }

Json to_json(const State& p) { return Json::array({p(0), p(1), p(2)}); }

Json to_json(const Interval& i) { return Json::array({i.lo(), i.hi()}); }

Json to_json(const Box& b) { return Json::array({to_json(b.x()), to_json(b.y()), to_json(b.z())}); }

Json to_json(const EventRecord& e) {
  return {{"kind", std::string(to_string(e.kind))},
          {"spec_index", e.spec_index},
          {"t", e.t},
          {"state", to_json(e.state)},
          {"crossing", e.crossing},
          {"degenerate", e.degenerate}};
}

Json to_json(const TraceSummary& s) {
  return {{"t", s.x_zeros}, {"tau", s.xprime_changes}, {"sigma", s.sigma}, {"open_tail", s.sigma_tail_open}};
}

Json to_json(const BranchClass& c) {
  return {{"tag", std::string(to_string(c.tag))},
          {"t1", optional_json(c.t1)},
          {"changes_before_t1", c.changes_before_t1},
          {"horizon", c.horizon},
          {"certified_at", optional_json(c.certified_at)},
          {"positive_side", c.positive_side},
          {"cause", c.cause}};
}

Json to_json(const CheckpointReport& r) {
  return {{"params", to_json(r.params)},
          {"y_equals_1", checks_json(r.at_y_equals_1)},
          {"z_equals_1000", checks_json(r.at_z_equals_1000)},
          {"y_equals_0", checks_json(r.at_y_equals_0)},
          {"monotone_to_y1", r.monotone_to_y1},
          {"all_pass", r.all_pass()}};
}

Json to_json(const RStarResult& r) {
  Json hist = Json::array();
  for (const auto& h : r.history) {
    hist.push_back({{"R", h.R}, {"tag", std::string(to_string(h.tag))}, {"positive_side", h.positive_side}});
  }
  return {{"s", r.s},
          {"q", r.q},
          {"bracket", Json::array({r.R_lo, r.R_hi})},
          {"width", r.width()},
          {"midpoint", r.midpoint()},
          {"lo_class", to_json(r.lo_class)},
          {"hi_class", to_json(r.hi_class)},
          {"iterations", r.iterations},
          {"resolved", r.resolved},
          {"nonmonotone", r.nonmonotone},
          {"note", r.note},
          {"history", hist}};
}

Json to_json(const NearHomoclinicReport& r) {
  return {{"R", r.R},
          {"tau1", optional_json(r.tau1)},
          {"closest_approach", r.closest_approach},
          {"t_closest", r.t_closest},
          {"min_max_x_xprime", r.min_max_x_xprime},
          {"reentered_ball", r.reentered_ball},
          {"ball_radius", r.ball_radius},
          {"horizon", r.horizon},
          {"rel_tol", r.rel_tol}};
}

Json to_json(const ConditionAReport& r) {
  return {{"params", to_json(r.params)},
          {"holds", r.holds},
          {"inconclusive", r.inconclusive},
          {"degenerate", r.degenerate},
          {"failure_reason", std::string(to_string(r.failure))},
          {"ordering", r.ordering},
          {"tau", r.taus},
          {"t1", optional_json(r.t1)},
          {"t2", r.t2 ? Json(*r.t2) : Json("inf")},
          {"horizon", r.horizon}};
}

Json to_json(const SweepResult& r) {
  Json verdicts = Json::array();
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const auto& v = r.verdicts[i];
    verdicts.push_back({{"R", r.grid[i]},
                        {"holds", v.holds},
                        {"inconclusive", v.inconclusive},
                        {"failure_reason", std::string(to_string(v.failure))}});
  }
  Json range = nullptr;
  if (r.estimated_range) range = Json::array({r.estimated_range->first, r.estimated_range->second});
  return {{"s", r.s}, {"q", r.q}, {"estimated_range", range}, {"inconclusive", r.inconclusive},
          {"verdicts", verdicts}};
}

Json to_json(const P1Result& r) {
  return {{"p1", to_json(r.p1)}, {"t", r.t}, {"margin", r.margin}, {"transversality", r.transversality}};
}

Json to_json(const ConditionBSample& s) {
  return {{"xi", s.xi},
          {"verdict", std::string(to_string(s.verdict))},
          {"satisfies_2a", s.satisfies_2a},
          {"satisfies_2b", s.satisfies_2b},
          {"t_exit", optional_json(s.t_exit)},
          {"t_hit", optional_json(s.t_hit)},
          {"min_dist_to_L", s.min_dist_to_L},
          {"window", Json::array({s.window_lo, s.window_hi})},
          {"window_changes", s.window_changes}};
}

Json to_json(const ConditionBReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  return {{"params", to_json(r.params)},
          {"p1", to_json(r.geometry.p1)},
          {"holds", r.holds},
          {"counts",
           {{"LEAVES_E_BEFORE_L", r.count_2a},
            {"FOUR_CHANGES_LOCAL", r.count_2b},
            {"VIOLATION", r.violations},
            {"INCONCLUSIVE", r.inconclusive},
            {"excluded", r.excluded}}},
          {"back_horizon", r.back_horizon},
          {"window_forward", r.options.window_forward},
          {"delta", r.options.delta},
          {"ell_tol", r.options.ell_tol},
          {"warnings", r.warnings},
          {"samples", samples}};
}

Json to_json(const EndpointBehaviorReport& r) {
  return {{"alpha_near_p0", r.alpha_near_p0},
          {"near_p0_pass", r.near_p0_pass},
          {"near_p0_plane_cross", optional_json(r.near_p0_plane_cross)},
          {"near_p0_first_zero", optional_json(r.near_p0_first_zero)},
          {"alpha_near_p1", r.alpha_near_p1},
          {"near_p1_pass", r.near_p1_pass},
          {"near_p1_monotone", r.near_p1_monotone},
          {"near_p1_t1", optional_json(r.near_p1_t1)},
          {"near_p1_t2", optional_json(r.near_p1_t2)},
          {"near_p1_changes", r.near_p1_changes}};
}

Json to_json(const Anchor& a) {
  return {{"type", std::string(to_string(a.type))},
          {"alpha", full(a.alpha)},
          {"sigma_n", a.sigma_n},
          {"sigma_next", a.sigma_next},
          {"sigma_next_open", a.sigma_next_open},
          {"t_next", a.t_next}};
}

Json to_json(const StepCertificate& c) {
  auto anchor = [](const std::optional<Anchor>& a) { return a ? to_json(*a) : Json(nullptr); };
  return {{"n", c.n},
          {"interval", Json::array({full(c.interval.first), full(c.interval.second)})},
          {"anchors", {{"A", anchor(c.a)}, {"B", anchor(c.b)}, {"C", anchor(c.c)}}},
          {"letter", c.letter},
          {"chosen", to_json(c.chosen)},
          {"next_interval", Json::array({full(c.next_interval.first), full(c.next_interval.second)})},
          {"samples", c.samples},
          {"audit_alarms", c.audit_alarms},
          {"horizon", c.horizon}};
}

Json to_json(const ShootResult& r) {
  Json certs = Json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  return {{"target", r.target.str()},
          {"witness_alpha", full(r.witness_alpha)},
          {"alpha_interval", Json::array({full(r.alpha_interval.first), full(r.alpha_interval.second)})},
          {"interval_width", r.alpha_interval.second - r.alpha_interval.first},
          {"first_interval", Json::array({full(r.first_interval.first), full(r.first_interval.second)})},
          {"achieved_word", r.achieved_word},
          {"verified_word", r.verified_word},
          {"verified", r.verified},
          {"horizon_used", r.horizon_used},
          {"certificates", certs}};
}

Json to_json(const EnclosureRun& r, bool with_steps) {
  Json out = {{"params", to_json(r.params)},
              {"mode", std::string(to_string(r.mode))},
              {"initial_width", r.initial_width},
              {"final_width", r.final_width},
              {"elapsed", r.elapsed},
              {"digits_lost_per_unit", r.digits_lost_per_unit},
              {"halvings", r.halvings},
              {"step_count", r.steps.size() - 1},
              {"final_box", to_json(r.final_box())}};
  if (with_steps) {
    Json steps = Json::array();
    for (const auto& s : r.steps) {
      steps.push_back({{"t", s.t}, {"h", s.h}, {"box", to_json(s.box)}, {"apriori", to_json(s.apriori)}});
    }
    out["steps"] = steps;
  }
  return out;
}

Json to_json(const SegmentCertificate& c) {
  return {{"verdict", std::string(to_string(c.verdict))},
          {"xi", to_json(c.xi)},
          {"t_exit", optional_json(c.t_exit)},
          {"min_distance_lb", c.min_distance_lb},
          {"final_width", c.final_width},
          {"steps", c.steps},
          {"reason", c.reason}};
}

Json to_json(const RunConfig& c) {
  Json out = Json::object();
  for (const auto& [k, v] : c.entries()) out[k] = v;
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x,y,z\n";
  char buf[128];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const State& p = traj.states[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", traj.times[i], p(0), p(1), p(2));
    os << buf;
  }
}

void write_events_jsonl(std::ostream& os, const std::vector<EventRecord>& events) {
  for (const auto& e : events) os << to_json(e).dump() << '\n';
}

EventKind event_kind_from_string(std::string_view name) {
  for (EventKind k : {EventKind::XZero, EventKind::XPrimeSignChange, EventKind::PlaneXYCross,
                      EventKind::PlaneYCross, EventKind::PlaneZCross, EventKind::EllipsoidExit,
                      EventKind::SegmentLHit}) {
    if (to_string(k) == name) return k;
  }
  throw LabError(ErrorCode::InvalidArgument, "unknown event kind " + std::string(name));
}

std::vector<EventRecord> read_events_jsonl(std::istream& is) {
  std::vector<EventRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    EventRecord e;
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.spec_index = j.at("spec_index").get<std::size_t>();
    e.t = j.at("t").get<double>();
    const auto& st = j.at("state");
    e.state = State(st.at(0).get<double>(), st.at(1).get<double>(), st.at(2).get<double>());
    e.crossing = j.at("crossing").get<int>();
    e.degenerate = j.at("degenerate").get<bool>();
    out.push_back(e);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "R,verdict\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const auto& v = r.verdicts[i];
    os << full(r.grid[i]) << ',' << (v.inconclusive ? "INCONCLUSIVE" : v.holds ? "HOLDS" : "FAILS") << '\n';
  }
}

void write_condition_b_csv(std::ostream& os, const ConditionBReport& r) {
  os << "xi,verdict\n";
  for (const auto& s : r.samples) os << full(s.xi) << ',' << to_string(s.verdict) << '\n';
}

}  // namespace lorenz
