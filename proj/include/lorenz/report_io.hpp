#pragma once

// JSON and CSV renderings of trajectories and module reports.

#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "lorenz/conditions.hpp"
#include "lorenz/config.hpp"
#include "lorenz/sequence.hpp"
#include "lorenz/validated.hpp"

namespace lorenz {

using Json = nlohmann::ordered_json;

Json to_json(const Params& p);
Json to_json(const State& p);
Json to_json(const Interval& i);
Json to_json(const Box& b);
Json to_json(const EventRecord& e);
Json to_json(const TraceSummary& s);
Json to_json(const BranchClass& c);
Json to_json(const CheckpointReport& r);
Json to_json(const RStarResult& r);
Json to_json(const NearHomoclinicReport& r);
Json to_json(const ConditionAReport& r);
Json to_json(const SweepResult& r);
Json to_json(const P1Result& r);
Json to_json(const ConditionBSample& s);
Json to_json(const ConditionBReport& r);
Json to_json(const EndpointBehaviorReport& r);
Json to_json(const Anchor& a);
Json to_json(const StepCertificate& c);
Json to_json(const ShootResult& r);
Json to_json(const EnclosureRun& r, bool with_steps = true);
Json to_json(const SegmentCertificate& c);
Json to_json(const RunConfig& c);

/// Columns t,x,y,z at full precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// One JSON object per line.
void write_events_jsonl(std::ostream& os, const std::vector<EventRecord>& events);
std::vector<EventRecord> read_events_jsonl(std::istream& is);
EventKind event_kind_from_string(std::string_view name);

/// Verdict maps: columns R,verdict and xi,verdict.
void write_sweep_csv(std::ostream& os, const SweepResult& r);
void write_condition_b_csv(std::ostream& os, const ConditionBReport& r);

}  // namespace lorenz
