// Command-line front end: one subcommand per analysis, JSON reports on stdout
// (or --out), a short human summary on stderr.
//
// Exit codes: 0 success or property holds, 1 usage, 2 numerical failure,
// 3 property does not hold or search failed, 4 inconclusive.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lorenz/config.hpp"
#include "lorenz/parallel.hpp"
#include "lorenz/report_io.hpp"

using namespace lorenz;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kFails = 3, kInconclusive = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::EmptyIntersection: return kUsage;
    case ErrorCode::SameClassAtEndpoints:
    case ErrorCode::ConditionAFailed:
    case ErrorCode::AnchorNotFound:
    case ErrorCode::HorizonExhausted:
    case ErrorCode::NoCrossing: return kFails;
    case ErrorCode::Unresolved: return kInconclusive;
    default: return kNumerical;
  }
}

struct Outcome {
  Json result;
  int code = kOk;
  std::string summary;
  /// Replaces the JSON document when the csv format is requested.
  std::string csv;
};

struct Overrides {
  std::optional<double> s, q, R, horizon, tol;
  std::vector<std::string> sets;
  std::string config_path, out, format, csv, events;
  std::string start, direction, word, mode, segment;
  std::optional<int> samples;
  std::optional<double> lo, hi, width, step, span;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

IntegratorConfig integrator_of(const RunConfig& c) { return c.integrator; }

State parse_start(const RunConfig& c) {
  if (c.integrate_start == "p0") return equilibria(c.params).p0;
  std::stringstream ss(c.integrate_start);
  State p;
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, tok, ',')) {
      throw LabError(ErrorCode::ConfigError,
                     "integrate.start must be gamma-plus, p0 or x,y,z; got '" + c.integrate_start + "'");
    }
    try {
      p(i) = std::stod(tok);
    } catch (const std::exception&) {
      throw LabError(ErrorCode::ConfigError, "integrate.start: bad coordinate '" + tok + "'");
    }
  }
  return p;
}

Outcome cmd_integrate(const RunConfig& c) {
  IntegratorConfig ic = integrator_of(c);
  if (c.integrate_direction == "backward") {
    ic.direction = Direction::Backward;
  } else if (c.integrate_direction != "forward") {
    throw LabError(ErrorCode::ConfigError, "integrate.direction must be forward or backward");
  }
  const std::vector<EventSpec> events = {EventSpec::x_zero(), EventSpec::xprime_sign_change()};
  c.params.validate();
  const Trajectory traj = c.integrate_start == "gamma-plus"
                              ? follow_gamma_plus(c.params, c.seed, ic, events)
                              : integrate(parse_start(c), c.params, ic, events);

  const std::string csv_path = c.output_csv.empty() ? "trajectory.csv" : c.output_csv;
  const std::string events_path = c.output_events.empty() ? "events.jsonl" : c.output_events;
  Outcome out;
  if (c.output_format == "csv") {
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    out.csv = os.str();
  } else {
    std::ofstream f(csv_path);
    if (!f) throw LabError(ErrorCode::ConfigError, "cannot write " + csv_path);
    write_trajectory_csv(f, traj);
  }
  {
    std::ofstream f(events_path);
    if (!f) throw LabError(ErrorCode::ConfigError, "cannot write " + events_path);
    write_events_jsonl(f, traj.events);
  }
  const TraceSummary summary = summarize(traj);
  out.result = {{"status", std::string(to_string(traj.status))},
                {"t_end", traj.t_end()},
                {"nodes", traj.times.size()},
                {"event_count", traj.events.size()},
                {"x_zero_count", traj.events_of(EventKind::XZero).size()},
                {"final_state", to_json(traj.final_state())},
                {"trace", to_json(summary)},
                {"trajectory_csv", c.output_format == "csv" ? Json(nullptr) : Json(csv_path)},
                {"events_jsonl", events_path}};
  std::ostringstream s;
  s << "integrate: status " << to_string(traj.status) << ", t_end " << traj.t_end() << ", "
    << traj.times.size() << " nodes, " << traj.events.size() << " events\n";
  out.summary = s.str();
  if (!traj.ok()) {
    out.result["error"] = {{"code", std::string(to_string(traj.status))},
                           {"message", "integration stopped early; partial trajectory written"}};
    out.code = kNumerical;
  }
  return out;
}

Outcome cmd_rstar(const RunConfig& c) {
  RStarOptions opts;
  opts.classify.seed = c.seed;
  opts.classify.integrator = integrator_of(c);
  opts.monotonicity_probes = c.rstar_probes;
  const RStarResult r =
      find_r_star(c.params.s, c.params.q, {c.rstar_lo, c.rstar_hi}, c.rstar_width_tol, opts);
  const NearHomoclinicReport d =
      near_homoclinic_diagnostics(Params{c.params.s, c.params.q, r.midpoint()}, opts.classify);
  Outcome out;
  out.result = to_json(r);
  out.result["near_homoclinic"] = to_json(d);
  std::ostringstream s;
  s << "rstar: bracket (" << fmt("%.12g", r.R_lo) << ", " << fmt("%.12g", r.R_hi) << "), width "
    << fmt("%.3g", r.width()) << ", " << r.iterations << " iterations"
    << (r.resolved ? "" : ", unresolved: " + r.note) << "\n"
    << "  closest approach to origin at midpoint " << fmt("%.4g", d.closest_approach) << "\n";
  out.summary = s.str();
  out.code = r.resolved ? kOk : kInconclusive;
  return out;
}

Outcome cmd_checkpoints(const RunConfig& c) {
  const CheckpointReport r = lemma2_checkpoints(c.params, c.seed, integrator_of(c));
  Outcome out;
  out.result = to_json(r);
  std::ostringstream s;
  s << "checkpoints at (" << c.params.s << ", " << c.params.q << ", " << c.params.R << ")\n";
  for (const CheckpointLevel* l : {&r.at_y_equals_1, &r.at_z_equals_1000, &r.at_y_equals_0}) {
    s << "  " << l->level << " at t = " << fmt("%.6g", l->t) << "  state (" << fmt("%.6g", l->state(0))
      << ", " << fmt("%.6g", l->state(1)) << ", " << fmt("%.6g", l->state(2)) << ")\n";
    for (const auto& chk : l->checks) {
      s << "    " << (chk.pass ? "PASS  " : "FAIL  ") << chk.expression << "\n";
    }
  }
  s << "  " << (r.monotone_to_y1 ? "PASS  " : "FAIL  ") << "x, y, z increasing up to y = 1\n";
  out.summary = s.str();
  out.code = r.all_pass() ? kOk : kFails;
  return out;
}

ConditionAOptions cond_a_options(const RunConfig& c) {
  ConditionAOptions o;
  o.seed = c.seed;
  o.integrator = integrator_of(c);
  return o;
}

Outcome cmd_cond_a(const RunConfig& c) {
  const ConditionAReport r = check_condition_a(c.params, c.cond_a_horizon, cond_a_options(c));
  Outcome out;
  out.result = to_json(r);
  std::ostringstream s;
  s << "cond-a at R = " << c.params.R << ": "
    << (r.holds ? "HOLDS" : r.inconclusive ? "INCONCLUSIVE" : "FAILS");
  if (!r.holds) s << " (" << to_string(r.failure) << ")";
  s << "\n  ordering:";
  for (const auto& l : r.ordering) s << ' ' << l;
  s << "\n";
  out.summary = s.str();
  out.code = r.holds ? kOk : r.inconclusive ? kInconclusive : kFails;
  return out;
}

Outcome cmd_cond_a_sweep(const RunConfig& c) {
  SweepOptions o;
  o.check = cond_a_options(c);
  o.horizon = c.cond_a_horizon;
  o.refinement_rounds = c.sweep_refinement_rounds;
  const SweepResult r =
      sweep_condition_a(c.params.s, c.params.q, uniform_grid(c.sweep_R_min, c.sweep_R_max, c.sweep_R_step), o);
  Outcome out;
  out.result = to_json(r);
  if (c.output_format == "csv") {
    std::ostringstream os;
    write_sweep_csv(os, r);
    out.csv = os.str();
  }
  std::ostringstream s;
  s << "cond-a-sweep (" << c.params.s << ", " << fmt("%.6g", c.params.q) << "), " << r.grid.size()
    << " grid points, " << r.inconclusive << " inconclusive\n  estimated range: ";
  if (r.estimated_range) {
    s << "(" << fmt("%.4g", r.estimated_range->first) << ", " << fmt("%.4g", r.estimated_range->second) << ")";
  } else {
    s << "none";
  }
  if (c.params.s == 10.0 && c.params.q == 1.0) s << "   reference: (8.2, 17.2)";
  if (c.params.s == 10.0 && std::abs(c.params.q - 8.0 / 3.0) < 1e-12) s << "   reference: (14, 46.6)";
  s << "\n";
  out.summary = s.str();
  out.code = r.estimated_range ? kOk : kFails;
  return out;
}

Outcome cmd_cond_b(const RunConfig& c) {
  ConditionBOptions o;
  o.integrator = integrator_of(c);
  o.delta = c.cond_b_delta;
  o.ell_tol = c.cond_b_ell_tol;
  o.window_forward = c.cond_b_window_forward;
  o.ellipsoid_override = c.cond_b_ellipsoid_override;
  const ConditionBReport r = check_condition_b(c.params, c.cond_b_samples, c.cond_b_back_horizon, o);
  Outcome out;
  out.result = to_json(r);
  if (c.output_format == "csv") {
    std::ostringstream os;
    write_condition_b_csv(os, r);
    out.csv = os.str();
  }
  std::ostringstream s;
  s << "cond-b at R = " << c.params.R << ", " << r.samples.size() << " samples (" << r.excluded
    << " excluded near equilibria)\n"
    << "  LEAVES_E_BEFORE_L   " << r.count_2a << "\n"
    << "  FOUR_CHANGES_LOCAL  " << r.count_2b << "\n"
    << "  VIOLATION           " << r.violations << "\n"
    << "  INCONCLUSIVE        " << r.inconclusive << "\n";
  for (const auto& w : r.warnings) s << "  warning: " << w << "\n";
  out.summary = s.str();
  out.code = r.holds ? kOk : r.violations > 0 ? kFails : kInconclusive;
  return out;
}

ShootConfig shoot_config(const RunConfig& c) {
  ShootConfig o;
  o.integrator = integrator_of(c);
  o.grid = c.shoot_grid;
  o.first_grid = c.shoot_first_grid;
  o.jump_tol = c.shoot_jump_tol;
  o.horizon_base = c.shoot_horizon_base;
  o.horizon_per_letter = c.shoot_horizon_per_letter;
  o.verify_factor = c.shoot_verify_factor;
  return o;
}

Outcome cmd_shoot(const RunConfig& c) {
  const TargetWord target = TargetWord::parse(c.shoot_word);
  const ShootConfig sc = shoot_config(c);
  ConditionAOptions ao;
  ao.integrator = sc.integrator;
  const P1Result p1 = find_p1(c.params, sc.p1_horizon, ao);
  const Geometry geometry = Geometry::from_p1(c.params, p1.p1);
  const ShootResult r = shoot_word(target, geometry, sc);
  Outcome out;
  out.result = to_json(r);
  if (!c.output_csv.empty()) {
    IntegratorConfig ic = sc.integrator;
    ic.t_max = r.horizon_used;
    const Trajectory traj = integrate(point_on_L(r.witness_alpha, geometry), c.params, ic, {});
    std::ofstream f(c.output_csv);
    if (!f) throw LabError(ErrorCode::ConfigError, "cannot write " + c.output_csv);
    write_trajectory_csv(f, traj);
  }
  const bool realized = r.verified && std::equal(target.letters.begin(), target.letters.end(),
                                                 r.achieved_word.begin(), r.achieved_word.end());
  std::ostringstream s;
  s << "shoot " << target.str() << ": witness alpha " << fmt("%.17g", r.witness_alpha) << "\n"
    << "  interval width " << fmt("%.3g", r.alpha_interval.second - r.alpha_interval.first)
    << ", verified " << (r.verified ? "yes" : "no") << "\n";
  for (const auto& cert : r.certificates) {
    s << "  step " << cert.n << ": letter " << cert.letter << ", anchors" << (cert.a ? " A" : "")
      << (cert.b ? " B" : "") << (cert.c ? " C" : "") << ", " << cert.samples << " samples\n";
  }
  out.summary = s.str();
  out.code = realized ? kOk : kFails;
  return out;
}

std::pair<double, double> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma != std::string::npos) {
      return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    }
  } catch (const std::exception&) {
  }
  throw LabError(ErrorCode::ConfigError, "enclose.segment must be lo,hi; got '" + text + "'");
}

Outcome cmd_enclose(const RunConfig& c) {
  EnclosureOptions eo;
  if (c.enclose_mode == "naive") {
    eo.mode = EnclosureMode::Naive;
  } else if (c.enclose_mode != "lohner") {
    throw LabError(ErrorCode::ConfigError, "enclose.mode must be lohner or naive");
  }
  Outcome out;
  std::ostringstream s;
  if (!c.enclose_segment.empty()) {
    const auto [lo, hi] = parse_pair(c.enclose_segment);
    ConditionAOptions ao;
    ao.integrator = integrator_of(c);
    const Geometry geometry = Geometry::from_p1(c.params, find_p1(c.params, 50.0, ao).p1);
    SegmentCertifyOptions so;
    so.step = c.enclose_step;
    so.ell_tol = c.cond_b_ell_tol;
    so.enclosure = eo;
    const SegmentCertificate cert =
        certify_condition_b_segment(Interval(lo, hi), geometry, c.enclose_segment_span, so);
    out.result = to_json(cert);
    s << "enclose segment [" << fmt("%.17g", lo) << ", " << fmt("%.17g", hi) << "]: " << to_string(cert.verdict)
      << " (" << cert.reason << ")\n";
    out.code = cert.verdict == SegmentVerdict::Certified2A ? kOk : kInconclusive;
  } else {
    IntegratorConfig ic = integrator_of(c);
    ic.t_max = c.enclose_start_time;
    const State centre = follow_gamma_plus(c.params, c.seed, ic, {}).final_state();
    const Box start = Box::around(centre, 0.5 * c.enclose_width);
    const EnclosureRun run = enclose_flow(start, c.params, c.enclose_span, c.enclose_step, eo);
    out.result = to_json(run);
    s << "enclose (" << to_string(run.mode) << "): width " << fmt("%.3g", run.initial_width) << " -> "
      << fmt("%.3g", run.final_width) << " over " << fmt("%.3g", run.elapsed) << " time units\n"
      << "  digits lost per time unit " << fmt("%.2f", run.digits_lost_per_unit)
      << "   reference figure: about 10\n";
  }
  out.summary = s.str();
  return out;
}

Json error_json(const std::string& code, const std::string& message, int exit_code) {
  return {{"error", {{"code", code}, {"message", message}}}, {"exit_code", exit_code}};
}

void emit(const Json& doc, const std::string& csv, const std::string& path) {
  const std::string text = csv.empty() ? doc.dump(2) + "\n" : csv;
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) {
    std::cerr << "cannot write " << path << "\n";
    std::cout << text;
    return;
  }
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shooting analysis of the Lorenz equations"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides ov;

  app.add_option("--s", ov.s, "Parameter s");
  app.add_option("--q", ov.q, "Parameter q");
  app.add_option("--R", ov.R, "Parameter R");
  app.add_option("--config", ov.config_path, "Config file of key = value lines");
  app.add_option("--set", ov.sets, "Config override key=value (repeatable)");
  app.add_option("--out", ov.out, "Write the report here instead of stdout");
  app.add_option("--format", ov.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--horizon", ov.horizon, "Time horizon of the command");
  app.add_option("--tol", ov.tol, "Relative tolerance; the absolute tolerance is tol / 100");

  struct Command {
    std::string name;
    std::string help;
    Outcome (*run)(const RunConfig&);
    CLI::App* sub = nullptr;
  };
  std::vector<Command> commands = {
      {"integrate", "Integrate and write trajectory CSV and events JSONL", cmd_integrate},
      {"rstar", "Bracket the homoclinic parameter by bisection", cmd_rstar},
      {"checkpoints", "Checkpoint inequalities along the unstable branch", cmd_checkpoints},
      {"cond-a", "Event-ordering condition on the unstable branch", cmd_cond_a},
      {"cond-a-sweep", "Condition A over a grid of R", cmd_cond_a_sweep},
      {"cond-b", "Backward-time dichotomy from M inside E", cmd_cond_b},
      {"shoot", "Realize a word of 1s and 3s by shooting along L", cmd_shoot},
      {"enclose", "Interval enclosure of a flow box or of a segment of M", cmd_enclose},
  };
  for (auto& cmd : commands) cmd.sub = app.add_subcommand(cmd.name, cmd.help);
  auto sub = [&](const std::string& name) {
    for (auto& cmd : commands)
      if (cmd.name == name) return cmd.sub;
    return static_cast<CLI::App*>(nullptr);
  };
  sub("integrate")->add_option("--start", ov.start, "gamma-plus, p0 or x,y,z");
  sub("integrate")->add_option("--direction", ov.direction, "forward or backward");
  sub("integrate")->add_option("--csv", ov.csv, "Trajectory CSV path");
  sub("integrate")->add_option("--events", ov.events, "Events JSONL path");
  sub("rstar")->add_option("--lo", ov.lo, "Lower end of the initial bracket");
  sub("rstar")->add_option("--hi", ov.hi, "Upper end of the initial bracket");
  sub("rstar")->add_option("--width", ov.width, "Bracket width tolerance");
  sub("cond-a-sweep")->add_option("--lo", ov.lo, "Smallest R");
  sub("cond-a-sweep")->add_option("--hi", ov.hi, "Largest R");
  sub("cond-a-sweep")->add_option("--step", ov.step, "Grid step");
  sub("cond-b")->add_option("--samples", ov.samples, "Number of samples on M inside E");
  sub("shoot")->add_option("word", ov.word, "Target word over {1, 3}");
  sub("shoot")->add_option("--csv", ov.csv, "Witness trajectory CSV path");
  sub("enclose")->add_option("--mode", ov.mode, "lohner or naive");
  sub("enclose")->add_option("--width", ov.width, "Initial box width");
  sub("enclose")->add_option("--step", ov.step, "Nominal step");
  sub("enclose")->add_option("--span", ov.span, "Time span");
  sub("enclose")->add_option("--segment", ov.segment, "Certify xi in lo,hi on M");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc == 0) return kOk;
    std::cout << error_json("USAGE", e.what(), kUsage).dump(2) << "\n";
    return kUsage;
  }

  const Command* chosen = nullptr;
  for (const auto& cmd : commands)
    if (cmd.sub->parsed()) chosen = &cmd;

  RunConfig cfg;
  try {
    if (!ov.config_path.empty()) cfg = RunConfig::load(ov.config_path);
    for (const auto& kv : ov.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw LabError(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (ov.s) cfg.params.s = *ov.s;
    if (ov.q) cfg.params.q = *ov.q;
    if (ov.R) cfg.params.R = *ov.R;
    if (ov.tol) {
      cfg.integrator.rel_tol = *ov.tol;
      cfg.integrator.abs_tol = *ov.tol * 1e-2;
    }
    if (!ov.out.empty()) cfg.output_path = ov.out;
    if (!ov.format.empty()) cfg.output_format = ov.format;
    if (!ov.csv.empty()) cfg.output_csv = ov.csv;
    if (!ov.events.empty()) cfg.output_events = ov.events;
    if (!ov.start.empty()) cfg.integrate_start = ov.start;
    if (!ov.direction.empty()) cfg.integrate_direction = ov.direction;
    if (!ov.word.empty()) cfg.shoot_word = ov.word;
    if (!ov.mode.empty()) cfg.enclose_mode = ov.mode;
    if (!ov.segment.empty()) cfg.enclose_segment = ov.segment;
    if (ov.samples) cfg.cond_b_samples = *ov.samples;
    const std::string name = chosen->name;
    if (name == "rstar") {
      if (ov.lo) cfg.rstar_lo = *ov.lo;
      if (ov.hi) cfg.rstar_hi = *ov.hi;
      if (ov.width) cfg.rstar_width_tol = *ov.width;
    } else if (name == "cond-a-sweep") {
      if (ov.lo) cfg.sweep_R_min = *ov.lo;
      if (ov.hi) cfg.sweep_R_max = *ov.hi;
      if (ov.step) cfg.sweep_R_step = *ov.step;
    } else if (name == "enclose") {
      if (ov.width) cfg.enclose_width = *ov.width;
      if (ov.step) cfg.enclose_step = *ov.step;
      if (ov.span) cfg.enclose_span = *ov.span;
    }
    if (ov.horizon) {
      if (name == "integrate" || name == "checkpoints") cfg.integrator.t_max = *ov.horizon;
      if (name == "cond-a" || name == "cond-a-sweep") cfg.cond_a_horizon = *ov.horizon;
      if (name == "cond-b") cfg.cond_b_back_horizon = *ov.horizon;
      if (name == "shoot") cfg.shoot_horizon_base = *ov.horizon;
      if (name == "enclose") cfg.enclose_span = *ov.horizon;
    }
    if (cfg.output_format != "json" && cfg.output_format != "csv") {
      throw LabError(ErrorCode::ConfigError, "output.format must be json or csv");
    }
    if (cfg.output_format == "csv" && name != "integrate" && name != "cond-a-sweep" && name != "cond-b") {
      throw LabError(ErrorCode::ConfigError, "csv output is available for integrate, cond-a-sweep and cond-b");
    }
    cfg.params.validate();
    cfg.integrator.validate();
  } catch (const LabError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "usage: lorenz_lab <command> [--s S] [--q Q] [--R R] [--config FILE] [--set key=value]\n"
              << "       [--out FILE] [--format json|csv] [--horizon T] [--tol TOL]; see --help\n";
    std::cout << error_json(std::string(to_string(e.code())), e.what(), kUsage).dump(2) << "\n";
    return kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Json doc;
  doc["command"] = chosen->name;
  doc["config"] = to_json(cfg);
  Outcome out;
  try {
    out = chosen->run(cfg);
    doc["result"] = out.result;
    doc["exit_code"] = out.code;
  } catch (const LabError& e) {
    out.code = exit_code_for(e.code());
    out.csv.clear();
    out.summary = chosen->name + " failed: " + e.what() + "\n";
    doc["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    doc["exit_code"] = out.code;
  } catch (const std::exception& e) {
    out.code = kNumerical;
    out.csv.clear();
    out.summary = chosen->name + " failed: " + e.what() + "\n";
    doc["error"] = {{"code", "INTERNAL"}, {"message", e.what()}};
    doc["exit_code"] = out.code;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  doc["metadata"] = {{"elapsed_seconds", elapsed}, {"threads", worker_count()}};
  std::cerr << out.summary << "  elapsed " << fmt("%.3f", elapsed) << " s, exit " << out.code << "\n";
  emit(doc, out.csv, cfg.output_path);
  return out.code;
}
