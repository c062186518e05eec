#include "lorenz/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace lorenz {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest form that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw LabError(ErrorCode::ConfigError, "key " + key + ": expected a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) {
    throw LabError(ErrorCode::ConfigError, "key " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw LabError(ErrorCode::ConfigError, "key " + key + ": expected true or false, got '" + v + "'");
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define LAB_DOUBLE(name, member)                                                            \
  Field {                                                                                   \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                    \
  }
#define LAB_INT(name, member)                                                               \
  Field {                                                                                   \
    name,                                                                                   \
        [](RunConfig& c, const std::string& k, const std::string& v) {                      \
          c.member = static_cast<decltype(c.member)>(to_int(k, v));                         \
        },                                                                                  \
        [](const RunConfig& c) { return std::to_string(c.member); }                         \
  }
#define LAB_BOOL(name, member)                                                              \
  Field {                                                                                   \
    name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }         \
  }
#define LAB_STRING(name, member)                                                            \
  Field {                                                                                   \
    name, [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; },     \
        [](const RunConfig& c) { return c.member; }                                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      LAB_DOUBLE("params.s", params.s),
      LAB_DOUBLE("params.q", params.q),
      LAB_DOUBLE("params.R", params.R),
      LAB_DOUBLE("integrator.rel_tol", integrator.rel_tol),
      LAB_DOUBLE("integrator.abs_tol", integrator.abs_tol),
      LAB_DOUBLE("integrator.max_step", integrator.max_step),
      LAB_DOUBLE("integrator.t_max", integrator.t_max),
      LAB_DOUBLE("integrator.event_tol", integrator.event_tol),
      LAB_DOUBLE("integrator.tangency_tol", integrator.tangency_tol),
      LAB_DOUBLE("integrator.blow_up", integrator.blow_up),
      LAB_DOUBLE("integrator.min_step", integrator.min_step),
      LAB_INT("integrator.max_steps", integrator.max_steps),
      LAB_INT("integrator.event_samples", integrator.event_samples),
      LAB_DOUBLE("seed.epsilon", seed.epsilon),
      LAB_BOOL("seed.richardson", seed.richardson),
      LAB_STRING("integrate.start", integrate_start),
      LAB_STRING("integrate.direction", integrate_direction),
      LAB_DOUBLE("rstar.lo", rstar_lo),
      LAB_DOUBLE("rstar.hi", rstar_hi),
      LAB_DOUBLE("rstar.width_tol", rstar_width_tol),
      LAB_INT("rstar.probes", rstar_probes),
      LAB_DOUBLE("cond_a.horizon", cond_a_horizon),
      LAB_DOUBLE("sweep.R_min", sweep_R_min),
      LAB_DOUBLE("sweep.R_max", sweep_R_max),
      LAB_DOUBLE("sweep.R_step", sweep_R_step),
      LAB_INT("sweep.refinement_rounds", sweep_refinement_rounds),
      LAB_INT("cond_b.samples", cond_b_samples),
      LAB_DOUBLE("cond_b.back_horizon", cond_b_back_horizon),
      LAB_DOUBLE("cond_b.delta", cond_b_delta),
      LAB_DOUBLE("cond_b.ell_tol", cond_b_ell_tol),
      LAB_DOUBLE("cond_b.window_forward", cond_b_window_forward),
      LAB_BOOL("cond_b.ellipsoid_override", cond_b_ellipsoid_override),
      LAB_STRING("shoot.word", shoot_word),
      LAB_INT("shoot.grid", shoot_grid),
      LAB_INT("shoot.first_grid", shoot_first_grid),
      LAB_DOUBLE("shoot.jump_tol", shoot_jump_tol),
      LAB_DOUBLE("shoot.horizon_base", shoot_horizon_base),
      LAB_DOUBLE("shoot.horizon_per_letter", shoot_horizon_per_letter),
      LAB_DOUBLE("shoot.verify_factor", shoot_verify_factor),
      LAB_STRING("enclose.mode", enclose_mode),
      LAB_DOUBLE("enclose.span", enclose_span),
      LAB_DOUBLE("enclose.step", enclose_step),
      LAB_DOUBLE("enclose.width", enclose_width),
      LAB_DOUBLE("enclose.start_time", enclose_start_time),
      LAB_STRING("enclose.segment", enclose_segment),
      LAB_DOUBLE("enclose.segment_span", enclose_segment_span),
      LAB_STRING("output.path", output_path),
      LAB_STRING("output.format", output_format),
      LAB_STRING("output.csv", output_csv),
      LAB_STRING("output.events", output_events),
      LAB_INT("random.seed", random_seed),
  };
  return f;
}

#undef LAB_DOUBLE
#undef LAB_INT
#undef LAB_BOOL
#undef LAB_STRING

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw LabError(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  field(key).set(*this, key, value);
}

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return k;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries()) os << k << " = " << v << '\n';
  return os.str();
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw LabError(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LabError(ErrorCode::ConfigError, "cannot open config file " + path);
  return parse(in);
}

}  // namespace lorenz
