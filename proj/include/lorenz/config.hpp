#pragma once

// Run configuration: a flat list of dotted keys, read from and written to
// "key = value" text. A run is reproducible from its serialized form.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lorenz/integrator.hpp"
#include "lorenz/manifold.hpp"

namespace lorenz {

struct RunConfig {
  Params params;
  IntegratorConfig integrator;
  SeedConfig seed;

  std::string integrate_start = "gamma-plus";
  std::string integrate_direction = "forward";

  double rstar_lo = 1.01;
  double rstar_hi = 1000.0;
  double rstar_width_tol = 1e-5;
  int rstar_probes = 6;

  double cond_a_horizon = 100.0;
  double sweep_R_min = 5.0;
  double sweep_R_max = 20.0;
  double sweep_R_step = 0.1;
  int sweep_refinement_rounds = 3;

  int cond_b_samples = 4096;
  double cond_b_back_horizon = 20.0;
  double cond_b_delta = 1e-4;
  double cond_b_ell_tol = 1e-6;
  double cond_b_window_forward = 10.0;
  bool cond_b_ellipsoid_override = false;

  std::string shoot_word = "1";
  int shoot_grid = 64;
  int shoot_first_grid = 128;
  double shoot_jump_tol = 5.0;
  double shoot_horizon_base = 30.0;
  double shoot_horizon_per_letter = 15.0;
  double shoot_verify_factor = 2.0;

  std::string enclose_mode = "lohner";
  double enclose_span = 2.0;
  double enclose_step = 1e-3;
  double enclose_width = 1e-12;
  /// Time along the unstable branch of the box centre.
  double enclose_start_time = 20.0;
  /// "lo,hi": certify a segment of M over xi in [lo, hi] instead of a flow box.
  std::string enclose_segment;
  double enclose_segment_span = 2.0;

  std::string output_path;
  std::string output_format = "json";
  std::string output_csv;
  std::string output_events;

  std::uint64_t random_seed = 1;

  /// Throws ConfigError on an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// Ordered key/value pairs.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string serialize() const;
  static RunConfig parse(std::istream& in);
  static RunConfig parse_string(const std::string& text);
  static RunConfig load(const std::string& path);
};

}  // namespace lorenz
