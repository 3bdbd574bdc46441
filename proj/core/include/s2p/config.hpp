#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace s2p {

/// Concentric waypoint rings drawn around the robot in third-person frames.
struct RingSpec {
  double dr = 0.5;   // meters between rings
  double arc = 0.5;  // meters between neighbouring points on one ring
  int n_rings = 4;
  double safety_radius = 6.0;  // pixels of floor required around a point
  bool operator==(const RingSpec&) const = default;
};

struct ControllerGains {
  double k_heading = 2.0;
  double k_crosstrack = 1.5;
  double v_lin = 0.2;  // m/s
  double dt = 0.05;    // s
  bool operator==(const ControllerGains&) const = default;
};

struct RunConfig {
  double lambda = 0.7;
  int k_icl = 10;
  int max_steps = 25;
  RingSpec ring;
  ControllerGains controller;
  double waypoint_tolerance = 0.05;  // meters
  std::string embedder = "hist96";
  std::string backend = "oracle";
  std::uint64_t seed = 0;
  bool operator==(const RunConfig&) const = default;
};

/// Returns `cfg` with identifiers normalized; throws Range(field) on the first
/// out-of-range field.
RunConfig validate_config(RunConfig cfg);

/// Strict parse: unknown keys are rejected, missing keys take defaults.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace s2p
