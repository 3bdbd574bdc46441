#include "s2p/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"

namespace s2p {

namespace {

void require(bool ok, const char* field) {
  if (!ok) throw Error(ErrorCode::Range, field);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& scope) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, scope + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw Error(ErrorCode::InvalidArgument, "unknown key '" + scope + key + "'");
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("type of '") + key + "'");
  }
}

}  // namespace

RunConfig validate_config(RunConfig cfg) {
  require(std::isfinite(cfg.lambda) && cfg.lambda >= 0.0 && cfg.lambda <= 1.0, "lambda");
  require(cfg.k_icl >= 0, "k_icl");
  require(cfg.max_steps > 0, "max_steps");
  require(positive(cfg.ring.dr), "ring.dr");
  require(positive(cfg.ring.arc), "ring.arc");
  require(cfg.ring.n_rings > 0, "ring.n_rings");
  require(positive(cfg.ring.safety_radius), "ring.safety_radius");
  require(positive(cfg.controller.k_heading), "controller.k_heading");
  require(positive(cfg.controller.k_crosstrack), "controller.k_crosstrack");
  require(positive(cfg.controller.v_lin), "controller.v_lin");
  require(positive(cfg.controller.dt) && cfg.controller.dt <= 0.1, "controller.dt");
  require(positive(cfg.waypoint_tolerance), "waypoint_tolerance");

  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  cfg.embedder = lower(cfg.embedder);
  // Only the scheme is case-insensitive; a cassette path keeps its case.
  const auto colon = cfg.backend.find(':');
  cfg.backend = colon == std::string::npos ? lower(cfg.backend)
                                           : lower(cfg.backend.substr(0, colon)) + cfg.backend.substr(colon);
  require(!cfg.embedder.empty(), "embedder");
  require(!cfg.backend.empty(), "backend");
  return cfg;
}

RunConfig config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"lambda", "k_icl", "max_steps", "ring", "controller", "waypoint_tolerance",
                     "embedder", "backend", "seed"},
                 "");
  RunConfig cfg;
  read(j, "lambda", cfg.lambda);
  read(j, "k_icl", cfg.k_icl);
  read(j, "max_steps", cfg.max_steps);
  read(j, "waypoint_tolerance", cfg.waypoint_tolerance);
  read(j, "embedder", cfg.embedder);
  read(j, "backend", cfg.backend);
  read(j, "seed", cfg.seed);
  if (j.contains("ring")) {
    const auto& r = j.at("ring");
    reject_unknown(r, {"dr", "arc", "n_rings", "safety_radius"}, "ring.");
    read(r, "dr", cfg.ring.dr);
    read(r, "arc", cfg.ring.arc);
    read(r, "n_rings", cfg.ring.n_rings);
    read(r, "safety_radius", cfg.ring.safety_radius);
  }
  if (j.contains("controller")) {
    const auto& c = j.at("controller");
    reject_unknown(c, {"k_heading", "k_crosstrack", "v_lin", "dt"}, "controller.");
    read(c, "k_heading", cfg.controller.k_heading);
    read(c, "k_crosstrack", cfg.controller.k_crosstrack);
    read(c, "v_lin", cfg.controller.v_lin);
    read(c, "dt", cfg.controller.dt);
  }
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  return {
      {"lambda", cfg.lambda},
      {"k_icl", cfg.k_icl},
      {"max_steps", cfg.max_steps},
      {"ring",
       {{"dr", cfg.ring.dr},
        {"arc", cfg.ring.arc},
        {"n_rings", cfg.ring.n_rings},
        {"safety_radius", cfg.ring.safety_radius}}},
      {"controller",
       {{"k_heading", cfg.controller.k_heading},
        {"k_crosstrack", cfg.controller.k_crosstrack},
        {"v_lin", cfg.controller.v_lin},
        {"dt", cfg.controller.dt}}},
      {"waypoint_tolerance", cfg.waypoint_tolerance},
      {"embedder", cfg.embedder},
      {"backend", cfg.backend},
      {"seed", cfg.seed},
  };
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  return validate_config(config_from_json(j));
}

}  // namespace s2p
