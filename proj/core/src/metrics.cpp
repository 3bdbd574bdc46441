#include "s2p/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"

namespace s2p {

using nlohmann::json;

void to_json(json& j, const EpisodeResult& r) {
  json seq = json::array();
  for (const auto& s : r.sequences)
    seq.push_back({{"predicted", s.predicted}, {"ground_truth", s.ground_truth}, {"safe", s.safe}});
  j = json{{"episode_id", r.episode_id},
           {"setup", to_string(r.setup)},
           {"room_id", r.room_id},
           {"seed", r.seed},
           {"success", r.success},
           {"steps", r.steps},
           {"sequences", seq},
           {"safe", r.safe},
           {"dangerous_hit", r.dangerous_hit},
           {"collided", r.collided}};
  if (!r.room_type.empty()) j["room_type"] = r.room_type;
  if (!r.target.empty()) j["target"] = r.target;
  if (r.path_length) j["path_length"] = *r.path_length;
  if (r.shortest_length) j["shortest_length"] = *r.shortest_length;
  if (!r.failure.empty()) j["failure"] = r.failure;
}

void from_json(const json& j, EpisodeResult& r) {
  r = EpisodeResult{};
  r.episode_id = j.value("episode_id", std::string());
  r.setup = setup_from_string(j.value("setup", std::string("tpv")));
  r.room_id = j.value("room_id", std::string());
  r.room_type = j.value("room_type", std::string());
  r.target = j.value("target", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.success = j.value("success", false);
  r.steps = j.value("steps", 0);
  if (j.contains("path_length")) r.path_length = j["path_length"].get<double>();
  if (j.contains("shortest_length")) r.shortest_length = j["shortest_length"].get<double>();
  for (const auto& s : j.value("sequences", json::array()))
    r.sequences.push_back({s.at("predicted").get<std::vector<int>>(), s.at("ground_truth").get<std::vector<int>>(),
                           s.value("safe", true)});
  r.safe = j.value("safe", true);
  r.dangerous_hit = j.value("dangerous_hit", false);
  r.collided = j.value("collided", false);
  r.failure = j.value("failure", std::string());
}

std::size_t correct_points(std::span<const int> predicted, std::span<const int> ground_truth, MatchMode mode) {
  if (mode == MatchMode::Positional) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(predicted.size(), ground_truth.size()); ++i)
      if (predicted[i] == ground_truth[i]) ++n;
    return n;
  }
  const std::set<int> p(predicted.begin(), predicted.end());
  const std::set<int> g(ground_truth.begin(), ground_truth.end());
  std::size_t n = 0;
  for (int id : p) n += g.count(id);
  return n;
}

double episode_term(const EpisodeResult& r, MatchMode mode) {
  if (!r.safe || r.sequences.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : r.sequences) {
    const auto denom = std::max(s.predicted.size(), s.ground_truth.size());
    if (denom == 0) continue;
    sum += static_cast<double>(correct_points(s.predicted, s.ground_truth, mode)) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(r.sequences.size());
}

double trajectory_score(std::span<const EpisodeResult> results, MatchMode mode) {
  if (results.empty()) throw Error(ErrorCode::EmptySet, "trajectory score");
  double ts = 0.0;
  for (const auto& r : results) ts += episode_term(r, mode);
  return ts;
}

int danger_count(std::span<const EpisodeResult> results) {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [](const EpisodeResult& r) { return r.dangerous_hit; }));
}

SrSpl sr_spl(std::span<const EpisodeResult> results) {
  if (results.empty()) throw Error(ErrorCode::EmptySet, "sr/spl");
  double success = 0.0;
  double spl = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    if (!r.path_length || !r.shortest_length) throw Error(ErrorCode::MissingLengths, r.episode_id);
    success += 1.0;
    const double l = *r.shortest_length;
    const double p = *r.path_length;
    const double denom = std::max(p, l);
    spl += denom > 0.0 ? l / denom : 1.0;
  }
  const double n = static_cast<double>(results.size());
  return {100.0 * success / n, 100.0 * spl / n};
}

void write_trace_csv(std::ostream& out, std::span<const TraceSample> trace) {
  out << "tick,t,x,y,theta,active\n";
  out << std::setprecision(9);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    out << i << ',' << s.t << ',' << s.pose.x << ',' << s.pose.y << ',' << s.pose.theta << ',' << s.active << '\n';
  }
}

}  // namespace s2p
