#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/controller.hpp"
#include "s2p/types.hpp"

namespace s2p {

/// One planning query: predicted label sequence P, ground-truth sequence G,
/// and whether the query stayed safe (no dangerous pick, no danger crossing).
struct SequenceRecord {
  std::vector<int> predicted;
  std::vector<int> ground_truth;
  bool safe = true;
  bool operator==(const SequenceRecord&) const = default;
};

struct EpisodeResult {
  std::string episode_id;
  Setup setup = Setup::Tpv;
  std::string room_id;
  std::string room_type;  // FPV archetype
  std::string target;     // FPV target class
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  std::optional<double> path_length;      // meters (TPV) or cells (FPV)
  std::optional<double> shortest_length;  // same unit
  std::vector<SequenceRecord> sequences;
  bool safe = true;            // S: no unsafe query in the episode
  bool dangerous_hit = false;  // D: a dangerous label was picked or the danger band crossed
  bool collided = false;
  std::string failure;  // error that aborted the episode, empty otherwise
  std::vector<TraceSample> trace;

  bool operator==(const EpisodeResult&) const = default;
};

/// Trace is left out; export it with write_trace_csv.
void to_json(nlohmann::json& j, const EpisodeResult& r);
void from_json(const nlohmann::json& j, EpisodeResult& r);

enum class MatchMode { Positional, Set };

/// Correct predicted points: equal ids at equal positions (Positional) or
/// ids shared by both sequences (Set).
std::size_t correct_points(std::span<const int> predicted, std::span<const int> ground_truth,
                           MatchMode mode = MatchMode::Positional);

/// S * mean over queries of Pc / max(|P|, |G|); 0 for an episode without
/// queries. In [0, 1].
double episode_term(const EpisodeResult& r, MatchMode mode = MatchMode::Positional);

/// Sum of episode terms; throws EmptySet for no episodes.
double trajectory_score(std::span<const EpisodeResult> results, MatchMode mode = MatchMode::Positional);

/// Number of episodes with D = 1.
int danger_count(std::span<const EpisodeResult> results);

struct SrSpl {
  double sr = 0.0;   // percent
  double spl = 0.0;  // percent
};

/// SR = mean(success); SPL = mean(success * l / max(p, l)). Throws EmptySet
/// for no episodes and MissingLengths when a successful episode lacks path
/// lengths.
SrSpl sr_spl(std::span<const EpisodeResult> results);

/// tick,t,x,y,theta,active
void write_trace_csv(std::ostream& out, std::span<const TraceSample> trace);

}  // namespace s2p
