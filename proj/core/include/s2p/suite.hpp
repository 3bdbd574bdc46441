#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/config.hpp"
#include "s2p/embedder.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/metrics.hpp"

namespace s2p {

struct SuiteSpec {
  std::string name;
  Setup setup = Setup::Tpv;
  Scenario scenario = Scenario::A;
  std::string backend = "oracle";
  int k_icl = 10;
  /// TPV: rooms; FPV: episodes per room archetype.
  int n_episodes = 50;
  std::uint64_t seed = 0;
  /// Runs with seeds seed, seed + 1, ...; TPV rooms stay fixed across runs
  /// and only the robot's initial heading changes.
  int repeats = 3;
  std::vector<RoomType> rooms{std::begin(kAllRoomTypes), std::end(kAllRoomTypes)};
  RunConfig run;
  int workers = 0;  // 0: hardware concurrency
};

/// Strict parse; unknown keys are rejected. "run" holds a RunConfig.
SuiteSpec suite_from_json(const nlohmann::json& j);
nlohmann::json suite_to_json(const SuiteSpec& spec);

struct SuiteRun {
  std::uint64_t seed = 0;
  std::vector<EpisodeResult> episodes;
  double ts = 0.0;
  int d = 0;
  SrSpl sr_spl;
};

struct SuiteReport {
  SuiteSpec spec;
  std::vector<SuiteRun> runs;
  std::size_t n = 0;  // episodes per run
  double ts = 0.0;    // mean over runs
  double d = 0.0;
  SrSpl sr_spl;
};

/// Executes every run on a worker pool. Episodes that fail are recorded with
/// their error and count as unsuccessful; results keep generation order.
/// `memory` may be null for zero-shot suites.
SuiteReport run_suite(const SuiteSpec& spec, const MemoryStore* memory, const Embedder* embedder);

nlohmann::json report_to_json(const SuiteReport& report);
/// Aligned text table with columns Mode, CL, Scenario, TS(/N), D(/N), SR, SPL.
std::string format_table(std::span<const SuiteReport> reports);
/// One row per episode and run.
void write_episodes_csv(std::ostream& out, const SuiteReport& report);

}  // namespace s2p
