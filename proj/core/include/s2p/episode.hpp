#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "s2p/config.hpp"
#include "s2p/embedder.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/metrics.hpp"
#include "s2p/pipeline.hpp"
#include "s2p/prompt.hpp"
#include "s2p/tpv_world.hpp"
#include "s2p/vlm.hpp"

namespace s2p {

struct PlanRequest {
  const AnnotatedFrame& frame;
  const std::optional<std::string>& episodic;
  const TaskSpec& task;
  const OracleContext& oracle;
};

/// High-level planner consulted once per step (FPV) or replanning iteration
/// (TPV). Errors it throws end the episode as a failure.
using PlanFn = std::function<PlanAnswer(const PlanRequest&)>;

/// Planner + backend factory as a PlanFn.
PlanFn vlm_plan_fn(const Planner& planner, BackendFactory factory);

/// Snapshot published after each step for live monitoring.
struct StepTelemetry {
  std::string episode_id;
  int step = 0;
  Setup setup = Setup::Tpv;
  std::vector<int> plan;
  std::string explanation;
  std::vector<Label> labels;
  Frame frame;  // annotated frame shown to the planner
  std::vector<TraceSample> trace_tail;
};

struct EpisodeOptions {
  RunConfig cfg;
  std::string episode_id;
  int crop_margin = 24;  // TPV crop around labels and goal; negative disables
  int max_track_ticks = 1200;
  std::function<void(const StepTelemetry&)> on_step;
  const std::atomic<bool>* abort = nullptr;
};

/// Runs one object-goal episode: render, observe, overlay, plan, execute the
/// current command, until DONE or the step budget. Path lengths are in cells.
EpisodeResult run_fpv_episode(FpvScene scene, const PlanFn& plan, const EpisodeOptions& options);

/// Receding-horizon TPV episode: annotate the live frame, plan, track the
/// first two waypoints of the answer, replan; ends at the goal, on a
/// collision, or after cfg.max_steps iterations. Every iteration records the
/// predicted sequence, the ground-truth planner's sequence and its safety.
EpisodeResult tpv_replan_loop(TpvScene scene, const PlanFn& plan, const EpisodeOptions& options);

/// Ground-truth demonstrations, one DemoStep per step, ready for
/// MemoryStore::append_episode.
std::vector<DemoStep> record_fpv_demo(FpvScene scene, const Embedder& embedder, const RunConfig& cfg,
                                      Scenario scenario = Scenario::A);
std::vector<DemoStep> record_tpv_demo(TpvScene scene, const Embedder& embedder, const RunConfig& cfg,
                                      Scenario scenario = Scenario::A, int crop_margin = 24);

/// Object classes used for the FPV demonstrations, one episode each.
const std::vector<std::string>& fpv_training_objects();
/// Object classes reserved for evaluation.
const std::vector<std::string>& fpv_test_objects();

/// Fills `store` with `episodes` ground-truth demonstrations of `setup`
/// generated from `seed` (FPV cycles through the training objects), tagged
/// with `scenario`.
void synthesize_memory(MemoryStore& store, Setup setup, int episodes, std::uint64_t seed,
                       const Embedder& embedder, const RunConfig& cfg, Scenario scenario = Scenario::A);

}  // namespace s2p
