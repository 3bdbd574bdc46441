#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/annotator.hpp"
#include "s2p/config.hpp"
#include "s2p/embedder.hpp"
#include "s2p/episodic.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/tpv_world.hpp"

namespace s2p {

/// Operator-driven demonstration recording. Each step shows the annotated
/// frame, takes the chosen action id and a think-aloud explanation, and
/// advances the simulator. FPV samples store the chosen command followed by
/// the operator's next one ([a_n, 0] for the last step); TPV samples store the
/// chosen label.
class DemoSession {
 public:
  static DemoSession fpv(FpvScene scene, RunConfig cfg);
  static DemoSession tpv(TpvScene scene, RunConfig cfg, int crop_margin = 24);

  Setup setup() const noexcept { return setup_; }
  int step_index() const noexcept { return static_cast<int>(steps_.size()); }
  bool finished() const noexcept { return finished_; }
  const AnnotatedFrame& annotated() const noexcept { return live_; }
  std::optional<std::string> episodic_text() const;

  /// {setup, step, frame_png (base64), width, height, labels [{id,u,v}],
  /// valid_ids, episodic, target, finished}
  nlohmann::json state() const;

  /// Throws UnknownLabel for an id outside the live frame's action set and
  /// InvalidArgument once the episode has ended.
  void step(int action, std::string explanation);

  /// Completed samples (frames drawn, embeddings computed). Throws
  /// EmptyEpisode when no step was taken.
  std::vector<DemoStep> finish(const std::string& target_object, const Embedder& embedder,
                               Scenario scenario = Scenario::A) const;

 private:
  DemoSession() = default;
  void refresh();

  struct Recorded {
    AnnotatedFrame frame;
    std::optional<std::string> episodic;
    int action = 0;
    std::string explanation;
  };

  Setup setup_ = Setup::Fpv;
  RunConfig cfg_;
  int crop_margin_ = 24;
  std::optional<FpvScene> fpv_;
  EpisodicState episodic_;
  std::optional<TpvScene> tpv_;
  std::optional<FloorMask> mask_;
  std::optional<TpvRenderer> renderer_;
  AnnotatedFrame live_;
  std::vector<Recorded> steps_;
  bool finished_ = false;
};

}  // namespace s2p
