#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "s2p/embedder.hpp"
#include "s2p/types.hpp"

namespace s2p {

/// Provenance of a demonstration: same camera (A), same building but another
/// room (D), human navigator (H), online footage (O).
enum class Scenario { A, D, H, O, Custom };

std::string_view to_string(Scenario s) noexcept;
Scenario scenario_from_string(std::string_view text);

struct ExperienceSample {
  std::string id;
  std::string episode_id;
  int step = 0;
  std::string frame_ref;  // relative to the store root
  std::string prompt;
  PlanAnswer answer;
  std::vector<float> embedding;
  Setup setup = Setup::Tpv;
  Scenario scenario = Scenario::A;
  std::optional<std::string> target_object;
  std::optional<std::string> room_id;
  bool operator==(const ExperienceSample&) const = default;
};

void to_json(nlohmann::json& j, const ExperienceSample& s);
void from_json(const nlohmann::json& j, ExperienceSample& s);

/// One recorded step: the sample plus the annotated image shown at that step.
struct DemoStep {
  ExperienceSample sample;
  Frame frame;
};

struct EpisodeEntry {
  std::string episode_id;
  std::string dir;  // relative to the store root
  std::size_t count = 0;
  std::size_t offset = 0;  // first row in the embedding sidecar
  bool operator==(const EpisodeEntry&) const = default;
};

struct ManifestDelta {
  std::string episode_id;
  std::size_t added = 0;
  std::size_t total_samples = 0;
  std::size_t total_episodes = 0;
};

/// Called with the name of each commit stage ("files-written",
/// "temp-written", "sidecar-renamed", "committed"); used to inject crashes.
using AppendHook = std::function<void(std::string_view stage)>;

/// On-disk experiential memory.
///
///   root/manifest.json                   episode index, embedder id, dim
///   root/embeddings.f32                  u64 dim, u64 count, count*dim f32 (LE)
///   root/episodes/<id>/sample_0000.json  sample record
///   root/episodes/<id>/frame_0000.png    annotated frame
///
/// Appends rewrite the sidecar and manifest through temp files and renames,
/// sidecar first. A sidecar holding more rows than the manifest references is
/// the trace of an interrupted append; only the referenced prefix is loaded.
class MemoryStore {
 public:
  static MemoryStore create(const std::filesystem::path& root, std::string embedder_id,
                            std::size_t dim);
  static MemoryStore load(const std::filesystem::path& root,
                          std::optional<std::string_view> expected_embedder = std::nullopt);
  /// Loads `root` if it holds a manifest, otherwise creates an empty store.
  static MemoryStore open(const std::filesystem::path& root, const Embedder& embedder);

  /// Writes one episode. Sample ids, episode ids and frame refs left empty
  /// are filled in. Takes the store's exclusive writer lock for the duration.
  ManifestDelta append_episode(std::string_view embedder_id, std::vector<DemoStep> episode,
                               const AppendHook& hook = {});

  /// Recomputes every embedding with `embedder` from the stored frames and
  /// commits the new sidecar and manifest atomically.
  void rebuild_embeddings(const Embedder& embedder);

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::string& embedder_id() const noexcept { return embedder_id_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<ExperienceSample>& samples() const noexcept { return samples_; }
  const std::vector<EpisodeEntry>& episodes() const noexcept { return episodes_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::filesystem::path frame_path(const ExperienceSample& s) const { return root_ / s.frame_ref; }
  Frame load_frame(const ExperienceSample& s) const;

 private:
  MemoryStore() = default;

  std::filesystem::path root_;
  std::string embedder_id_;
  std::size_t dim_ = 0;
  std::vector<EpisodeEntry> episodes_;
  std::vector<ExperienceSample> samples_;
};

}  // namespace s2p
