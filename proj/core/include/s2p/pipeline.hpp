#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "s2p/config.hpp"
#include "s2p/embedder.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/prompt.hpp"
#include "s2p/sampler.hpp"
#include "s2p/vlm.hpp"

namespace s2p {

struct PlanRecord {
  PlanAnswer answer;
  std::string raw;
  std::vector<std::string> context_ids;
  std::size_t turns = 0;
  bool reprompted = false;
};

/// Retrieval, prompting, querying and parsing for one live frame. Without a
/// memory (or with k_icl = 0) the query is zero-shot.
class Planner {
 public:
  Planner(const MemoryStore* memory, const Embedder* embedder, RunConfig cfg, SampleFilter filter = {},
          PromptTemplates templates = PromptTemplates::defaults());

  /// A parse failure is answered once with a corrective turn; a second
  /// failure propagates the parse error.
  PlanRecord plan(const AnnotatedFrame& af, const std::optional<std::string>& episodic, const TaskSpec& task,
                  Backend& backend) const;

  void set_filter(SampleFilter filter) { filter_ = std::move(filter); }
  const RunConfig& config() const noexcept { return cfg_; }

 private:
  const MemoryStore* memory_;
  const Embedder* embedder_;
  RunConfig cfg_;
  SampleFilter filter_;
  PromptTemplates templates_;
};

/// Builds the backend for one query; oracle backends bind to the live scene.
using BackendFactory = std::function<std::shared_ptr<Backend>(const OracleContext&)>;

/// "oracle", "random" (seeded with `seed`), "http" (environment), or
/// "cassette:<path>". Shared backends are created once. A non-empty
/// `record_to` appends every exchange to that cassette.
BackendFactory make_backend_factory(const std::string& id, std::uint64_t seed,
                                    const std::filesystem::path& record_to = {});

}  // namespace s2p
