#include "s2p/pipeline.hpp"

#include "s2p/annotator.hpp"
#include "s2p/error.hpp"

namespace s2p {

Planner::Planner(const MemoryStore* memory, const Embedder* embedder, RunConfig cfg, SampleFilter filter,
                 PromptTemplates templates)
    : memory_(memory), embedder_(embedder), cfg_(validate_config(std::move(cfg))), filter_(std::move(filter)),
      templates_(std::move(templates)) {
  if (memory_ && !embedder_) throw Error(ErrorCode::InvalidArgument, "memory without embedder");
}

PlanRecord Planner::plan(const AnnotatedFrame& af, const std::optional<std::string>& episodic,
                         const TaskSpec& task, Backend& backend) const {
  std::vector<ExperienceSample> context;
  if (memory_ && cfg_.k_icl > 0 && memory_->size() > 0)
    context = build_context(draw(af), *memory_, *embedder_, cfg_, af.setup, filter_);
  const auto root = memory_ ? memory_->root() : std::filesystem::path();
  Conversation conv = build_conversation(context, root, af, episodic, task, templates_);

  PlanRecord rec;
  for (const auto& s : context) rec.context_ids.push_back(s.id);
  rec.raw = backend.complete(conv);
  try {
    rec.answer = parse_answer(rec.raw, conv.setup, conv.valid_ids);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoJsonFound && e.code() != ErrorCode::SchemaViolation &&
        e.code() != ErrorCode::UnknownLabel)
      throw;
    append_reprompt(conv, rec.raw, e.what());
    rec.reprompted = true;
    rec.raw = backend.complete(conv);
    rec.answer = parse_answer(rec.raw, conv.setup, conv.valid_ids);
  }
  rec.turns = conv.turns.size();
  return rec;
}

BackendFactory make_backend_factory(const std::string& id, std::uint64_t seed,
                                    const std::filesystem::path& record_to) {
  if (id == "oracle") {
    if (record_to.empty())
      return [](const OracleContext& ctx) { return std::make_shared<OracleBackend>(ctx); };
    return [record_to](const OracleContext& ctx) {
      return std::make_shared<CassetteRecorder>(std::make_shared<OracleBackend>(ctx), record_to);
    };
  }
  std::shared_ptr<Backend> shared;
  if (id == "random") {
    shared = std::make_shared<RandomBackend>(seed);
  } else if (id == "http") {
    shared = std::make_shared<HttpBackend>(HttpBackend::options_from_env());
  } else if (id.rfind("cassette:", 0) == 0) {
    shared = std::make_shared<CassettePlayer>(id.substr(9));
  } else {
    throw Error(ErrorCode::InvalidArgument, "backend '" + id + "'");
  }
  if (!record_to.empty()) shared = std::make_shared<CassetteRecorder>(shared, record_to);
  return [shared](const OracleContext&) { return shared; };
}

}  // namespace s2p
