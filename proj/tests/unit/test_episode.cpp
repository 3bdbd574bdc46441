#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "s2p/annotator.hpp"
#include "s2p/episode.hpp"
#include "s2p/error.hpp"
#include "s2p/pipeline.hpp"
#include "s2p/suite.hpp"

namespace s2p {
namespace {

/// Answers from a fixed script, one reply per call.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string id() const override { return "scripted"; }
  std::vector<std::size_t> turn_counts;

 protected:
  std::string do_complete(const Conversation& conv) override {
    turn_counts.push_back(conv.turns.size());
    return replies_.at(turn_counts.size() - 1);
  }

 private:
  std::vector<std::string> replies_;
};

TEST(Planner, RepromptsOnceOnParseFailure) {
  const Planner planner(nullptr, nullptr, RunConfig{});
  const AnnotatedFrame af = fpv_overlay(Frame(320, 240));
  const TaskSpec task{Setup::Fpv, "Mug"};
  ScriptedBackend ok({"I think 4", R"({"commands":[4,4],"explanation":"ahead"})"});
  const PlanRecord rec = planner.plan(af, std::nullopt, task, ok);
  EXPECT_TRUE(rec.reprompted);
  EXPECT_EQ(rec.answer.commands, (std::vector<int>{4, 4}));
  EXPECT_EQ(ok.turn_counts, (std::vector<std::size_t>{1, 3}));

  ScriptedBackend bad({"nope", R"({"commands":[42,4],"explanation":"x"})"});
  try {
    planner.plan(af, std::nullopt, task, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownLabel);
  }
}

TEST(Planner, InjectsRetrievedDemonstrations) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  RunConfig cfg;
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  synthesize_memory(store, Setup::Fpv, 3, 1, emb, cfg);
  cfg.k_icl = 4;
  const Planner planner(&store, &emb, cfg);
  ScriptedBackend b({R"({"commands":[3,4],"explanation":"x"})"});
  const PlanRecord rec = planner.plan(fpv_overlay(Frame(320, 240)), std::nullopt, TaskSpec{Setup::Fpv, "Mug"}, b);
  EXPECT_EQ(rec.turns, 9u);
  EXPECT_EQ(rec.context_ids.size(), 4u);
}

TEST(Episode, OracleFpvEpisodeSucceedsOnShortestPath) {
  Rng rng(8);
  FpvScene scene = generate_fpv_scene(FpvSceneSpec{.room = RoomType::Living, .target = std::nullopt}, rng);
  const double shortest = shortest_path_length(scene);
  const Planner planner(nullptr, nullptr, RunConfig{});
  EpisodeOptions opts;
  opts.episode_id = "e";
  std::vector<StepTelemetry> telemetry;
  opts.on_step = [&](const StepTelemetry& t) { telemetry.push_back(t); };
  const EpisodeResult r = run_fpv_episode(scene, vlm_plan_fn(planner, make_backend_factory("oracle", 0)), opts);
  EXPECT_TRUE(r.success);
  EXPECT_NEAR(*r.path_length, shortest, 1e-9);
  EXPECT_EQ(r.sequences.back().predicted, (std::vector<int>{0, 0}));
  EXPECT_EQ(telemetry.size(), static_cast<std::size_t>(r.steps));
  EXPECT_EQ(r.setup, Setup::Fpv);
  EXPECT_FALSE(r.target.empty());
}

TEST(Episode, AbortEndsTheEpisode) {
  Rng rng(9);
  FpvScene scene = generate_fpv_scene(FpvSceneSpec{.room = RoomType::Kitchen, .target = std::nullopt}, rng);
  const Planner planner(nullptr, nullptr, RunConfig{});
  std::atomic<bool> abort{true};
  EpisodeOptions opts;
  opts.abort = &abort;
  const EpisodeResult r = run_fpv_episode(scene, vlm_plan_fn(planner, make_backend_factory("oracle", 0)), opts);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.steps, 0);
}

TEST(Episode, OracleTpvEpisodeReachesGoalSafely) {
  Rng rng(10);
  TpvScene scene = generate_tpv_scene(TpvSceneSpec{}, rng);
  const Planner planner(nullptr, nullptr, RunConfig{});
  const EpisodeResult r = tpv_replan_loop(scene, vlm_plan_fn(planner, make_backend_factory("oracle", 0)), EpisodeOptions{});
  EXPECT_TRUE(r.success);
  EXPECT_FALSE(r.dangerous_hit);
  EXPECT_FALSE(r.collided);
  ASSERT_FALSE(r.sequences.empty());
  for (const auto& s : r.sequences) EXPECT_EQ(s.predicted, s.ground_truth);
  EXPECT_DOUBLE_EQ(episode_term(r), 1.0);
  EXPECT_GE(*r.path_length, *r.shortest_length * 0.8);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i].t, r.trace[i - 1].t);
}

TEST(Episode, CassetteReplayReproducesTheEpisode) {
  testing::TempDir dir;
  const auto tape = dir / "tape.jsonl";
  Rng rng(11);
  const TpvScene scene = generate_tpv_scene(TpvSceneSpec{}, rng);
  const Planner planner(nullptr, nullptr, RunConfig{});
  const EpisodeResult recorded =
      tpv_replan_loop(scene, vlm_plan_fn(planner, make_backend_factory("random", 5, tape)), EpisodeOptions{});
  const EpisodeResult replayed = tpv_replan_loop(
      scene, vlm_plan_fn(planner, make_backend_factory("cassette:" + tape.string(), 0)), EpisodeOptions{});
  EXPECT_EQ(replayed, recorded);
}

TEST(Demo, FpvDemonstrationCarriesPlanAndEndsWithDone) {
  Rng rng(12);
  HistogramEmbedder emb;
  const auto steps = record_fpv_demo(generate_fpv_scene(FpvSceneSpec{.room = RoomType::Bedroom, .target = std::nullopt}, rng),
                                     emb, RunConfig{});
  ASSERT_GE(steps.size(), 2u);
  // Each answer is the oracle's executed command plus its forecast.
  for (std::size_t i = 0; i < steps.size(); ++i) {
    ASSERT_EQ(steps[i].sample.answer.commands.size(), 2u);
    if (i + 1 < steps.size()) EXPECT_NE(steps[i].sample.answer.commands[0], 0) << "DONE only on the final step";
  }
  EXPECT_EQ(steps.back().sample.answer.commands, (std::vector<int>{0, 0}));
  for (const auto& s : steps) {
    EXPECT_EQ(s.sample.setup, Setup::Fpv);
    EXPECT_EQ(s.sample.embedding.size(), emb.dim());
    EXPECT_FALSE(s.sample.answer.explanation.empty());
  }
}

TEST(Demo, SynthesizedMemoryHasOneEpisodePerDemonstration) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  synthesize_memory(store, Setup::Fpv, 25, 3, emb, RunConfig{});
  EXPECT_EQ(store.episodes().size(), 25u);
  synthesize_memory(store, Setup::Tpv, 3, 3, emb, RunConfig{});
  EXPECT_EQ(MemoryStore::load(dir.path()).episodes().size(), 28u);
  const auto& train = fpv_training_objects();
  const auto& test = fpv_test_objects();
  for (const auto& t : test) EXPECT_EQ(std::find(train.begin(), train.end(), t), train.end());
}

TEST(Suite, EmptySuiteIsEmptyReport) {
  SuiteSpec spec;
  spec.n_episodes = 0;
  spec.k_icl = 0;
  const SuiteReport r = run_suite(spec, nullptr, nullptr);
  EXPECT_EQ(r.n, 0u);
  for (const auto& run : r.runs) EXPECT_TRUE(run.episodes.empty());
  EXPECT_NO_THROW(report_to_json(r).dump());
}

TEST(Suite, OrderStableAndTableColumns) {
  SuiteSpec spec;
  spec.backend = "random";
  spec.k_icl = 0;
  spec.n_episodes = 4;
  spec.repeats = 2;
  spec.seed = 3;
  spec.workers = 3;
  const SuiteReport a = run_suite(spec, nullptr, nullptr);
  spec.workers = 1;
  const SuiteReport b = run_suite(spec, nullptr, nullptr);
  ASSERT_EQ(a.runs.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.runs[i].episodes, b.runs[i].episodes);
  // Rooms stay fixed across runs; only the seed changes.
  for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(a.runs[0].episodes[e].room_id, a.runs[1].episodes[e].room_id);
  const std::string table = format_table(std::span<const SuiteReport>(&a, 1));
  for (const char* col : {"Mode", "CL", "Scenario", "TS(/N)", "D(/N)"}) EXPECT_NE(table.find(col), std::string::npos);
  EXPECT_NE(table.find("random zero-shot"), std::string::npos);
  EXPECT_NE(table.find("(/4)"), std::string::npos);
}

TEST(Suite, MissingMemoryAndStrictJson) {
  SuiteSpec spec;
  spec.k_icl = 10;
  spec.n_episodes = 1;
  try {
    run_suite(spec, nullptr, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMemory);
  }
  const nlohmann::json j = suite_to_json(spec);
  EXPECT_EQ(suite_to_json(suite_from_json(j)), j);
  nlohmann::json bad = j;
  bad["bogus"] = 1;
  EXPECT_THROW(suite_from_json(bad), Error);
}

}  // namespace
}  // namespace s2p
