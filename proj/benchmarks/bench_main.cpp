#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "s2p/annotator.hpp"
#include "s2p/controller.hpp"
#include "s2p/embedder.hpp"
#include "s2p/oracle.hpp"
#include "s2p/prompt.hpp"
#include "s2p/rng.hpp"
#include "s2p/sampler.hpp"
#include "s2p/tpv_world.hpp"

namespace {

using namespace s2p;

std::vector<float> unit_vector(Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  double n = 0.0;
  for (auto& x : v) {
    x = static_cast<float>(rng.uniform(-1.0, 1.0));
    n += static_cast<double>(x) * x;
  }
  for (auto& x : v) x = static_cast<float>(x / std::sqrt(n));
  return v;
}

// Retrieval cost grows with pool size N and k (O(k * N * picked)).
void BM_MmrRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 96;
  Rng rng(1);
  std::vector<ExperienceSample> pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    pool[i].id = "s" + std::to_string(i);
    pool[i].embedding = unit_vector(rng, dim);
  }
  std::vector<const ExperienceSample*> ptrs;
  for (const auto& s : pool) ptrs.push_back(&s);
  const auto qf = unit_vector(rng, dim);
  const std::vector<double> q(qf.begin(), qf.end());
  for (auto _ : state) benchmark::DoNotOptimize(mmr_rank(q, ptrs, 10, 0.7));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_MmrRank)->Arg(64)->Arg(512)->Arg(4096);

void BM_HistogramEmbed(benchmark::State& state) {
  Rng rng(2);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(kTpvFrameWidth) * kTpvFrameHeight * 3);
  for (auto& b : px) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const Frame frame(kTpvFrameWidth, kTpvFrameHeight, std::move(px));
  const HistogramEmbedder emb;
  for (auto _ : state) benchmark::DoNotOptimize(emb.embed(frame));
}
BENCHMARK(BM_HistogramEmbed);

void BM_TpvKeypoints(benchmark::State& state) {
  Rng rng(3);
  const TpvScene scene = generate_tpv_scene(TpvSceneSpec{}, rng);
  const FloorMask mask = capture_floor_mask(scene);
  const PixelPoint robot = project(scene.homography, scene.robot.position());
  for (auto _ : state) benchmark::DoNotOptimize(tpv_keypoints(robot, mask, RingSpec{}, scene.homography));
}
BENCHMARK(BM_TpvKeypoints);

void BM_TpvOraclePlan(benchmark::State& state) {
  Rng rng(4);
  const TpvScene scene = generate_tpv_scene(TpvSceneSpec{}, rng);
  const FloorMask mask = capture_floor_mask(scene);
  const AnnotatedFrame af = tpv_annotate(scene, TpvRenderer(scene).render(scene.robot), mask, RingSpec{}, -1);
  const TpvOracle oracle(scene);
  for (auto _ : state) benchmark::DoNotOptimize(oracle.plan(scene.robot, af.labels));
}
BENCHMARK(BM_TpvOraclePlan);

void BM_PdTrackOneMeter(benchmark::State& state) {
  const PdController ctrl;
  const std::vector<WorldPoint> path{{1.0, 0.0}};
  for (auto _ : state) benchmark::DoNotOptimize(pd_track({0, 0, 0}, path, ctrl));
}
BENCHMARK(BM_PdTrackOneMeter);

void BM_ParseFencedAnswer(benchmark::State& state) {
  const std::vector<int> valid{0, 3, 4, 9, 12};
  const std::string raw =
      "Plan:\n```json\n{\"commands\": [9, 3, 12], \"explanation\": \"keeps to open floor\"}\n```\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_answer(raw, Setup::Tpv, valid));
}
BENCHMARK(BM_ParseFencedAnswer);

}  // namespace

BENCHMARK_MAIN();
