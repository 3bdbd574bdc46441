#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "s2p/embedder.hpp"
#include "s2p/error.hpp"
#include "s2p/sampler.hpp"

namespace s2p {
namespace {

double dot(const Embedding& a, const Embedding& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(HistogramEmbedder, HandComputedHistogram) {
  // Pixels (0,0,0), (255,255,255), (8,16,250): per channel 32 bins of width 8.
  Frame f(3, 1, std::vector<std::uint8_t>{0, 0, 0, 255, 255, 255, 8, 16, 250});
  Embedding want(96, 0.0);
  want[0] += 1;   // r 0
  want[31] += 1;  // r 255
  want[1] += 1;   // r 8
  want[32 + 0] += 1;
  want[32 + 31] += 1;
  want[32 + 2] += 1;  // g 16
  want[64 + 0] += 1;
  want[64 + 31] += 1;
  want[64 + 31] += 1;  // b 250
  double n = 0.0;
  for (double x : want) n += x * x;
  for (double& x : want) x /= std::sqrt(n);

  const auto got = HistogramEmbedder().embed(f);
  ASSERT_EQ(got.size(), 96u);
  for (std::size_t i = 0; i < 96; ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << i;
}

TEST(HistogramEmbedder, UnitNormDeterministicAndContrast) {
  HistogramEmbedder emb;
  Rng rng(1);
  const Frame f = testing::noise_frame(rng);
  const auto a = emb.embed(f);
  const auto b = emb.embed(f);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(dot(a, a), 1.0, 1e-9);
  EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);

  const auto black = emb.embed(Frame(16, 16, Rgb{0, 0, 0}));
  const auto white = emb.embed(Frame(16, 16, Rgb{255, 255, 255}));
  EXPECT_LT(cosine(black, white), 0.01);
}

TEST(Embedder, FactoryAndNormalize) {
  EXPECT_EQ(make_embedder("hist96")->dim(), 96u);
  Embedding zero(3, 0.0);
  EXPECT_THROW(normalize(zero), Error);
  Embedding v{3, 4};
  normalize(v);
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
}

TEST(RemoteEmbedder, UnreachableIsBackendUnavailable) {
  RemoteEmbedder emb("http://127.0.0.1:1/embed", 4, RetryPolicy{1, std::chrono::milliseconds(1), std::chrono::milliseconds(200)});
  try {
    emb.embed(Frame(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
  }
}

}  // namespace
}  // namespace s2p
