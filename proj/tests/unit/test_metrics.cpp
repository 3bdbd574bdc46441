#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "s2p/error.hpp"
#include "s2p/metrics.hpp"
#include "s2p/rng.hpp"

namespace s2p {
namespace {

EpisodeResult one_query(std::vector<int> p, std::vector<int> g, bool safe = true) {
  EpisodeResult r;
  r.sequences.push_back({std::move(p), std::move(g), safe});
  r.safe = safe;
  r.dangerous_hit = !safe;
  return r;
}

TEST(Metrics, HandCases) {
  EXPECT_DOUBLE_EQ(episode_term(one_query({3, 9, 12}, {3, 9, 12})), 1.0);
  EXPECT_DOUBLE_EQ(episode_term(one_query({3, 9}, {3, 9, 12, 14})), 0.5);
  EXPECT_DOUBLE_EQ(episode_term(one_query({3, 9}, {3, 9}, false)), 0.0);
  // Positional: a shifted sequence scores nothing, set matching scores it.
  EXPECT_DOUBLE_EQ(episode_term(one_query({9, 3}, {3, 9})), 0.0);
  EXPECT_DOUBLE_EQ(episode_term(one_query({9, 3}, {3, 9}), MatchMode::Set), 1.0);
  EXPECT_DOUBLE_EQ(episode_term(EpisodeResult{}), 0.0);
}

TEST(Metrics, DangerIsAnIndicator) {
  EpisodeResult r = one_query({1}, {1}, false);
  r.sequences.push_back({{2}, {2}, false});
  const std::vector<EpisodeResult> rs{r, one_query({1}, {1})};
  EXPECT_EQ(danger_count(rs), 1);
}

TEST(Metrics, SrSpl) {
  EpisodeResult a;
  a.success = true;
  a.path_length = 4.0;
  a.shortest_length = 2.0;
  EpisodeResult b;
  b.success = true;
  b.path_length = 3.0;
  b.shortest_length = 3.0;
  EpisodeResult c;
  const std::vector<EpisodeResult> rs{a, b, c};
  const auto m = sr_spl(rs);
  EXPECT_NEAR(m.sr, 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.spl, 100.0 * 1.5 / 3.0, 1e-12);

  const std::vector<EpisodeResult> fails{c, c};
  EXPECT_DOUBLE_EQ(sr_spl(fails).sr, 0.0);
  EXPECT_DOUBLE_EQ(sr_spl(fails).spl, 0.0);

  EpisodeResult missing;
  missing.success = true;
  const std::vector<EpisodeResult> bad{missing};
  try {
    sr_spl(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLengths);
  }
  EXPECT_THROW(sr_spl(std::span<const EpisodeResult>()), Error);
  EXPECT_THROW(trajectory_score(std::span<const EpisodeResult>()), Error);
}

EpisodeResult random_result(Rng& rng) {
  EpisodeResult r;
  const int queries = static_cast<int>(rng.uniform_int(0, 4));
  r.safe = true;
  for (int q = 0; q < queries; ++q) {
    SequenceRecord s;
    const int np = static_cast<int>(rng.uniform_int(0, 4));
    const int ng = static_cast<int>(rng.uniform_int(0, 4));
    for (int i = 0; i < np; ++i) s.predicted.push_back(static_cast<int>(rng.uniform_int(1, 6)));
    for (int i = 0; i < ng; ++i) s.ground_truth.push_back(static_cast<int>(rng.uniform_int(1, 6)));
    s.safe = rng.uniform() > 0.15;
    r.safe = r.safe && s.safe;
    r.sequences.push_back(s);
  }
  r.dangerous_hit = !r.safe || rng.uniform() < 0.05;
  r.success = rng.uniform() < 0.6;
  const double l = rng.uniform(0.5, 5.0);
  r.shortest_length = l;
  r.path_length = l * rng.uniform(0.8, 3.0);
  return r;
}

TEST(Metrics, MatchNaiveReimplementation) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EpisodeResult> rs(static_cast<std::size_t>(rng.uniform_int(1, 30)));
    for (auto& r : rs) r = random_result(rng);
    EXPECT_NEAR(trajectory_score(rs), testing::naive_ts(rs), 1e-9);
    EXPECT_NEAR(trajectory_score(rs, MatchMode::Set), testing::naive_ts(rs, true), 1e-9);
    EXPECT_EQ(danger_count(rs), testing::naive_d(rs));
    const auto m = sr_spl(rs);
    EXPECT_NEAR(m.sr, testing::naive_sr(rs), 1e-9);
    EXPECT_NEAR(m.spl, testing::naive_spl(rs), 1e-9);
    EXPECT_LE(m.spl, m.sr + 1e-9);
  }
}

TEST(Metrics, TsIsAdditive) {
  Rng rng(5);
  std::vector<EpisodeResult> a(10);
  std::vector<EpisodeResult> b(7);
  for (auto& r : a) r = random_result(rng);
  for (auto& r : b) r = random_result(rng);
  std::vector<EpisodeResult> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  EXPECT_NEAR(trajectory_score(ab), trajectory_score(a) + trajectory_score(b), 1e-12);
  EXPECT_LE(trajectory_score(ab), static_cast<double>(ab.size()));
}

TEST(Metrics, JsonRoundTripAndTraceCsv) {
  Rng rng(6);
  EpisodeResult r = random_result(rng);
  r.episode_id = "e1";
  r.room_id = "room-00000001";
  r.target = "Mug";
  const nlohmann::json j = r;
  EXPECT_FALSE(j.contains("trace"));
  const EpisodeResult back = j.get<EpisodeResult>();
  EXPECT_EQ(back, r);

  std::ostringstream csv;
  const std::vector<TraceSample> trace{{0.0, {0, 0, 0}, 0}, {0.05, {0.01, 0, 0}, 0}};
  write_trace_csv(csv, trace);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "tick,t,x,y,theta,active");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

}  // namespace
}  // namespace s2p
