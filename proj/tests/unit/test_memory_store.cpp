#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstring>

#include "fixtures.hpp"
#include "s2p/embedder.hpp"
#include "s2p/error.hpp"
#include "s2p/image_io.hpp"
#include "s2p/memory_store.hpp"
#include "s2p/util.hpp"

namespace s2p {
namespace {

namespace fs = std::filesystem;

std::vector<DemoStep> make_episode(Rng& rng, const Embedder& emb, int n, Setup setup = Setup::Fpv) {
  std::vector<DemoStep> out;
  for (int i = 0; i < n; ++i) {
    DemoStep st;
    st.frame = testing::noise_frame(rng);
    st.sample.prompt = "step " + std::to_string(i) + " \"quoted\" \n newline";
    st.sample.answer.commands = {static_cast<int>(rng.uniform_int(1, 7)), 4};
    st.sample.answer.explanation = "A microwave is visible on the left.";
    if (i % 2 == 0) st.sample.answer.objects_seen = std::vector<std::string>{"Microwave"};
    st.sample.setup = setup;
    st.sample.scenario = Scenario::H;
    st.sample.target_object = "Microwave";
    st.sample.room_id = "kitchen-0000abcd";
    st.sample.embedding = to_f32(emb.embed(st.frame));
    out.push_back(std::move(st));
  }
  return out;
}

TEST(MemoryStore, RoundTripIsLossless) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(1);
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  auto episode = make_episode(rng, emb, 5);
  std::vector<Frame> frames;
  for (const auto& s : episode) frames.push_back(s.frame);
  const auto delta = store.append_episode(emb.id(), std::move(episode));
  EXPECT_EQ(delta.added, 5u);
  EXPECT_EQ(delta.total_episodes, 1u);

  const MemoryStore loaded = MemoryStore::load(dir.path());
  ASSERT_EQ(loaded.samples().size(), 5u);
  EXPECT_EQ(loaded.samples(), store.samples());
  EXPECT_EQ(loaded.episodes(), store.episodes());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& a = loaded.samples()[i].embedding;
    const auto& b = store.samples()[i].embedding;
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
    EXPECT_EQ(loaded.load_frame(loaded.samples()[i]).data().size(), frames[i].data().size());
    EXPECT_TRUE(std::equal(frames[i].data().begin(), frames[i].data().end(),
                           loaded.load_frame(loaded.samples()[i]).data().begin()));
  }
}

TEST(MemoryStore, AppendsAreAdditive) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(2);
  MemoryStore store = MemoryStore::open(dir.path(), emb);
  store.append_episode(emb.id(), make_episode(rng, emb, 3));
  const auto d = store.append_episode(emb.id(), make_episode(rng, emb, 4));
  EXPECT_EQ(d.total_episodes, 2u);
  EXPECT_EQ(d.total_samples, 7u);
  const MemoryStore reopened = MemoryStore::open(dir.path(), emb);
  EXPECT_EQ(reopened.size(), 7u);
  EXPECT_EQ(reopened.episodes().size(), 2u);
}

TEST(MemoryStore, RejectsBadInput) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(3);
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  auto expect_code = [](ErrorCode code, auto&& fn) {
    try {
      fn();
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code(ErrorCode::EmptyEpisode, [&] { store.append_episode(emb.id(), {}); });
  expect_code(ErrorCode::EmbedderMismatch, [&] { store.append_episode("remote-vit", make_episode(rng, emb, 1)); });
  auto bad = make_episode(rng, emb, 1);
  bad[0].sample.embedding.resize(8);
  expect_code(ErrorCode::DimMismatch, [&] { store.append_episode(emb.id(), std::move(bad)); });
  store.append_episode(emb.id(), make_episode(rng, emb, 2));
  expect_code(ErrorCode::EmbedderMismatch, [&] { MemoryStore::load(dir.path(), "remote-vit"); });
}

TEST(MemoryStore, MissingFrameIsReported) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(4);
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  store.append_episode(emb.id(), make_episode(rng, emb, 5));
  fs::remove(store.frame_path(store.samples()[4]));
  try {
    MemoryStore::load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFrame);
  }
}

TEST(MemoryStore, CorruptManifestIsReported) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  MemoryStore::create(dir.path(), emb.id(), emb.dim());
  write_text_file(dir / "manifest.json", "{not json");
  try {
    MemoryStore::load(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptManifest);
  }
}

// Kills a child process at a commit stage of an append and checks the store
// left behind.
void crash_at(const std::string& stage) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(5);
  {
    MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
    store.append_episode(emb.id(), make_episode(rng, emb, 3));
  }
  const MemoryStore before = MemoryStore::load(dir.path());
  auto next = make_episode(rng, emb, 4);

  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    MemoryStore store = MemoryStore::load(dir.path());
    store.append_episode(emb.id(), std::move(next), [&](std::string_view s) {
      if (s == stage) _exit(0);
    });
    _exit(3);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  ASSERT_EQ(WEXITSTATUS(status), 0) << "hook for " << stage << " never ran";

  const MemoryStore after = MemoryStore::load(dir.path());
  EXPECT_EQ(after.samples(), before.samples()) << stage;
  EXPECT_EQ(after.episodes(), before.episodes()) << stage;

  // The store accepts further appends after the interruption.
  MemoryStore reopened = MemoryStore::load(dir.path());
  reopened.append_episode(emb.id(), make_episode(rng, emb, 2));
  EXPECT_EQ(MemoryStore::load(dir.path()).size(), 5u);
}

TEST(MemoryStore, CrashBeforeCommitKeepsPriorState) {
  for (const char* stage : {"files-written", "temp-written", "sidecar-renamed"}) crash_at(stage);
}

TEST(MemoryStore, RebuildEmbeddings) {
  testing::TempDir dir;
  HistogramEmbedder emb;
  Rng rng(6);
  MemoryStore store = MemoryStore::create(dir.path(), emb.id(), emb.dim());
  store.append_episode(emb.id(), make_episode(rng, emb, 3));
  const auto original = store.samples();
  store.rebuild_embeddings(emb);
  EXPECT_EQ(MemoryStore::load(dir.path()).samples(), original);
}

TEST(Scenario, StringRoundTrip) {
  for (Scenario s : {Scenario::A, Scenario::D, Scenario::H, Scenario::O})
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
  EXPECT_THROW(scenario_from_string("Z"), Error);
}

}  // namespace
}  // namespace s2p
