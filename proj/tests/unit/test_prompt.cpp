#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "s2p/annotator.hpp"
#include "s2p/embedder.hpp"
#include "s2p/error.hpp"
#include "s2p/prompt.hpp"

namespace s2p {
namespace {

AnnotatedFrame tpv_frame(std::vector<int> ids) {
  AnnotatedFrame af;
  af.base = Frame(100, 100, Rgb{50, 50, 50});
  af.setup = Setup::Tpv;
  for (int id : ids)
    af.labels.push_back({id, {10.0 + id, 20.0}, WorldPoint{0.1 * id, 0}, id == 0 ? LabelKind::RobotOrigin : LabelKind::Waypoint, true, false});
  return af;
}

ErrorCode code_of_failure(std::string_view raw, const AnnotatedFrame& af) {
  try {
    parse_answer(raw, af);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << raw;
  return ErrorCode::Range;
}

TEST(ParseAnswer, AcceptsPlainAndFencedJson) {
  const AnnotatedFrame af = tpv_frame({0, 3, 4, 9, 12});
  const auto a = parse_answer(R"({"commands":[3,9,12],"explanation":"avoids the chair"})", af);
  EXPECT_EQ(a.commands, (std::vector<int>{3, 9, 12}));
  EXPECT_EQ(a.explanation, "avoids the chair");

  const auto b = parse_answer("Sure! ```json {\"commands\":[4],\"explanation\":\"...\"} ```", af);
  EXPECT_EQ(b.commands, std::vector<int>{4});

  const auto c = parse_answer("Here you go:\n```json\n{\n  \"commands\": [9, 3],\n  \"explanation\": \"a } brace\"\n}\n```\nDone.", af);
  EXPECT_EQ(c.commands, (std::vector<int>{9, 3}));
  EXPECT_EQ(c.explanation, "a } brace");

  // A stray brace in prose before the answer is skipped.
  const auto d = parse_answer("Think {step by step}. {\"commands\":[12],\"explanation\":\"x\"}", af);
  EXPECT_EQ(d.commands, std::vector<int>{12});
}

TEST(ParseAnswer, TruncatesLongTpvSequences) {
  const AnnotatedFrame af = tpv_frame({0, 1, 2, 3, 4, 5});
  const auto a = parse_answer(R"({"commands":[1,2,3,4,5],"explanation":"e"})", af);
  EXPECT_EQ(a.commands, (std::vector<int>{1, 2, 3, 4}));
}

TEST(ParseAnswer, DistinguishesErrors) {
  const AnnotatedFrame af = tpv_frame({0, 3, 9});
  EXPECT_EQ(code_of_failure("no json here", af), ErrorCode::NoJsonFound);
  EXPECT_EQ(code_of_failure(R"({"commands":[99],"explanation":"x"})", af), ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of_failure(R"({"commands":"3","explanation":"x"})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[3]})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[],"explanation":"x"})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[3.5],"explanation":"x"})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[3],"explanation":"x","objects":[1]})", af), ErrorCode::SchemaViolation);
  try {
    parse_answer(R"({"commands":[99],"explanation":"x"})", af);
  } catch (const Error& e) {
    EXPECT_EQ(e.detail(), "99");
  }
}

TEST(ParseAnswer, FpvNeedsExactlyTwoCommands) {
  const AnnotatedFrame af = fpv_overlay(Frame(320, 240));
  EXPECT_EQ(parse_answer(R"({"commands":[2,4],"explanation":"x"})", af).commands, (std::vector<int>{2, 4}));
  EXPECT_EQ(code_of_failure(R"({"commands":[2],"explanation":"x"})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[2,4,4],"explanation":"x"})", af), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of_failure(R"({"commands":[2,10],"explanation":"x"})", af), ErrorCode::UnknownLabel);
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces{"a", "Z", " ", "{", "}", "\"", "\\", "\n", "\t", "é", "→", "```", "0", ":"};
  std::string s;
  const int n = static_cast<int>(rng.uniform_int(0, 20));
  for (int i = 0; i < n; ++i) s += pieces[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pieces.size()) - 1))];
  return s;
}

TEST(ParseAnswer, SerializeRoundTrip) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const bool fpv = trial % 2 == 0;
    std::vector<int> valid;
    PlanAnswer a;
    if (fpv) {
      for (int c = 0; c <= 9; ++c) valid.push_back(c);
      a.commands = {static_cast<int>(rng.uniform_int(0, 9)), static_cast<int>(rng.uniform_int(0, 9))};
    } else {
      for (int c = 0; c <= 30; ++c) valid.push_back(c);
      const int n = static_cast<int>(rng.uniform_int(1, 4));
      for (int i = 0; i < n; ++i) a.commands.push_back(static_cast<int>(rng.uniform_int(0, 30)));
    }
    a.explanation = random_text(rng);
    if (rng.bernoulli(0.5)) a.objects_seen = std::vector<std::string>{random_text(rng), "Mug"};
    if (rng.bernoulli(0.5)) a.dangerous_ids = std::vector<int>{valid[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(valid.size()) - 1))]};
    const auto back = parse_answer(serialize_answer(a), fpv ? Setup::Fpv : Setup::Tpv, valid);
    ASSERT_EQ(back, a) << serialize_answer(a);
  }
}

TEST(Template, PlaceholdersAndErrors) {
  const PromptTemplate t("Hi {{NAME}}, {{NAME}} and {{OTHER}}.");
  EXPECT_EQ(t.placeholders(), (std::vector<std::string>{"NAME", "OTHER"}));
  EXPECT_EQ(t.render({{"NAME", "a"}, {"OTHER", "b"}}), "Hi a, a and b.");
  try {
    t.render({{"NAME", "a"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TemplatePlaceholder);
  }
}

TEST(Template, ShippedFilesMatchDefaults) {
  const auto dir = std::filesystem::path(S2P_SOURCE_DIR) / "core" / "templates";
  const auto loaded = PromptTemplates::load_dir(dir);
  EXPECT_EQ(loaded.fpv.text(), PromptTemplates::defaults().fpv.text());
  EXPECT_EQ(loaded.tpv.text(), PromptTemplates::defaults().tpv.text());
}

class ConversationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    HistogramEmbedder emb;
    MemoryStore store = MemoryStore::create(dir_.path(), emb.id(), emb.dim());
    Rng rng(2);
    std::vector<DemoStep> steps;
    for (int i = 0; i < 10; ++i) {
      DemoStep st;
      st.frame = draw(fpv_overlay(Frame(320, 240, Rgb{static_cast<std::uint8_t>(20 * i), 80, 80})));
      st.sample.prompt = "query " + std::to_string(i);
      st.sample.answer = {{static_cast<int>(rng.uniform_int(1, 7)), 4}, "step " + std::to_string(i)};
      st.sample.setup = Setup::Fpv;
      st.sample.embedding = to_f32(emb.embed(st.frame));
      steps.push_back(std::move(st));
    }
    store.append_episode(emb.id(), std::move(steps));
    samples_ = store.samples();
  }

  testing::TempDir dir_;
  std::vector<ExperienceSample> samples_;
};

TEST_F(ConversationTest, TurnCountLaw) {
  const AnnotatedFrame live = fpv_overlay(Frame(320, 240));
  const TaskSpec task{Setup::Fpv, "Microwave"};
  for (std::size_t k : {0u, 1u, 5u, 10u}) {
    const std::span<const ExperienceSample> ctx(samples_.data(), k);
    const Conversation conv = build_conversation(ctx, dir_.path(), live, std::nullopt, task);
    EXPECT_EQ(conv.turns.size(), 2 * k + 1);
    validate(conv);
    for (std::size_t i = 0; i < conv.turns.size(); ++i) {
      EXPECT_EQ(conv.turns[i].role, i % 2 == 0 ? Role::User : Role::Model);
      EXPECT_EQ(conv.turns[i].images.size(), i % 2 == 0 ? 1u : 0u);
    }
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_EQ(conv.turns[2 * i].text, samples_[i].prompt);
      EXPECT_EQ(parse_answer(conv.turns[2 * i + 1].text, Setup::Fpv, conv.valid_ids), samples_[i].answer);
    }
  }
}

TEST_F(ConversationTest, LiveTurnCarriesEpisodicTextAndFormat) {
  const AnnotatedFrame live = fpv_overlay(Frame(320, 240));
  const std::string episodic = "Compass: Fridge at 15\nPrevious commands: [3, 4]";
  const Conversation conv =
      build_conversation({}, dir_.path(), live, episodic, TaskSpec{Setup::Fpv, "Microwave"});
  const std::string& text = conv.turns.back().text;
  EXPECT_NE(text.find(episodic), std::string::npos);
  EXPECT_NE(text.find("Microwave"), std::string::npos);
  EXPECT_NE(text.find("JSON format"), std::string::npos);
  EXPECT_EQ(conv.valid_ids.size(), 10u);
}

TEST_F(ConversationTest, SetupMismatchAndDeterminism) {
  const AnnotatedFrame live = tpv_frame({0, 1, 2});
  try {
    build_conversation(std::span<const ExperienceSample>(samples_.data(), 1), dir_.path(), live, std::nullopt,
                       TaskSpec{Setup::Tpv, "goal"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SetupMismatch);
  }
  const AnnotatedFrame fpv = fpv_overlay(Frame(320, 240));
  const std::span<const ExperienceSample> ctx(samples_.data(), 3);
  const auto a = build_conversation(ctx, dir_.path(), fpv, std::nullopt, TaskSpec{Setup::Fpv, "Mug"});
  const auto b = build_conversation(ctx, dir_.path(), fpv, std::nullopt, TaskSpec{Setup::Fpv, "Mug"});
  ASSERT_EQ(a.turns.size(), b.turns.size());
  for (std::size_t i = 0; i < a.turns.size(); ++i) {
    EXPECT_EQ(a.turns[i].text, b.turns[i].text);
    for (std::size_t j = 0; j < a.turns[i].images.size(); ++j)
      EXPECT_EQ(a.turns[i].images[j].fingerprint(), b.turns[i].images[j].fingerprint());
  }
}

TEST(Conversation, ValidateRejectsBrokenAlternation) {
  Conversation c;
  EXPECT_THROW(validate(c), Error);
  c.turns.push_back({Role::User, "q", {}});
  validate(c);
  append_reprompt(c, "bad", "NO_JSON_FOUND");
  ASSERT_EQ(c.turns.size(), 3u);
  EXPECT_EQ(c.turns[1].role, Role::Model);
  EXPECT_EQ(c.turns[1].text, "bad");
  validate(c);
  c.turns.push_back({Role::Model, "a", {}});
  EXPECT_THROW(validate(c), Error);
}

}  // namespace
}  // namespace s2p
