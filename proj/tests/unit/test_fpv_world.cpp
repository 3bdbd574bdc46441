#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "s2p/error.hpp"
#include "s2p/fpv_world.hpp"
#include "s2p/oracle.hpp"

namespace s2p {
namespace {

using testing::open_room;

Cell add(Cell a, Cell d, int times = 1) { return {a.x + d.x * times, a.y + d.y * times}; }

TEST(FpvWorld, TwelveThirtyDegreeTurnsAreIdentity) {
  FpvScene s = open_room(8, 8, {3, 3}, 0);
  s.objects.push_back({"Microwave", {6, 6}, Elevation::Mid});
  s.target = "Microwave";
  const FpvScene start = s;
  for (int i = 0; i < 12; ++i) {
    const auto r = fpv_step(s, 3);
    EXPECT_EQ(r.event, FpvEvent::Rotated);
    s = r.scene;
  }
  EXPECT_EQ(s, start);
  for (int i = 0; i < 4; ++i) s = fpv_step(s, 7).scene;
  EXPECT_EQ(s, start);
}

TEST(FpvWorld, ForwardOffsets) {
  EXPECT_EQ(forward_offset(0), (Cell{1, 0}));
  EXPECT_EQ(forward_offset(90), (Cell{0, 1}));
  EXPECT_EQ(forward_offset(180), (Cell{-1, 0}));
  EXPECT_EQ(forward_offset(270), (Cell{0, -1}));
  EXPECT_EQ(forward_offset(30), forward_offset(60));
  EXPECT_EQ(forward_offset(30), (Cell{1, 1}));
  EXPECT_EQ(forward_offset(330), (Cell{1, -1}));
}

TEST(FpvWorld, MovesAndBlocks) {
  FpvScene s = open_room(6, 6, {1, 1}, 180);
  s.objects.push_back({"Mug", {3, 2}, Elevation::Mid});
  s.target = "Mug";
  auto r = fpv_step(s, 4);
  EXPECT_EQ(r.event, FpvEvent::Blocked);
  EXPECT_EQ(r.scene, s);

  s.agent = {{2, 1}, 0, Pitch::Level};
  r = fpv_step(s, 4);
  EXPECT_EQ(r.event, FpvEvent::Moved);
  EXPECT_EQ(r.scene.agent.cell, (Cell{3, 1}));
  EXPECT_DOUBLE_EQ(r.moved, 1.0);

  // Diagonal past the occupied corner (3, 2) is illegal.
  s.agent = {{2, 2}, 300, Pitch::Level};
  EXPECT_EQ(fpv_step(s, 4).event, FpvEvent::Blocked);
  s.agent = {{1, 1}, 30, Pitch::Level};
  r = fpv_step(s, 4);
  EXPECT_EQ(r.event, FpvEvent::Moved);
  EXPECT_NEAR(r.moved, std::sqrt(2.0), 1e-12);
}

TEST(FpvWorld, PitchSaturates) {
  FpvScene s = open_room(6, 6, {2, 2}, 0);
  s.objects.push_back({"Mug", {4, 4}, Elevation::Mid});
  s.target = "Mug";
  s = fpv_step(s, 8).scene;
  EXPECT_EQ(s.agent.pitch, Pitch::Up);
  EXPECT_EQ(fpv_step(s, 8).event, FpvEvent::Saturated);
  s = fpv_step(fpv_step(s, 9).scene, 9).scene;
  EXPECT_EQ(s.agent.pitch, Pitch::Down);
  EXPECT_EQ(fpv_step(s, 9).event, FpvEvent::Saturated);
}

TEST(FpvWorld, VisibilityRules) {
  FpvScene s = open_room(10, 10, {1, 5}, 0);
  s.objects.push_back({"Mug", {4, 5}, Elevation::Mid});
  s.target = "Mug";
  EXPECT_TRUE(is_visible(s, s.objects[0]));
  s.objects[0].cell = {5, 5};  // beyond range
  EXPECT_FALSE(is_visible(s, s.objects[0]));
  s.objects[0].cell = {1, 8};  // 90 degrees to the left
  EXPECT_FALSE(is_visible(s, s.objects[0]));
  EXPECT_TRUE(in_success_region(s, s.agent.cell));

  // Low objects need distance at level pitch, or a downward look.
  s.objects[0] = {"Bed", {2, 5}, Elevation::Low};
  EXPECT_FALSE(is_visible(s, s.objects[0]));
  s.agent.pitch = Pitch::Down;
  EXPECT_TRUE(is_visible(s, s.objects[0]));
  s.agent.pitch = Pitch::Level;
  s.objects[0].cell = {3, 5};
  EXPECT_TRUE(is_visible(s, s.objects[0]));

  // An object in between blocks the sight line.
  s.objects[0].cell = {4, 5};
  s.objects.push_back({"Chair", {2, 5}, Elevation::Mid});
  EXPECT_FALSE(line_of_sight(s, s.agent.cell, {4, 5}));
  EXPECT_FALSE(is_visible(s, s.objects[0]));
}

TEST(FpvWorld, DoneOutcomes) {
  FpvScene s = open_room(10, 10, {1, 5}, 0);
  s.objects.push_back({"Mug", {3, 5}, Elevation::Mid});
  s.target = "Mug";
  EXPECT_EQ(fpv_step(s, 0).event, FpvEvent::Success);
  s.agent.heading = 180;
  EXPECT_EQ(fpv_step(s, 0).event, FpvEvent::Failure);
}

TEST(FpvWorld, RelativeBearing) {
  const FpvAgent a{{5, 5}, 90, Pitch::Level};
  EXPECT_NEAR(relative_bearing(a, {5, 8}), 0.0, 1e-12);
  EXPECT_NEAR(relative_bearing(a, {2, 5}), 90.0, 1e-12);
  EXPECT_NEAR(relative_bearing(a, {8, 5}), -90.0, 1e-12);
  EXPECT_NEAR(relative_bearing(a, {5, 2}), 180.0, 1e-12);
}

TEST(FpvWorld, DistanceFieldIsZeroInSuccessRegion) {
  FpvScene s = open_room(12, 9, {1, 1}, 0);
  s.objects.push_back({"Mug", {8, 6}, Elevation::Mid});
  s.target = "Mug";
  const auto dist = distance_to_success(s);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const Cell c{x, y};
      if (!s.is_free(c)) continue;
      EXPECT_EQ(dist[s.index(c)] == 0.0, in_success_region(s, c)) << x << "," << y;
    }
  // From (1,1): Chebyshev-style path to the nearest cell within range 3.
  EXPECT_GT(shortest_path_length(s), 0.0);
}

TEST(FpvWorld, GeneratorInvariants) {
  for (RoomType room : kAllRoomTypes) {
    for (int i = 0; i < 25; ++i) {
      Rng rng(1000 + i);
      const FpvScene s = generate_fpv_scene(FpvSceneSpec{.room = room, .target = std::nullopt}, rng);
      validate(s);
      const FpvObject* target = s.find(s.target);
      ASSERT_NE(target, nullptr);
      EXPECT_FALSE(is_visible(s, *target));
      const double d = shortest_path_length(s);
      EXPECT_GE(d, 2.0);
      EXPECT_LE(d, 9.0);
      EXPECT_GE(s.objects.size(), 5u);
      EXPECT_LE(s.objects.size(), 7u);
      EXPECT_EQ(s.room_id.rfind(std::string(to_string(room)) + "-", 0), 0u);
      const nlohmann::json j = s;
      EXPECT_EQ(j.get<FpvScene>(), s);
    }
  }
  Rng a(5);
  Rng b(5);
  EXPECT_EQ(generate_fpv_scene(FpvSceneSpec{.room = RoomType::Kitchen, .target = "Microwave"}, a),
            generate_fpv_scene(FpvSceneSpec{.room = RoomType::Kitchen, .target = "Microwave"}, b));
}

TEST(FpvWorld, RenderIsDeterministicAndReportsVisibleObjects) {
  FpvScene s = open_room(10, 10, {1, 5}, 0);
  s.objects.push_back({"Mug", {3, 5}, Elevation::Mid});
  s.objects.push_back({"Sink", {1, 8}, Elevation::Mid});
  s.target = "Mug";
  const FpvView a = fpv_render(s);
  const FpvView b = fpv_render(s);
  EXPECT_EQ(a.frame, b.frame);
  EXPECT_EQ(a.frame.width(), kFpvFrameWidth);
  ASSERT_EQ(a.seen.size(), 1u);
  EXPECT_EQ(a.seen[0].object_class, "Mug");
  EXPECT_NEAR(a.seen[0].distance, 2.0, 1e-12);
}

TEST(FpvOracle, TargetAheadBeyondRangeMovesForwardTwice) {
  FpvScene s = open_room(12, 11, {1, 5}, 0);
  s.objects.push_back({"Microwave", {5, 5}, Elevation::Mid});
  s.target = "Microwave";
  const FpvOracle oracle(s);
  EXPECT_EQ(oracle.answer(s).commands, (std::vector<int>{4, 4}));
}

TEST(FpvOracle, TargetAtSixtyDegreesTurnsThenMoves) {
  FpvScene s = open_room(12, 12, {1, 1}, 0);
  const Cell target = add(add(s.agent.cell, forward_offset(0), 4), forward_offset(90), 7);
  s.objects.push_back({"Microwave", target, Elevation::Mid});
  s.target = "Microwave";
  ASSERT_NEAR(relative_bearing(s.agent, target), 60.3, 0.1);
  const FpvOracle oracle(s);
  EXPECT_EQ(oracle.answer(s).commands, (std::vector<int>{2, 4}));
}

TEST(FpvOracle, VisibleAdjacentTargetIsDone) {
  FpvScene s = open_room(8, 8, {3, 3}, 0);
  s.objects.push_back({"Microwave", {4, 3}, Elevation::Mid});
  s.target = "Microwave";
  const FpvOracle oracle(s);
  const PlanAnswer a = oracle.answer(s);
  EXPECT_EQ(a.commands, (std::vector<int>{0, 0}));
  EXPECT_NE(a.explanation.find("Microwave"), std::string::npos);
}

TEST(FpvOracle, ReachesGeneratedTargetsOnShortestPaths) {
  int successes = 0;
  for (int i = 0; i < 40; ++i) {
    Rng rng(77 + i);
    FpvScene s = generate_fpv_scene(FpvSceneSpec{.room = kAllRoomTypes[i % 4], .target = std::nullopt}, rng);
    const FpvOracle oracle(s);
    double travelled = 0.0;
    for (int step = 0; step < 25; ++step) {
      const int cmd = oracle.answer(s).commands[0];
      const auto r = fpv_step(s, cmd);
      travelled += r.moved;
      s = r.scene;
      if (r.event == FpvEvent::Success) {
        ++successes;
        EXPECT_NEAR(travelled, oracle.shortest_path(), 1e-9);
        break;
      }
      ASSERT_NE(r.event, FpvEvent::Failure);
      ASSERT_NE(r.event, FpvEvent::Blocked);
    }
  }
  EXPECT_EQ(successes, 40);
}

TEST(RotationToward, NearestBucket) {
  EXPECT_EQ(rotation_toward(60), 2);
  EXPECT_EQ(rotation_toward(170), 1);
  EXPECT_EQ(rotation_toward(-20), 5);
  EXPECT_EQ(rotation_toward(-75), 6);  // tie between 60 and 90 goes to the smaller turn
  EXPECT_EQ(rotation_toward(-80), 7);
}

}  // namespace
}  // namespace s2p
