#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "s2p/error.hpp"
#include "s2p/geometry.hpp"
#include "s2p/rng.hpp"
#include "s2p/tpv_world.hpp"

namespace s2p {
namespace {

TEST(Angles, Wrapping) {
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_degrees_360(-30), 330);
  EXPECT_DOUBLE_EQ(wrap_degrees_360(720), 0);
  EXPECT_DOUBLE_EQ(wrap_degrees_180(-180), 180);
  EXPECT_DOUBLE_EQ(wrap_degrees_180(190), -170);
}

TEST(Polygon, ContainsAndDistance) {
  const Polygon box = make_box({0, 0}, 1, 0.5);
  EXPECT_TRUE(contains(box, {0.9, 0.4}));
  EXPECT_FALSE(contains(box, {1.1, 0}));
  EXPECT_NEAR(distance_to_polygon({2, 0}, box), 1.0, 1e-12);
  EXPECT_NEAR(distance_to_polygon({2, 1.5}, box), std::hypot(1.0, 1.0), 1e-12);
  EXPECT_DOUBLE_EQ(distance_to_polygon({0, 0}, box), 0.0);
  const Polygon rotated = make_box({0, 0}, 1, 1, kPi / 4);
  EXPECT_TRUE(contains(rotated, {1.3, 0}));
  EXPECT_FALSE(contains(rotated, {0.9, 0.9}));
}

TEST(Bounds, Clearance) {
  const Bounds b{0, 0, 4, 3};
  EXPECT_DOUBLE_EQ(b.clearance({1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(b.clearance({5, 2}), 0.0);
  ObstacleMap m;
  m.bounds = b;
  m.polygons.push_back(make_box({2, 1.5}, 0.2, 0.2));
  EXPECT_NEAR(m.clearance({2, 0.5}), 0.5, 1e-12);
}

TEST(Homography, RoundTripWithinMicrometre) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Bounds b{0, 0, rng.uniform(4, 6), rng.uniform(3.5, 5)};
    const Homography h = room_homography(b);
    const Homography inv = h.inverse();
    for (int i = 0; i < 20; ++i) {
      const WorldPoint w{rng.uniform(b.min_x, b.max_x), rng.uniform(b.min_y, b.max_y)};
      const WorldPoint back = unproject(inv, project(h, w));
      ASSERT_LT(distance(w, back), 1e-6);
    }
  }
}

TEST(Homography, FourPointFitAndJson) {
  const std::array<WorldPoint, 4> w{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  const std::array<PixelPoint, 4> p{{{10, 100}, {110, 100}, {90, 20}, {30, 20}}};
  const Homography h = homography_from_points(w, p);
  for (int i = 0; i < 4; ++i) {
    const PixelPoint q = project(h, w[i]);
    EXPECT_NEAR(q.u, p[i].u, 1e-9);
    EXPECT_NEAR(q.v, p[i].v, 1e-9);
  }
  const Homography back = homography_from_json(homography_to_json(h));
  EXPECT_TRUE(back.isApprox(h, 1e-15));
  const std::array<PixelPoint, 4> collinear{{{0, 0}, {1, 1}, {2, 2}, {3, 3}}};
  EXPECT_THROW(homography_from_points(w, collinear), Error);
}

}  // namespace
}  // namespace s2p
