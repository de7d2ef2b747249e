#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "opph/flow_baseline.hpp"
#include "opph/synth.hpp"

using namespace opph;

namespace {

// Smooth random texture; frame b is frame a shifted by (dx, dy).
std::pair<Frame, Frame> translated_pair(int w, int h, int dx, int dy, double noise = 0.0) {
  SceneSpec spec;
  spec.width = w + 16;
  spec.height = h + 16;
  spec.background_scale = 6;
  spec.body_width = 1;
  spec.body_height = 1;
  spec.motion = {MotionSegment{1, 0, 0}};
  const Frame big = SceneRenderer(spec).render_clean(0);
  std::mt19937 rng(5);
  std::normal_distribution<double> n(0.0, noise);
  auto cut = [&](int ox, int oy) {
    std::vector<std::uint8_t> px;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c) {
          const double v = big.at(x + ox, y + oy, c) + (noise > 0 ? std::lround(n(rng)) : 0);
          px.push_back(static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)));
        }
    return Frame(w, h, px);
  };
  return {cut(8, 8), cut(8 - dx, 8 - dy)};
}

}  // namespace

TEST(DenseFlow, IdenticalFramesZero) {
  const auto [a, b] = translated_pair(64, 48, 0, 0);
  const FlowField f = dense_flow(a, a);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_LT(std::hypot(f.vx()[i], f.vy()[i]), 1e-6);
  }
}

TEST(DenseFlow, RecoversTranslation) {
  const auto [a, b] = translated_pair(96, 80, 2, 0);
  const FlowField f = dense_flow(a, b);
  int good = 0, total = 0;
  for (int y = 12; y < 80 - 12; ++y) {
    for (int x = 12; x < 96 - 12; ++x) {
      ++total;
      good += std::hypot(f.vx(x, y) - 2.0, f.vy(x, y)) < 0.5;
    }
  }
  EXPECT_GE(good, 0.9 * total);
}

TEST(DenseFlow, NoiseFloor) {
  const auto [a, b] = translated_pair(96, 80, 0, 0, 1.0);
  const FlowField f = dense_flow(a, b);
  double sum = 0;
  int n = 0;
  for (int y = 12; y < 68; ++y)
    for (int x = 12; x < 84; ++x, ++n) sum += std::hypot(f.vx(x, y), f.vy(x, y));
  EXPECT_LT(sum / n, 0.3);
}

TEST(DenseFlow, Antisymmetric) {
  const auto [a, b] = translated_pair(96, 80, 1, -2);
  const FlowField f = dense_flow(a, b), g = dense_flow(b, a);
  double dev = 0;
  int n = 0;
  for (int y = 12; y < 68; ++y)
    for (int x = 12; x < 84; ++x, ++n) dev += std::hypot(f.vx(x, y) + g.vx(x, y), f.vy(x, y) + g.vy(x, y));
  EXPECT_LT(dev / n, 0.5);
}

TEST(DenseFlow, ErrorsAndDeterminism) {
  const auto [a, b] = translated_pair(40, 30, 1, 0);
  EXPECT_THROW(dense_flow(a, Frame(2, 2, std::vector<std::uint8_t>(12))), InvalidArgument);
  EXPECT_THROW(dense_flow(a, b, FlowParams{0, 15, 3}), InvalidArgument);
  EXPECT_THROW(dense_flow(a, b, FlowParams{3, 14, 3}), InvalidArgument);
  EXPECT_THROW(dense_flow(a, b, FlowParams{3, 15, 0}), InvalidArgument);
  EXPECT_EQ(dense_flow(a, b), dense_flow(a, b));
}

TEST(DenseFlowRegion, ZeroOutsideAndCloseInside) {
  const auto [a, b] = translated_pair(120, 90, 2, 1);
  const Rect roi{40, 30, 30, 25};
  const FlowField f = dense_flow_region(a, b, roi, 32);
  EXPECT_EQ(f.vx(5, 5), 0.0f);
  int good = 0, total = 0;
  for (int y = roi.y; y < roi.y + roi.height; ++y)
    for (int x = roi.x; x < roi.x + roi.width; ++x, ++total)
      good += std::hypot(f.vx(x, y) - 2.0, f.vy(x, y) - 1.0) < 0.5;
  EXPECT_GE(good, 0.9 * total);
  EXPECT_EQ(dense_flow_region(a, b, Rect{}, 8), FlowField(120, 90));
  EXPECT_THROW(dense_flow_region(a, b, roi, -1), InvalidArgument);
}

TEST(ToGray, RoundedMean) {
  const Frame f(2, 1, {1, 1, 2, 255, 255, 254});
  const auto g = to_gray(f);
  EXPECT_EQ(g[0], 1);
  EXPECT_EQ(g[1], 255);
}
