#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "touchprint/segmentation.hpp"

using namespace touchprint;
using testing_support::rect_mask;
using testing_support::solid_rgb;

namespace {

Histogram random_histogram(std::mt19937_64& rng) {
  Histogram h{};
  std::uniform_int_distribution<int> count(0, 1000), style(0, 2), bin(0, 255);
  switch (style(rng)) {
    case 0:  // dense
      for (auto& c : h) c = count(rng);
      break;
    case 1:  // a few spikes
      for (int k = 0, n = 1 + style(rng) * 3; k < n; ++k) h[bin(rng)] += count(rng) + 1;
      break;
    default: {  // two noisy modes
      std::normal_distribution<double> a(bin(rng), 5 + style(rng) * 10), b(bin(rng), 8);
      for (int i = 0; i < 2000; ++i) {
        ++h[std::clamp(static_cast<int>(std::lround(a(rng))), 0, 255)];
        ++h[std::clamp(static_cast<int>(std::lround(b(rng))), 0, 255)];
      }
    }
  }
  if (std::all_of(h.begin(), h.end(), [](auto c) { return c == 0; })) h[bin(rng)] = 1;
  return h;
}

}  // namespace

TEST(Otsu, EqualSpikesPickLowerEdge) {
  Histogram h{};
  h[50] = 1000;
  h[200] = 1000;
  EXPECT_EQ(otsu_threshold(h), 50);
}

TEST(Otsu, SingleSpikeGivesZero) {
  Histogram h{};
  h[10] = 42;
  EXPECT_EQ(otsu_threshold(h), 0);
}

TEST(Otsu, UniformHistogramSplitsInTheMiddle) {
  Histogram h{};
  h.fill(7);
  EXPECT_EQ(otsu_threshold(h), 127);
}

TEST(Otsu, EmptyHistogramRejected) {
  try {
    otsu_threshold(Histogram{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyHistogram);
  }
}

TEST(Otsu, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto h = random_histogram(rng);
    ASSERT_EQ(otsu_threshold(h), oracle::otsu(h)) << "histogram " << i;
  }
}

TEST(SegmentHand, SkinRectangleOnBlue) {
  auto img = solid_rgb(120, 90, 40, 70, 150);
  for (int y = 20; y < 70; ++y)
    for (int x = 30; x < 100; ++x) {
      img.at(x, y, 0) = 200;
      img.at(x, y, 1) = 140;
      img.at(x, y, 2) = 120;
    }
  const auto mask = segment_hand(img);
  ASSERT_EQ(mask.width, 120);
  ASSERT_EQ(mask.height, 90);
  const auto truth = rect_mask(120, 90, 30, 20, 70, 50);
  for (int y = 0; y < 90; ++y)
    for (int x = 0; x < 120; ++x) {
      if (mask.get(x, y) == truth.get(x, y)) continue;
      // Disagreement is only tolerated within one pixel of the boundary.
      const bool near_edge = (x >= 29 && x <= 30) || (x >= 99 && x <= 100) || (y >= 19 && y <= 20) ||
                             (y >= 69 && y <= 70);
      EXPECT_TRUE(near_edge) << x << "," << y;
    }
}

TEST(SegmentHand, BackgroundOnlyIsNearlyEmpty) {
  const auto mask = segment_hand(solid_rgb(64, 48, 40, 70, 150));
  EXPECT_LT(mask.count(), 64u * 48u / 100u);
}

TEST(SegmentHand, SkinOnlyIsNearlyFull) {
  const auto mask = segment_hand(solid_rgb(64, 48, 200, 140, 120));
  EXPECT_GT(mask.count(), 64u * 48u * 99u / 100u);
}

TEST(SegmentHand, NoisySkinOnNoisyBackground) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 6);
  RasterImage img(80, 60, 3);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x) {
      const bool skin = x >= 20 && x < 60 && y >= 10;
      const double base[3] = {skin ? 200.0 : 40.0, skin ? 140.0 : 70.0, skin ? 120.0 : 150.0};
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp_byte(base[c] + n(rng));
    }
  const auto mask = segment_hand(img);
  const auto truth = rect_mask(80, 60, 20, 10, 40, 50);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) wrong += mask.bits[i] != truth.bits[i];
  EXPECT_LT(wrong, mask.bits.size() / 100);
}

TEST(SegmentHand, OutputMatchesInputDimensions) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    RasterImage img(w, h, 3);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
    const auto m = segment_hand(img);
    EXPECT_EQ(m.width, w);
    EXPECT_EQ(m.height, h);
  }
}

TEST(SegmentHand, GrayInputRejected) {
  try {
    segment_hand(RasterImage(4, 4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GrayInput);
  }
}

TEST(Components, SquareIsOneComponent) {
  const auto cs = connected_components(rect_mask(20, 20, 3, 4, 6, 6));
  ASSERT_EQ(cs.components.size(), 1u);
  EXPECT_EQ(cs.components[0].area, 36u);
  EXPECT_EQ(cs.components[0].id, 1);
  EXPECT_EQ(cs.components[0].bbox, (Rect{3, 4, 6, 6}));
}

TEST(Components, DiagonalNeighboursConnect) {
  BinaryMask m(4, 4);
  m.set(1, 1, true);
  m.set(2, 2, true);
  EXPECT_EQ(connected_components(m).components.size(), 1u);
}

TEST(Components, EmptyMaskHasNone) {
  EXPECT_TRUE(connected_components(BinaryMask(5, 5)).components.empty());
}

TEST(Components, OrderedByAreaThenPosition) {
  BinaryMask m(30, 30);
  for (auto [x, y, s] : {std::tuple{20, 2, 3}, {2, 2, 3}, {10, 20, 5}})
    for (int dy = 0; dy < s; ++dy)
      for (int dx = 0; dx < s; ++dx) m.set(x + dx, y + dy, true);
  const auto cs = connected_components(m);
  ASSERT_EQ(cs.components.size(), 3u);
  EXPECT_EQ(cs.components[0].area, 25u);
  EXPECT_EQ(cs.components[1].bbox.x, 2);
  EXPECT_EQ(cs.components[2].bbox.x, 20);
}

TEST(Components, AreasSumToForegroundAndLabellingIsStable) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMask m(25, 19);
    for (auto& b : m.bits) b = rng() % 3 == 0;
    const auto cs = connected_components(m);
    std::size_t total = 0;
    for (std::size_t i = 0; i < cs.components.size(); ++i) {
      total += cs.components[i].area;
      EXPECT_EQ(cs.components[i].id, static_cast<int>(i) + 1);
      if (i > 0) EXPECT_GE(cs.components[i - 1].area, cs.components[i].area);
    }
    EXPECT_EQ(total, m.count());
    const auto again = connected_components(m);
    EXPECT_EQ(again.labels, cs.labels);
  }
}

TEST(Plausibility, LargeBlobAtBottomPasses) {
  const auto v = check_mask_plausibility(connected_components(rect_mask(100, 100, 20, 50, 60, 50)));
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.reason, MaskReason::Ok);
}

TEST(Plausibility, SixDominantBlobsAreTooMany) {
  BinaryMask m(100, 100);
  for (int i = 0; i < 6; ++i)
    for (int y = 0; y < 15; ++y)
      for (int x = 0; x < 15; ++x) m.set(i * 16 + x, 80 + y, true);
  const auto v = check_mask_plausibility(connected_components(m));
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, MaskReason::TooManyComponents);
}

TEST(Plausibility, TinyBlobIsNoComponent) {
  const auto v = check_mask_plausibility(connected_components(rect_mask(100, 100, 40, 93, 7, 7)));
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, MaskReason::NoComponent);
}

TEST(Plausibility, RopeIsBadShape) {
  const auto v = check_mask_plausibility(connected_components(rect_mask(100, 100, 50, 0, 3, 100)));
  EXPECT_EQ(v.reason, MaskReason::BadShape);
}

TEST(Plausibility, SmallHandIsBadSize) {
  const auto v = check_mask_plausibility(connected_components(rect_mask(100, 100, 40, 80, 25, 20)));
  EXPECT_EQ(v.reason, MaskReason::BadSize);
}

TEST(Plausibility, FloatingBlobIsBadPosition) {
  const auto v = check_mask_plausibility(connected_components(rect_mask(100, 100, 20, 20, 60, 50)));
  EXPECT_EQ(v.reason, MaskReason::BadPosition);
}

TEST(Plausibility, PureFunctionOfInput) {
  const auto cs = connected_components(rect_mask(100, 100, 10, 40, 70, 60));
  const auto a = check_mask_plausibility(cs), b = check_mask_plausibility(cs);
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_EQ(a.reason, b.reason);
}
