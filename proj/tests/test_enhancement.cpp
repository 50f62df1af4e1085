#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "touchprint/enhancement.hpp"
#include "touchprint/synthetic.hpp"

using namespace touchprint;
using testing_support::rect_mask;

TEST(Clahe, ConstantImageIsFixpoint) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelImage img(5 + static_cast<int>(rng() % 60), 5 + static_cast<int>(rng() % 60),
                           static_cast<std::uint8_t>(rng()));
    const double clip = 1.0 + static_cast<double>(rng() % 80) / 4.0;
    const int tx = 1 + static_cast<int>(rng() % 9), ty = 1 + static_cast<int>(rng() % 9);
    EXPECT_EQ(apply_clahe(img, clip, tx, ty), img);
  }
}

TEST(Clahe, SingleUnclippedTileIsGlobalEqualisation) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = trial % 2 ? testing_support::random_gray(rng, 37, 23) : testing_support::random_texture(rng, 64, 48);
    EXPECT_EQ(apply_clahe(img, 256.0, 1, 1), oracle::global_equalise(img)) << trial;
  }
}

TEST(Clahe, TwoToneKeepsItsOrder) {
  ChannelImage img(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = (x / 4 + y / 4) % 2 ? 190 : 60;
  const auto out = apply_clahe(img);
  int max_low = 0, min_high = 255;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    if (img.values[i] == 60) max_low = std::max(max_low, static_cast<int>(out.values[i]));
    else min_high = std::min(min_high, static_cast<int>(out.values[i]));
  }
  EXPECT_LT(max_low, min_high);
}

TEST(Clahe, TileMappingsAreMonotone) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const auto img = testing_support::random_texture(rng, 96, 80);
    const auto tiles = clahe_tiles(img, 1.0 + trial, 8, 8);
    for (const auto& lut : tiles.luts)
      for (int v = 1; v < 256; ++v) ASSERT_LE(lut[v - 1], lut[v]);
  }
}

TEST(Clahe, OrderPreservedWithinATile) {
  std::mt19937_64 rng(34);
  const auto img = testing_support::random_gray(rng, 40, 40);
  const auto out = apply_clahe(img, 3.0, 1, 1);
  for (std::size_t i = 0; i < img.values.size(); i += 7)
    for (std::size_t j = 0; j < img.values.size(); j += 5)
      if (img.values[i] < img.values[j]) ASSERT_LE(out.values[i], out.values[j]);
}

TEST(Clahe, EntropyDoesNotDrop) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const auto img = testing_support::random_texture(rng, 128, 96);
    EXPECT_GE(oracle::entropy(apply_clahe(img)), oracle::entropy(img) - 0.01) << trial;
  }
}

TEST(Clahe, InvalidParametersRejected) {
  EXPECT_THROW(apply_clahe(ChannelImage(4, 4), 0.5), Error);
  EXPECT_THROW(apply_clahe(ChannelImage(4, 4), 2.0, 0, 1), Error);
}

TEST(ErodeBorder, SquareShrinksByRadius) {
  const auto out = erode_mask_border(rect_mask(130, 130, 15, 15, 100, 100), 15);
  EXPECT_EQ(out, rect_mask(130, 130, 30, 30, 70, 70));
}

TEST(ErodeBorder, ZeroRadiusIsIdentity) {
  std::mt19937_64 rng(36);
  BinaryMask m(30, 20);
  for (auto& b : m.bits) b = rng() % 2;
  EXPECT_EQ(erode_mask_border(m, 0), m);
}

TEST(ErodeBorder, ThinMaskVanishes) {
  EXPECT_TRUE(erode_mask_border(rect_mask(100, 100, 10, 10, 29, 80), 15).empty());
}

TEST(ErodeBorder, OutputIsSubsetOfInput) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask m(50, 40);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 50; ++x) m.set(x, y, std::hypot(x - 25, y - 20) < 5 + static_cast<double>(rng() % 15));
    const auto e = erode_mask_border(m, static_cast<int>(rng() % 6));
    for (std::size_t i = 0; i < m.bits.size(); ++i) EXPECT_LE(e.bits[i], m.bits[i]);
  }
}

TEST(ErodeBorder, NegativeRadiusRejected) { EXPECT_THROW(erode_mask_border(BinaryMask(3, 3), -1), Error); }

namespace {

FingerCrop ridge_crop(synth::Rng& rng, int w, int h) {
  const auto pattern = synth::random_pattern(rng, w, h, 6.0, 8);
  return synth::make_finger_crop(pattern, {}, w, h, rng);
}

}  // namespace

TEST(RenderFingerprint, RidgeCropNormalisedToStandardWidth) {
  synth::Rng rng(38);
  const auto fp = render_fingerprint(ridge_crop(rng, 180, 360), {}, 3);
  EXPECT_EQ(fp.gray.width, 300);
  EXPECT_LE(fp.gray.height, 600);
  EXPECT_EQ(fp.source_finger_id, 3);
  std::size_t inside_nonzero = 0;
  for (std::size_t i = 0; i < fp.gray.values.size(); ++i) {
    if (!fp.roi.bits[i]) EXPECT_EQ(fp.gray.values[i], 0);
    else inside_nonzero += fp.gray.values[i] != 0;
  }
  EXPECT_GT(inside_nonzero, fp.roi.count() * 9 / 10);
}

TEST(RenderFingerprint, ErodedToNothingIsEmptyRoi) {
  FingerCrop c;
  c.image = RasterImage(20, 60, 3, 128);
  c.mask = BinaryMask(20, 60, true);
  try {
    render_fingerprint(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyROI);
  }
}

TEST(RenderFingerprint, FlatFingerStaysFlat) {
  FingerCrop c;
  c.image = RasterImage(120, 200, 3, 150);
  c.mask = BinaryMask(120, 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 120; ++x) c.mask.set(x, y, y >= 60 || std::hypot(x - 59.5, y - 59.5) <= 60);
  const auto fp = render_fingerprint(c);
  EXPECT_EQ(fp.gray.width, 300);
  for (std::size_t i = 0; i < fp.gray.values.size(); ++i) EXPECT_EQ(fp.gray.values[i], fp.roi.bits[i] ? 150 : 0);
}

TEST(RenderFingerprint, WidthAndBackgroundInvariants) {
  synth::Rng rng(39);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 40 + static_cast<int>(rng() % 200), h = w + static_cast<int>(rng() % (2 * w));
    const auto fp = render_fingerprint(ridge_crop(rng, w, h));
    ASSERT_EQ(fp.gray.width, 300);
    ASSERT_LE(fp.gray.height, 600);
    for (std::size_t i = 0; i < fp.gray.values.size(); ++i)
      if (!fp.roi.bits[i]) ASSERT_EQ(fp.gray.values[i], 0);
  }
}
