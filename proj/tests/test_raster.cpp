#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "touchprint/image_io.hpp"
#include "touchprint/raster.hpp"

using namespace touchprint;
using testing_support::solid_rgb;

TEST(Grayscale, WhiteStaysWhite) {
  EXPECT_EQ(to_grayscale(solid_rgb(1, 1, 255, 255, 255)).at(0, 0), 255);
}

TEST(Grayscale, PureRedUsesLumaWeight) {
  EXPECT_EQ(to_grayscale(solid_rgb(1, 1, 255, 0, 0)).at(0, 0), 76);
}

TEST(Grayscale, SingleChannelPassesThrough) {
  std::mt19937_64 rng(1);
  const auto g = testing_support::random_gray(rng, 13, 7);
  EXPECT_EQ(to_grayscale(as_raster(g)), g);
}

TEST(Channels, NeutralGrayHasCenteredCr) {
  const auto img = solid_rgb(1, 1, 128, 128, 128);
  EXPECT_EQ(extract_channel(img, ChannelKind::Cr).at(0, 0), 128);
}

TEST(Channels, RedCrClampsAtTop) {
  EXPECT_EQ(extract_channel(solid_rgb(1, 1, 255, 0, 0), ChannelKind::Cr).at(0, 0), 255);
}

TEST(Channels, RedIsHueOrigin) {
  EXPECT_EQ(extract_channel(solid_rgb(1, 1, 255, 0, 0), ChannelKind::Hue).at(0, 0), 0);
}

TEST(Channels, PrimaryHuesSitAtThirdsOfTheCircle) {
  EXPECT_EQ(hue_of(0, 255, 0), 85);   // 120 deg
  EXPECT_EQ(hue_of(0, 0, 255), 171);  // 240 deg
  EXPECT_EQ(hue_of(90, 90, 90), 0);   // achromatic
}

TEST(Channels, GrayInputRejected) {
  try {
    extract_channel(RasterImage(2, 2, 1), ChannelKind::Cr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GrayInput);
  }
}

TEST(Channels, AnyGrayPixelHasCr128) {
  for (int v = 0; v < 256; ++v) {
    const auto b = static_cast<std::uint8_t>(v);
    EXPECT_EQ(cr_of(b, b, b), 128) << v;
  }
}

TEST(Stretch, LinearMapOfNarrowRange) {
  ChannelImage ch(51, 1);
  for (int i = 0; i <= 50; ++i) ch.at(i, 0) = static_cast<std::uint8_t>(100 + i);
  const auto out = stretch_histogram(ch);
  for (int i = 0; i <= 50; ++i) EXPECT_EQ(out.at(i, 0), std::lround(i * 255.0 / 50.0)) << i;
}

TEST(Stretch, ConstantImageUnchanged) {
  const ChannelImage ch(9, 4, 77);
  EXPECT_EQ(stretch_histogram(ch), ch);
}

TEST(Stretch, FullRangeUnchanged) {
  ChannelImage ch(256, 1);
  for (int i = 0; i < 256; ++i) ch.at(i, 0) = static_cast<std::uint8_t>(255 - i);
  EXPECT_EQ(stretch_histogram(ch), ch);
}

TEST(Stretch, Idempotent) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = testing_support::random_texture(rng, 17, 11);
    const auto once = stretch_histogram(g);
    EXPECT_EQ(stretch_histogram(once), once);
  }
}

TEST(Rotate, ZeroAngleIsIdentity) {
  std::mt19937_64 rng(3);
  const auto g = testing_support::random_gray(rng, 9, 5);
  EXPECT_EQ(rotate_image(g, 0.0), g);
  EXPECT_EQ(rotate_image(g, 0.0, Interpolation::Nearest), g);
}

TEST(Rotate, QuarterTurnPermutesIndices) {
  std::mt19937_64 rng(4);
  const int w = 7, h = 4;
  const auto g = testing_support::random_gray(rng, w, h);
  for (auto interp : {Interpolation::Nearest, Interpolation::Bilinear}) {
    const auto r = rotate_image(g, 90.0, interp);
    ASSERT_EQ(r.width, h);
    ASSERT_EQ(r.height, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) EXPECT_EQ(r.at(y, w - 1 - x), g.at(x, y));
  }
}

TEST(Rotate, FullTurnIsIdentity) {
  std::mt19937_64 rng(5);
  const auto g = testing_support::random_gray(rng, 6, 10);
  EXPECT_EQ(rotate_image(g, 360.0), g);
  EXPECT_EQ(rotate_image(g, -720.0), g);
}

TEST(Rotate, FourQuarterTurnsRestoreRgbSquare) {
  std::mt19937_64 rng(6);
  RasterImage img(12, 12, 3);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  RasterImage r = img;
  for (int i = 0; i < 4; ++i) r = rotate_image(r, 90.0, Interpolation::Nearest);
  EXPECT_EQ(r, img);
}

TEST(Rotate, MaskUsesNearestAndExpandsCanvas) {
  const BinaryMask m = testing_support::rect_mask(40, 20, 0, 0, 40, 20);
  const auto r = rotate_image(m, 45.0);
  EXPECT_GE(r.width, 42);
  EXPECT_GE(r.height, 42);
  for (auto b : r.bits) EXPECT_TRUE(b == 0 || b == 1);
  EXPECT_NEAR(static_cast<double>(r.count()), 800.0, 80.0);
}

TEST(Rotate, NonFiniteAngleRejected) {
  EXPECT_THROW(rotate_image(ChannelImage(3, 3), std::nan("")), Error);
}

TEST(Resize, HalvesPaperSizedCrop) {
  const RasterImage img(600, 900, 1, 12);
  const auto r = resize_to_width(img, 300);
  EXPECT_EQ(r.width, 300);
  EXPECT_EQ(r.height, 450);
}

TEST(Resize, SameWidthKeepsDimensions) {
  const RasterImage img(300, 450, 3, 9);
  const auto r = resize_to_width(img, 300);
  EXPECT_EQ(r.width, 300);
  EXPECT_EQ(r.height, 450);
  EXPECT_EQ(r, img);
}

TEST(Resize, ConstantsSurviveUpsampling) {
  const auto r = resize_to_width(RasterImage(10, 10, 1, 173), 300);
  ASSERT_EQ(r.width, 300);
  ASSERT_EQ(r.height, 300);
  for (auto p : r.pixels) ASSERT_EQ(p, 173);
}

TEST(Resize, WidthAlwaysMatchesTarget) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(1, 48);
  for (int i = 0; i < 10000; ++i) {
    const int w = d(rng), h = d(rng), t = d(rng);
    const auto r = resize_to_width(RasterImage(w, h, 1, 5), t);
    ASSERT_EQ(r.width, t);
    ASSERT_EQ(r.height, std::max(1L, std::lround(static_cast<double>(h) * t / w)));
  }
}

TEST(Resize, ZeroTargetRejected) { EXPECT_THROW(resize_to_width(RasterImage(4, 4, 1), 0), Error); }

TEST(Raster, InvalidDimensionsRejected) {
  EXPECT_THROW(RasterImage(0, 5, 1), Error);
  EXPECT_THROW(RasterImage(5, 5, 2), Error);
}

TEST(Affine, InverseComposesToIdentity) {
  const Affine a{0.6, -0.8, 12, 0.8, 0.6, -3};
  const auto id = a.compose(a.inverse());
  const auto [x, y] = id.apply(17.5, -4.25);
  EXPECT_NEAR(x, 17.5, 1e-12);
  EXPECT_NEAR(y, -4.25, 1e-12);
}

TEST(ImageIo, PngAndPnmRoundTrip) {
  testing_support::TempDir dir;
  std::mt19937_64 rng(8);
  RasterImage rgb(9, 6, 3);
  for (auto& p : rgb.pixels) p = static_cast<std::uint8_t>(rng());
  const auto gray = as_raster(testing_support::random_gray(rng, 5, 8));
  for (const char* name : {"a.png", "a.ppm"}) {
    io::write_image(dir / name, rgb);
    EXPECT_EQ(io::read_image(dir / name), rgb) << name;
  }
  for (const char* name : {"g.png", "g.pgm"}) {
    io::write_image(dir / name, gray);
    EXPECT_EQ(io::read_image(dir / name), gray) << name;
  }
  const auto mask = testing_support::rect_mask(11, 7, 2, 1, 5, 4);
  io::write_mask(dir / "m.png", mask);
  EXPECT_EQ(io::read_mask(dir / "m.png"), mask);
}

TEST(ImageIo, MissingFileIsIoError) {
  try {
    io::read_image("/nonexistent/touchprint.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}
