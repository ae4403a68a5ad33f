#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "dualvfi/core.hpp"
#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"
#include "oracles.hpp"

using namespace dualvfi;

TEST(Bilinear, IntegerCoordinateIsExact) {
  const Image img = oracle::texture(10, 8, 1);
  EXPECT_EQ(bilinear_sample(img, 3, 5, 0), img.at(3, 5, 0));
}

TEST(Bilinear, CenterOfBlock) {
  Image img(2, 2, 1, std::vector<double>{0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(bilinear_sample(img, 0.5, 0.5, 0), 0.5);
}

TEST(Bilinear, ClampsOutside) {
  const Image img = oracle::texture(6, 6, 1);
  EXPECT_EQ(bilinear_sample(img, -2.7, 0, 0), img.at(0, 0, 0));
  EXPECT_EQ(bilinear_sample(img, 100, 100, 0), img.at(5, 5, 0));
}

TEST(Bilinear, NonFiniteCoordinateThrows) {
  const Image img(4, 4, 1, 1.0);
  EXPECT_THROW(bilinear_sample(img, std::nan(""), 0, 0), NumericalError);
  EXPECT_THROW(bilinear_sample(img, 0, std::numeric_limits<double>::infinity(), 0), NumericalError);
}

TEST(Warp, ZeroFlowIsBitExactIdentity) {
  const Image img = oracle::texture(17, 13, 3);
  EXPECT_EQ(backward_warp(img, FlowField(17, 13)), img);
}

TEST(Warp, IntegerShiftWithReplicatedBorder) {
  const Image img = oracle::texture(20, 10, 1);
  const Image out = backward_warp(img, FlowField(20, 10, 3.0, 0.0));
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_EQ(out.at(x, y, 0), img.at(std::min(x + 3, 19), y, 0));
}

TEST(Warp, HalfPixelOnRamp) {
  Image ramp(12, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 12; ++x) ramp.at(x, y, 0) = x;
  const Image out = backward_warp(ramp, FlowField(12, 4, 0.5, 0.0));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 11; ++x) EXPECT_NEAR(out.at(x, y, 0), x + 0.5, 1e-12);
}

TEST(Warp, DimensionMismatchThrows) {
  EXPECT_THROW(backward_warp(Image(4, 4, 1), FlowField(5, 4)), InputError);
}

TEST(Downsample, Mean2x2) {
  Image img(2, 2, 1, std::vector<double>{0, 2, 4, 6});
  const Image d = downsample2x(img);
  ASSERT_EQ(d.width(), 1);
  EXPECT_DOUBLE_EQ(d.at(0, 0, 0), 3.0);
}

TEST(Downsample, CheckerboardIsUniform) {
  Image img(8, 6, 1);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) img.at(x, y, 0) = (x + y) % 2;
  for (double v : oracle::values(downsample2x(img))) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Downsample, OddTrailingColumnAveragesAvailablePixels) {
  Image img(3, 2, 1, std::vector<double>{1, 1, 5, 1, 1, 7});
  const Image d = downsample2x(img);
  ASSERT_EQ(d.width(), 2);
  ASSERT_EQ(d.height(), 1);
  EXPECT_DOUBLE_EQ(d.at(1, 0, 0), 6.0);
}

TEST(Downsample, PreservesMean) {
  const Image img = oracle::texture(64, 48, 3);
  const Image d = downsample2x(img);
  const double m0 = std::accumulate(img.data().begin(), img.data().end(), 0.0) / img.data().size();
  const double m1 = std::accumulate(d.data().begin(), d.data().end(), 0.0) / d.data().size();
  EXPECT_NEAR(m1 / m0, 1.0, 1e-6);
}

TEST(Pyramid, LevelSizes) {
  const auto p = build_pyramid(Image(64, 64, 1, 0.25), 4);
  ASSERT_EQ(p.size(), 4u);
  const int sizes[] = {64, 32, 16, 8};
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(p[l].width(), sizes[l]);
    for (double v : p[l].data()) EXPECT_DOUBLE_EQ(v, 0.25);
  }
  EXPECT_EQ(build_pyramid(Image(64, 64, 1), 1).size(), 1u);
}

TEST(Pyramid, TooSmallThrows) {
  EXPECT_THROW(build_pyramid(Image(32, 32, 1), 4), InputError);
  EXPECT_EQ(max_pyramid_levels(32, 32, 6), 3);
  EXPECT_EQ(max_pyramid_levels(4, 32, 6), 0);
}

TEST(Upsample, ConstantFlowDoubles) {
  const FlowField up = upsample_flow2x(FlowField(8, 8, 1.0, -2.0), 16, 16);
  ASSERT_EQ(up.width(), 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_DOUBLE_EQ(up.u(x, y), 2.0);
      EXPECT_DOUBLE_EQ(up.v(x, y), -4.0);
    }
}

TEST(Upsample, RampAtIntegerPoints) {
  FlowField ramp(4, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) ramp.u(x, y) = x;
  const FlowField up = upsample_flow2x(ramp, 8, 4);
  for (int x = 0; x <= 6; ++x) EXPECT_NEAR(up.u(x, 1), x, 1e-12);
}

TEST(Upsample, RoundTripConstant) {
  const FlowField f(9, 7, 0.75, -1.25);
  const FlowField back = downsample2x(upsample_flow2x(f, 18, 14));
  EXPECT_EQ(back, f);
}

TEST(Upsample, IncompatibleSizeThrows) {
  EXPECT_THROW(upsample_flow2x(FlowField(8, 8), 20, 16), InputError);
}

TEST(Parallel, ChunkingIndependentOfThreads) {
  std::vector<double> a(1000), b(1000);
  auto run = [](std::vector<double>& out) {
    parallel_for(out.size(), 37, [&](std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) out[i] = (acc += std::sqrt(static_cast<double>(i)));
    });
  };
  set_thread_count(1);
  run(a);
  set_thread_count(7);
  run(b);
  set_thread_count(0);
  EXPECT_EQ(a, b);
}
