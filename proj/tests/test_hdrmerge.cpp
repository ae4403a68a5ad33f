#include <gtest/gtest.h>

#include <cmath>

#include "dualvfi/errors.hpp"
#include "dualvfi/hdrmerge.hpp"
#include "oracles.hpp"

using namespace dualvfi;

namespace {

MergeConfig eight_bit() {
  MergeConfig c;
  c.saturation_level = 255.0;
  return c;
}

double merge1(double s, double l, const MergeConfig& c) {
  return merge_exposures(Image(1, 1, 1, s), Image(1, 1, 1, l), c).at(0, 0, 0);
}

}  // namespace

TEST(Merge, ConsistentPixel) { EXPECT_DOUBLE_EQ(merge1(10, 40, eight_bit()), 10.0); }

TEST(Merge, SaturatedLongFallsBackToShort) { EXPECT_EQ(merge1(100, 255, eight_bit()), 100.0); }

TEST(Merge, KneeWeighting) {
  EXPECT_DOUBLE_EQ(long_exposure_weight(242.25, eight_bit()), 0.5);
  EXPECT_NEAR(merge1(10, 242.25, eight_bit()), (10 + 0.5 * 60.5625) / 1.5, 1e-12);
  EXPECT_NEAR(merge1(10, 242.25, eight_bit()), 26.854, 1e-3);
}

TEST(Merge, NoiseFreeRecoversRadiance) {
  const Image radiance = oracle::texture(16, 16, 3);
  Image s = radiance, l = radiance;
  for (double& v : l.data()) v *= 0.2;  // keep long below the knee
  for (double& v : s.data()) v *= 0.05;
  const Image m = merge_exposures(s, l, {});
  for (std::size_t i = 0; i < m.data().size(); ++i)
    EXPECT_NEAR(m.data()[i] / (l.data()[i] / 4.0), 1.0, 1e-6);
}

TEST(Merge, ScaleEquivariant) {
  const MergeConfig c = eight_bit();
  const double k = 1.7;
  EXPECT_NEAR(merge1(k * 12, k * 47, c), k * merge1(12, 47, c), 1e-12);
}

TEST(Merge, RangeExtension) {
  const RecoverableRange r = recoverable_range({});
  EXPECT_DOUBLE_EQ(r.extension(), 4.0);
}

TEST(Merge, Errors) {
  EXPECT_THROW(merge_exposures(Image(2, 2, 1), Image(3, 2, 1), {}), InputError);
  EXPECT_THROW(merge_exposures(Image(1, 1, 1, -1.0), Image(1, 1, 1), {}), InputError);
  MergeConfig c;
  c.weight_knee = 1.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Tonemap, ZeroImage) {
  for (double v : oracle::values(tonemap_reinhard(Image(4, 4, 3, 0.0)))) EXPECT_EQ(v, 0.0);
}

TEST(Tonemap, ConstantLuminanceIsWhite) {
  // L_m = a and L_w' = a, so L_d = a (1 + a / a^2) / (1 + a) = 1.
  for (double v : oracle::values(tonemap_reinhard(Image(4, 4, 3, 2.5)))) EXPECT_NEAR(v, 1.0, 1e-6);
}

TEST(Tonemap, ClosedFormWithFixedStatistics) {
  const double a = 0.18, lavg = 0.5, white = 4.0, L = 0.5;
  TonemapConfig c;
  c.log_average = lavg;
  c.white = white;
  const double lm = a * L / lavg, lw = a * white / lavg;
  const double expect = lm * (1 + lm / (lw * lw)) / (1 + lm);
  EXPECT_NEAR(tonemap_reinhard(Image(1, 1, 1, L), c).at(0, 0, 0), expect, 1e-12);
  // Chroma is preserved: every channel scales by L_d / L.
  Image rgb(1, 1, 3, std::vector<double>{0.2, 0.6, 0.9});
  const double lum = 0.2126 * 0.2 + 0.7152 * 0.6 + 0.0722 * 0.9;
  const Image out = tonemap_reinhard(rgb, c);
  EXPECT_NEAR(out.at(0, 0, 0) / out.at(0, 0, 2), 0.2 / 0.9, 1e-12);
  const double lm2 = a * lum / lavg;
  EXPECT_NEAR(out.at(0, 0, 1), 0.6 * lm2 * (1 + lm2 / (lw * lw)) / (1 + lm2) / lum, 1e-12);
}

TEST(Tonemap, MonotoneWithSharedCurve) {
  TonemapConfig c;
  c.log_average = 0.5;
  c.white = 4.0;
  double prev = -1.0;
  for (double L : {0.01, 0.1, 0.5, 1.0, 3.0}) {
    const double out = tonemap_reinhard(Image(1, 1, 1, L), c).at(0, 0, 0);
    EXPECT_GT(out, prev);
    prev = out;
  }
}

TEST(Tonemap, OutputInUnitRange) {
  Image img = oracle::texture(12, 12, 3);
  for (double& v : img.data()) v = std::exp(8 * (v - 0.5));
  for (double v : oracle::values(tonemap_reinhard(img))) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
