#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include <json.hpp>

#include "dualvfi/compare.hpp"
#include "dualvfi/config.hpp"
#include "dualvfi/errors.hpp"
#include "dualvfi/quality.hpp"
#include "dualvfi/sample_io.hpp"
#include "dualvfi/scene.hpp"
#include "dualvfi/sweep.hpp"
#include "oracles.hpp"

using namespace dualvfi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dualvfi_eval_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Psnr, Examples) {
  const Image a = oracle::texture(16, 16, 3);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  Image b(20, 20, 1, 100.0), c(20, 20, 1, 116.0);
  EXPECT_NEAR(psnr(b, c, 255.0), 20 * std::log10(255.0 / 16.0), 1e-12);
  EXPECT_NEAR(psnr(b, c, 255.0), 24.05, 5e-3);
  EXPECT_DOUBLE_EQ(psnr(b, c, 255.0), psnr(c, b, 255.0));
}

TEST(Psnr, UniformNoise) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  const Image gt(512, 512, 1, 0.5);
  Image p = gt;
  for (double& v : p.data()) v += u(rng);
  const double var = 0.2 * 0.2 / 12.0;
  EXPECT_NEAR(psnr(p, gt), 10 * std::log10(1.0 / var), 0.1);
}

TEST(Psnr, BorderExclusion) {
  Image a(10, 10, 1, 0.5), b = a;
  b.at(0, 0, 0) = 1.0;
  EXPECT_TRUE(std::isinf(psnr(a, b, 1.0, 2)));
  EXPECT_FALSE(std::isinf(psnr(a, b, 1.0, 0)));
  EXPECT_THROW(psnr(a, b, 1.0, 5), InputError);
  EXPECT_THROW(psnr(a, Image(9, 10, 1), 1.0), InputError);
}

TEST(Ssim, IdenticalNegativeSymmetric) {
  const Image a = oracle::texture(32, 32, 3);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  Image neg = a;
  for (double& v : neg.data()) v = 1.0 - v;
  EXPECT_LT(ssim(a, neg), 0.0);
  const Image b = oracle::texture(32, 32, 3, 99);
  EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
}

TEST(Ssim, ConstantImagesClosedForm) {
  EXPECT_NEAR(ssim(Image(16, 16, 1, 0.3), Image(16, 16, 1, 0.5)), oracle::constant_ssim(0.3, 0.5), 1e-12);
  SsimParams p;
  p.peak = 255.0;
  EXPECT_NEAR(ssim(Image(12, 12, 1, 60.0), Image(12, 12, 1, 90.0), p), oracle::constant_ssim(60, 90, 255), 1e-12);
}

TEST(Ssim, TooSmallThrows) { EXPECT_THROW(ssim(Image(8, 8, 1), Image(8, 8, 1)), InputError); }

TEST(Evaluate, LdrSpaceUsesGroundTruthCurve) {
  Image gt = oracle::texture(24, 24, 3);
  for (double& v : gt.data()) v *= 3.0;
  const Score s = evaluate(gt, gt, {});
  EXPECT_TRUE(std::isinf(s.psnr));
  Image p = gt;
  p.at(10, 10, 1) += 0.5;
  EvalConfig hdr;
  hdr.hdr_space = true;
  hdr.hdr_peak = 3.0;
  EXPECT_LT(evaluate(p, gt, {}).psnr, 80.0);
  EXPECT_NEAR(evaluate(p, gt, hdr).psnr, psnr(p, gt, 3.0, 2), 1e-12);
}

TEST(Compare, StaticScenesTie) {
  const auto dir = scratch("static");
  std::mt19937_64 rng(1);
  const SyntheticScene scene(random_sprite_scene(rng, 64, 64, 3, {0, 0}, {0, 0}, 16));
  const ExposureTimeline tl;
  SampleInfo info;
  info.id = "static";
  write_sample(dir / "static", synthesize_scene_sample(scene, tl), tl, {}, info);
  const ComparisonReport r = run_comparison(dir, {});
  ASSERT_EQ(r.records.size(), 6u);
  for (const auto& rec : r.records) EXPECT_TRUE(std::isinf(rec.psnr) || rec.psnr > 60.0);
  const auto j = nlohmann::json::parse(comparison_to_json(r));
  if (std::isinf(r.records[0].psnr)) {
    EXPECT_TRUE(j["records"][0]["psnr"].is_null());
    EXPECT_TRUE(j["records"][0]["psnr_infinite"].get<bool>());
  }
}

TEST(Compare, SweepOrderingGroupsAndWarnings) {
  const auto dir = scratch("sweep");
  SweepOptions o;
  o.count = 4;
  o.size = 64;
  o.sprite_size = 24;
  o.seed = 5;
  const auto entries = generate_sweep(dir, o);
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_LT(entries.front().acceleration, entries.back().acceleration);

  CompareOptions opt;
  opt.times = {0.25, 0.4};
  opt.accel_bins = 2;
  const ComparisonReport r = run_comparison(dir, opt);
  EXPECT_EQ(r.records.size(), 4u * 3u);
  EXPECT_EQ(r.warnings.size(), 4u);
  ASSERT_FALSE(r.aggregates.empty());
  EXPECT_EQ(r.aggregates[0].group, "all");
  EXPECT_EQ(r.aggregates[0].variant, "quadratic");
  int bins = 0;
  for (const auto& a : r.aggregates) bins += a.group.rfind("accel[", 0) == 0;
  EXPECT_EQ(bins, 2 * 3);
  std::map<std::string, double> all;
  for (const auto& a : r.aggregates)
    if (a.group == "all") all[a.variant] = a.mean_psnr;
  EXPECT_GT(all["quadratic"], all["linear"]);
  EXPECT_GT(all["two_flow"], all["linear"]);
  EXPECT_EQ(comparison_to_json(r), comparison_to_json(run_comparison(dir, opt)));
  EXPECT_NE(comparison_to_text(r).find("accel["), std::string::npos);
}

TEST(Compare, EmptyDatasetThrows) {
  const auto dir = scratch("empty");
  EXPECT_THROW(run_comparison(dir, {}), InputError);
  EXPECT_THROW(run_comparison(dir / "missing", {}), InputError);
}

TEST(Compare, PerturbedFlowsAreDeterministic) {
  const auto dir = scratch("perturb");
  SweepOptions o;
  o.count = 1;
  o.size = 64;
  o.sprite_size = 24;
  generate_sweep(dir, o);
  const LoadedSample ls = read_sample(list_samples(dir).front());
  FlowSource src;
  src.perturb_px = 0.5;
  src.perturb_seed = 3;
  const FlowSet a = resolve_flows(ls, src), b = resolve_flows(ls, src);
  EXPECT_EQ(a.cross_01, b.cross_01);
  EXPECT_NE(a.cross_01, resolve_flows_exact(ls, src).cross_01);
  EXPECT_NE(src.describe().find("perturb"), std::string::npos);
}

TEST(Config, OverridesAndRejectsUnknownKeys) {
  Settings s;
  apply_settings_json(s, R"({"blend": {"coverage_gain": 1.5, "splat_photo_scale": 0.1},
                             "flow": {"levels": 5}, "timeline": {"gap_frames": 5}})");
  EXPECT_EQ(s.blend.coverage_gain, 1.5);
  EXPECT_EQ(s.blend.splat_photo_scale, 0.1);
  EXPECT_EQ(s.flow.levels, 5);
  EXPECT_EQ(s.analyze.estimator.levels, 5);
  EXPECT_EQ(s.timeline.gap_frames, 5);
  EXPECT_THROW(apply_settings_json(s, R"({"blend": {"coverage_gian": 1}})"), InputError);
  EXPECT_THROW(apply_settings_json(s, R"({"blnd": {}})"), InputError);
  EXPECT_THROW(apply_settings_json(s, R"({"blend": {"alpha_mix": 2}})"), InputError);
  EXPECT_THROW(apply_settings_json(s, "{not json"), InputError);
}

TEST(Config, PrintRoundTrip) {
  Settings s;
  s.blend.alpha_mix = 0.25;
  s.merge.weight_knee = 0.8;
  Settings t;
  apply_settings_json(t, settings_to_json(s));
  EXPECT_EQ(t.blend.alpha_mix, 0.25);
  EXPECT_EQ(t.merge.weight_knee, 0.8);
  EXPECT_EQ(settings_to_json(t), settings_to_json(s));
}
