#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dualvfi/flow.hpp"
#include "dualvfi/interp.hpp"
#include "dualvfi/quality.hpp"
#include "dualvfi/sample_io.hpp"

namespace dualvfi {

struct EvalConfig {
  bool hdr_space = false;  // score linear HDR directly instead of tonemapped sRGB
  int border_exclude = 2;
  SsimParams ssim;
  double hdr_peak = 1.0;
};

struct EvalRecord {
  std::string sample_id;
  std::string variant;
  double t = 0.0;
  double psnr = 0.0;  // +inf for identical images
  double ssim = 0.0;
  int excluded_border_px = 0;
  std::optional<std::string> category;
  std::optional<double> acceleration;  // generator samples only
};

struct Score {
  double psnr = 0.0;
  double ssim = 0.0;
};

// Scores a prediction against ground truth. In LDR mode both images go
// through the Reinhard curve fitted to the ground truth, then sRGB encoding.
Score evaluate(const Image& pred, const Image& gt, const EvalConfig& cfg);

// Flows for the interpolation pipeline of one sample, including the
// source's emulated estimation error when configured.
FlowSet resolve_flows(const LoadedSample& sample, const FlowSource& source);
FlowSet resolve_flows_exact(const LoadedSample& sample, const FlowSource& source);

InterpInputs make_interp_inputs(const LoadedSample& sample, FlowSet flows);

struct Aggregate {
  std::string group;  // "all", a category label, or an acceleration bin "accel[lo,hi)"
  std::string variant;
  int count = 0;
  double mean_psnr = 0.0;  // +inf when any record is infinite
  double mean_ssim = 0.0;
};

struct ComparisonReport {
  std::vector<EvalRecord> records;
  std::vector<Aggregate> aggregates;
  std::vector<std::string> warnings;
  std::vector<std::string> variants;
  std::string flow_source;
  EvalConfig eval;
};

struct CompareOptions {
  std::vector<MotionVariant> variants{MotionVariant::quadratic, MotionVariant::two_flow,
                                      MotionVariant::linear};
  std::vector<double> times;  // empty: every target stored in the sample
  FlowSource flows;
  BlendConfig blend;
  EvalConfig eval;
  // Records with a known acceleration are also grouped into this many
  // equal-width bins spanning the observed accelerations (0: off).
  int accel_bins = 4;
};

// Every sample directory (one containing manifest.json) under `dataset`, in
// sorted order; samples flagged as saturated are skipped with a warning.
ComparisonReport run_comparison(const std::filesystem::path& dataset, const CompareOptions& options);

std::vector<std::filesystem::path> list_samples(const std::filesystem::path& dataset);

std::string comparison_to_json(const ComparisonReport& report, int indent = 2);
std::string comparison_to_text(const ComparisonReport& report);

}  // namespace dualvfi
