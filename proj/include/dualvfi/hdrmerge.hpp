#pragma once

#include <optional>

#include "dualvfi/core.hpp"

namespace dualvfi {

struct MergeConfig {
  double ratio = 4.0;
  double saturation_level = 1.0;
  // Fraction of saturation_level above which the long-exposure weight falls
  // linearly to zero.
  double weight_knee = 0.9;

  void validate() const;
};

// Weight of a long-exposure sample: 1 below knee * level, 0 at level.
double long_exposure_weight(double long_value, const MergeConfig& cfg);

// Radiance in short-exposure units: short has unit weight, long/ratio is
// weighted by long_exposure_weight. A fully saturated long sample yields
// exactly the short value.
Image merge_exposures(const Image& short_exp, const Image& long_exp, const MergeConfig& cfg);

struct RecoverableRange {
  double via_long = 0.0;   // radiance at which the long exposure clips
  double via_short = 0.0;  // radiance at which the short exposure clips
  double extension() const { return via_short / via_long; }
};
RecoverableRange recoverable_range(const MergeConfig& cfg);

struct TonemapConfig {
  double key = 0.18;
  // Scene statistics. Unset values are measured from the input; evaluation
  // fixes them from the reference so prediction and reference share a curve.
  std::optional<double> log_average;
  std::optional<double> white;
};

struct TonemapStats {
  double log_average = 0.0;
  double white = 0.0;  // max luminance
};
TonemapStats measure_tonemap_stats(const Image& hdr);

// Global Reinhard operator on luminance with chroma preserved, clamped to
// [0, 1]. Output is linear.
Image tonemap_reinhard(const Image& hdr, const TonemapConfig& cfg = {});

}  // namespace dualvfi
