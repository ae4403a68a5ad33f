#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dualvfi/core.hpp"

namespace dualvfi {

// Timing of a dual-exposure capture simulated from a high-framerate
// sequence. Frame indices are 1-based positions in the source window. Time
// is normalized so that t = 0 is the end of frame 0's exposure and t = 1 the
// end of frame 1's exposure.
struct ExposureTimeline {
  int exposure_frames = 4;
  int gap_frames = 9;
  double ratio = 4.0;
  std::vector<double> target_times{0.25, 0.5};

  int inter_end_interval() const { return exposure_frames - 1 + gap_frames; }
  int window_frames() const { return exposure_frames + inter_end_interval(); }
  double tau() const { return static_cast<double>(exposure_frames - 1) / inter_end_interval(); }

  int frame0_start() const { return 1; }
  int frame0_end() const { return exposure_frames; }
  int frame1_start() const { return exposure_frames + gap_frames; }
  int frame1_end() const { return window_frames(); }

  double time_of(int index) const {
    return static_cast<double>(index - exposure_frames) / inter_end_interval();
  }
  // Source frame nearest to normalized time t.
  int index_of(double t) const;

  // Throws InputError unless 0 < tau < 1, ratio > 1, exposure_frames >= 2 and
  // every target maps to a distinct frame strictly inside (0, 1).
  void validate() const;
};

struct DualExposureFrame {
  Image raw;       // full width; long exposure in even columns, short in odd
  Image short_exp; // half width
  Image long_exp;  // half width, clipped at saturation_level
  Image short_full;
  Image long_full;
  double saturation_level = 1.0;
};

struct TargetFrame {
  double t = 0.0;
  int index = 0;  // 1-based source frame
  Image image;
};

struct SaturationVerdict {
  bool rejected = false;
  double max_fraction = 0.0;  // worst saturated-pixel fraction over the window
};

struct SynthSample {
  DualExposureFrame frame0;
  DualExposureFrame frame1;
  Image sharp_0s, sharp_0e, sharp_1s, sharp_1e;
  std::vector<TargetFrame> targets;
  // End->start intra-exposure flows and end-to-end cross flows; present when
  // the sample comes from an analytic scene.
  std::optional<FlowField> gt_intra_0, gt_intra_1;
  std::optional<FlowField> gt_cross_01, gt_cross_10;
  SaturationVerdict verdict;
  double tau = 0.25;
};

struct SynthOptions {
  double saturation_level = 1.0;
  double reject_fraction = 0.2;
  // Robustness hook: zero-mean Gaussian noise added to the short and long
  // exposures after clipping. Off by default.
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

// Pixel-wise sum of the frames, clipped at saturation_level.
Image simulate_long_exposure(std::span<const Image> frames, double saturation_level);

// True when more than `threshold` of the pixels (any channel) reach the
// saturation level.
bool reject_saturated_patch(const Image& patch, double saturation_level, double threshold = 0.2);
double saturated_fraction(const Image& patch, double saturation_level);

// Even output columns take `long_exp`, odd columns take `short_exp`.
Image interleave_columns(const Image& short_exp, const Image& long_exp);
// Inverse of interleave_columns: returns {short, long}. Width must be even.
std::pair<Image, Image> deinterleave_columns(const Image& raw);

DualExposureFrame make_dual_exposure(const Image& sharp_end, std::span<const Image> exposure,
                                     double saturation_level);

// Builds one sample from a window of timeline.window_frames() frames. The
// saturated-patch verdict is recorded in the sample, not thrown.
SynthSample synthesize_sample(std::span<const Image> frames, const ExposureTimeline& timeline,
                              const SynthOptions& options = {});

}  // namespace dualvfi
