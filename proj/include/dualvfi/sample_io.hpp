#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dualvfi/motion.hpp"
#include "dualvfi/sensor.hpp"

namespace dualvfi {

// Extra manifest fields recorded alongside a sample.
struct SampleInfo {
  std::string id;
  std::string ingest = "linear";  // "srgb-decoded" when source PNGs were linearized
  std::optional<std::string> category;
  std::optional<double> acceleration;  // generator scenes: |a| in px / unit^2
  int first_source_frame = 0;          // 0-based offset of the window in the input
};

struct LoadedSample {
  SynthSample sample;
  SampleInfo info;
};

// Sample directory layout:
//   raw_{0,1}.pfm, short_{0,1}.pfm, long_{0,1}.pfm      sensor data
//   sharp_0s.pfm sharp_0e.pfm sharp_1s.pfm sharp_1e.pfm  keyframes
//   target_NN.pfm                                      NN = source index
//   gt_intra_{0,1}.flo gt_cross_01.flo gt_cross_10.flo (analytic scenes)
//   manifest.json
void write_sample(const std::filesystem::path& dir, const SynthSample& s,
                  const ExposureTimeline& timeline, const SynthOptions& options,
                  const SampleInfo& info);
LoadedSample read_sample(const std::filesystem::path& dir);

// Model fields as a single-channel PFM with the component planes stacked
// vertically (vx, vy, ax, ay[, jx, jy]); `<stem>.json` describes the layout.
void write_motion_model(const std::filesystem::path& pfm_path, const QuadMotionField& m, double tau,
                        MotionVariant variant);
void write_motion_model(const std::filesystem::path& pfm_path, const CubicMotionField& m, double tau);

}  // namespace dualvfi
