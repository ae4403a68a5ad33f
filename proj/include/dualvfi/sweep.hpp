#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dualvfi/metric.hpp"
#include "dualvfi/scene.hpp"
#include "dualvfi/sensor.hpp"

namespace dualvfi {

// Randomized single-sprite scenes with ground-truth flows, written as sample
// directories. Acceleration magnitudes are stratified over
// [accel_min, accel_max] so every acceleration bin is populated.
struct SweepOptions {
  int count = 50;
  std::uint64_t seed = 1;
  int size = 128;
  int channels = 3;
  double accel_min = 2.0;  // px per normalized unit^2
  double accel_max = 16.0;
  double speed_min = 2.0;  // px per normalized unit
  double speed_max = 8.0;
  double sprite_size = 48.0;
};

struct SweepEntry {
  std::string id;
  double acceleration = 0.0;
  double nonuniformity = 0.0;
  Category category = Category::easy;
  bool rejected = false;
};

// Difficulty of a scene from the sprite's trajectory over the source window:
// the non-uniformity score of the analytic positions at every source frame.
double scene_nonuniformity(const SceneSpec& spec, const ExposureTimeline& timeline);

SceneSpec sweep_scene(const SweepOptions& options, int index, double* acceleration = nullptr);

std::vector<SweepEntry> generate_sweep(const std::filesystem::path& out, const SweepOptions& options,
                                       const ExposureTimeline& timeline = {},
                                       const SynthOptions& synth = {}, double range = 0.15);

}  // namespace dualvfi
