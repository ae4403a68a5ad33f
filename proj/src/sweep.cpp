#include "dualvfi/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "dualvfi/errors.hpp"
#include "dualvfi/sample_io.hpp"

namespace dualvfi {

double scene_nonuniformity(const SceneSpec& spec, const ExposureTimeline& timeline) {
  if (spec.sprites.empty()) return 0.0;
  std::vector<Vec2> pos;
  for (int i = 1; i <= timeline.window_frames(); ++i)
    pos.push_back(spec.sprites.front().motion.at(timeline.time_of(i)));
  return trajectory_nonuniformity(pos, NormMode::squared).value_or(0.0);
}

SceneSpec sweep_scene(const SweepOptions& o, int index, double* acceleration) {
  if (o.count < 1 || o.size < 16 || o.channels < 1) throw InputError("bad sweep options");
  std::seed_seq seq{static_cast<std::uint64_t>(o.seed), static_cast<std::uint64_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double amag = o.accel_min + (o.accel_max - o.accel_min) * (index + unit(rng)) / o.count;
  const double speed = o.speed_min + (o.speed_max - o.speed_min) * unit(rng);
  const double av = 2.0 * std::numbers::pi * unit(rng);
  // Acceleration within 90 degrees of the velocity direction, either way.
  const double aa = av + (unit(rng) - 0.5) * std::numbers::pi;
  if (acceleration) *acceleration = amag;
  return random_sprite_scene(rng, o.size, o.size, o.channels,
                             {speed * std::cos(av), speed * std::sin(av)},
                             {amag * std::cos(aa), amag * std::sin(aa)}, o.sprite_size);
}

std::vector<SweepEntry> generate_sweep(const std::filesystem::path& out, const SweepOptions& o,
                                       const ExposureTimeline& timeline, const SynthOptions& synth,
                                       double range) {
  std::vector<SweepEntry> entries;
  for (int i = 0; i < o.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "scene_%04d", i);
    SweepEntry e;
    e.id = id;
    const SceneSpec spec = sweep_scene(o, i, &e.acceleration);
    e.nonuniformity = scene_nonuniformity(spec, timeline);
    e.category = category_of(e.nonuniformity, range);
    const SynthSample s = synthesize_scene_sample(SyntheticScene(spec), timeline, synth);
    e.rejected = s.verdict.rejected;
    SampleInfo info;
    info.id = e.id;
    info.ingest = "generated";
    info.category = to_string(e.category);
    info.acceleration = e.acceleration;
    write_sample(out / e.id, s, timeline, synth, info);
    entries.push_back(e);
  }
  return entries;
}

}  // namespace dualvfi
