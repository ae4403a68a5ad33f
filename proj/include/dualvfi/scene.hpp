#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dualvfi/core.hpp"
#include "dualvfi/sensor.hpp"

namespace dualvfi {

// Analytic synthetic scenes: textured rectangular sprites over a textured
// background, each layer translating along p(t) = p0 + v t + a t^2/2 + j t^3/6
// in normalized time. Frames and correspondence flows are evaluated in closed
// form, which makes the scene usable as a test oracle.

struct Trajectory {
  Vec2 p0, v, a, j;

  Vec2 at(double t) const {
    return {p0.x + v.x * t + 0.5 * a.x * t * t + j.x * t * t * t / 6.0,
            p0.y + v.y * t + 0.5 * a.y * t * t + j.y * t * t * t / 6.0};
  }
};

// Smooth band-limited texture: per-channel mean plus a sum of sinusoids.
struct Texture {
  struct Wave {
    double fx = 0.0, fy = 0.0, phase = 0.0;
    std::vector<double> amplitude;  // per channel
  };
  std::vector<double> mean;  // per channel
  std::vector<Wave> waves;

  double eval(double x, double y, int c) const;

  // Waves with periods in [min_period, max_period] px; values stay inside
  // [lo, hi].
  static Texture random(std::mt19937_64& rng, int channels, double lo, double hi,
                        double min_period = 10.0, double max_period = 32.0, int wave_count = 4);
  static Texture flat(int channels, double value);
};

struct Sprite {
  double width = 32.0;
  double height = 32.0;
  Trajectory motion;  // position of the top-left corner
  Texture texture;
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  int channels = 1;
  Texture background;
  Trajectory background_motion;
  std::vector<Sprite> sprites;  // later sprites are drawn on top
};

class SyntheticScene {
 public:
  explicit SyntheticScene(SceneSpec spec);

  const SceneSpec& spec() const { return spec_; }

  Image render(double t) const;
  // Correspondence flow aligned with the frame at t0, pointing into the
  // frame at t1, from the layer visible at each pixel center.
  FlowField flow(double t0, double t1) const;
  // 1 where flow(t0, t1) is reliable: the pixel sits at least `margin` px
  // from every layer edge at t0, lands inside the canvas, and lands on the
  // same layer, again `margin` px from every edge, at t1.
  std::vector<std::uint8_t> valid_mask(double t0, double t1, double margin = 1.5) const;

  // Topmost layer containing the point: sprite index, or -1 for background.
  int layer_at(double x, double y, double t) const;
  Vec2 layer_position(int layer, double t) const;

 private:
  bool near_edge(double x, double y, double t, double margin) const;

  SceneSpec spec_;
};

struct SceneFrames {
  std::vector<Image> frames;  // window_frames() images, source order
  std::vector<double> times;
};

// Renders the timeline's source window. Throws InputError when a sprite
// stays entirely outside the canvas for every frame.
SceneFrames generate_synthetic_scene(const SyntheticScene& scene, const ExposureTimeline& timeline);

// synthesize_sample on the rendered window, with analytic intra (end->start)
// and cross (end->end) flows attached.
SynthSample synthesize_scene_sample(const SyntheticScene& scene, const ExposureTimeline& timeline,
                                    const SynthOptions& options = {});

// Random single-sprite scene used by sweeps: the sprite moves with the given
// velocity and acceleration (px per normalized unit) over a static background.
SceneSpec random_sprite_scene(std::mt19937_64& rng, int width, int height, int channels,
                              Vec2 velocity, Vec2 acceleration, double sprite_size = 64.0);

}  // namespace dualvfi
