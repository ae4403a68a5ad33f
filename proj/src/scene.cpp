#include "dualvfi/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

double Texture::eval(double x, double y, int c) const {
  double v = mean[c];
  for (const auto& w : waves)
    v += w.amplitude[c] * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
  return v;
}

Texture Texture::random(std::mt19937_64& rng, int channels, double lo, double hi,
                        double min_period, double max_period, int wave_count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = hi - lo;
  Texture tex;
  tex.mean.resize(channels);
  for (auto& m : tex.mean) m = lo + span * (0.4 + 0.2 * unit(rng));
  double headroom = span;
  for (double m : tex.mean) headroom = std::min({headroom, m - lo, hi - m});
  for (int k = 0; k < wave_count; ++k) {
    Wave w;
    const double period = min_period + (max_period - min_period) * unit(rng);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    w.fx = std::cos(angle) / period;
    w.fy = std::sin(angle) / period;
    w.phase = 2.0 * std::numbers::pi * unit(rng);
    w.amplitude.resize(channels);
    for (auto& a : w.amplitude) a = headroom / wave_count * (0.5 + 0.5 * unit(rng));
    tex.waves.push_back(std::move(w));
  }
  return tex;
}

Texture Texture::flat(int channels, double value) {
  Texture tex;
  tex.mean.assign(channels, value);
  return tex;
}

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

bool inside(double x, double y, Vec2 p, const Sprite& s) {
  return x >= p.x && x < p.x + s.width && y >= p.y && y < p.y + s.height;
}

}  // namespace

SyntheticScene::SyntheticScene(SceneSpec spec) : spec_(std::move(spec)) {
  if (spec_.width <= 0 || spec_.height <= 0) throw InputError("scene dimensions must be positive");
  if (spec_.channels != 1 && spec_.channels != 3) throw InputError("scene channels must be 1 or 3");
  auto check = [&](const Texture& t) {
    if (static_cast<int>(t.mean.size()) != spec_.channels)
      throw InputError("texture channel count does not match the scene");
  };
  check(spec_.background);
  for (const auto& s : spec_.sprites) {
    check(s.texture);
    if (!(s.width > 0 && s.height > 0)) throw InputError("sprite size must be positive");
  }
}

Vec2 SyntheticScene::layer_position(int layer, double t) const {
  return layer < 0 ? spec_.background_motion.at(t) : spec_.sprites[layer].motion.at(t);
}

int SyntheticScene::layer_at(double x, double y, double t) const {
  for (int i = static_cast<int>(spec_.sprites.size()) - 1; i >= 0; --i)
    if (inside(x, y, spec_.sprites[i].motion.at(t), spec_.sprites[i])) return i;
  return -1;
}

bool SyntheticScene::near_edge(double x, double y, double t, double margin) const {
  for (const auto& s : spec_.sprites) {
    const Vec2 p = s.motion.at(t);
    const bool in_outer = x >= p.x - margin && x < p.x + s.width + margin &&
                          y >= p.y - margin && y < p.y + s.height + margin;
    const bool in_inner = x >= p.x + margin && x < p.x + s.width - margin &&
                          y >= p.y + margin && y < p.y + s.height - margin;
    if (in_outer && !in_inner) return true;
  }
  return false;
}

Image SyntheticScene::render(double t) const {
  Image img(spec_.width, spec_.height, spec_.channels);
  const Vec2 bg = spec_.background_motion.at(t);
  std::vector<Vec2> pos;
  for (const auto& s : spec_.sprites) pos.push_back(s.motion.at(t));
  parallel_rows(spec_.height, [&](int y) {
    for (int x = 0; x < spec_.width; ++x)
      for (int c = 0; c < spec_.channels; ++c) {
        double v = spec_.background.eval(x - bg.x, y - bg.y, c);
        for (std::size_t i = 0; i < spec_.sprites.size(); ++i) {
          const auto& s = spec_.sprites[i];
          const double cover = overlap(x - 0.5, x + 0.5, pos[i].x, pos[i].x + s.width) *
                               overlap(y - 0.5, y + 0.5, pos[i].y, pos[i].y + s.height);
          if (cover > 0.0) v = cover * s.texture.eval(x - pos[i].x, y - pos[i].y, c) + (1.0 - cover) * v;
        }
        img.at(x, y, c) = v;
      }
  });
  return img;
}

FlowField SyntheticScene::flow(double t0, double t1) const {
  FlowField f(spec_.width, spec_.height);
  parallel_rows(spec_.height, [&](int y) {
    for (int x = 0; x < spec_.width; ++x) {
      const int layer = layer_at(x, y, t0);
      const Vec2 a = layer_position(layer, t0);
      const Vec2 b = layer_position(layer, t1);
      f.u(x, y) = b.x - a.x;
      f.v(x, y) = b.y - a.y;
    }
  });
  return f;
}

std::vector<std::uint8_t> SyntheticScene::valid_mask(double t0, double t1, double margin) const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(spec_.width) * spec_.height, 0);
  const FlowField f = flow(t0, t1);
  parallel_rows(spec_.height, [&](int y) {
    for (int x = 0; x < spec_.width; ++x) {
      if (near_edge(x, y, t0, margin)) continue;
      const int layer = layer_at(x, y, t0);
      const double tx = x + f.u(x, y);
      const double ty = y + f.v(x, y);
      if (tx < 0 || ty < 0 || tx > spec_.width - 1 || ty > spec_.height - 1) continue;
      if (near_edge(tx, ty, t1, margin) || layer_at(tx, ty, t1) != layer) continue;
      mask[static_cast<std::size_t>(y) * spec_.width + x] = 1;
    }
  });
  return mask;
}

SceneFrames generate_synthetic_scene(const SyntheticScene& scene, const ExposureTimeline& timeline) {
  timeline.validate();
  const auto& spec = scene.spec();
  SceneFrames out;
  for (int i = 1; i <= timeline.window_frames(); ++i) out.times.push_back(timeline.time_of(i));

  for (std::size_t s = 0; s < spec.sprites.size(); ++s) {
    const auto& sp = spec.sprites[s];
    const bool visible = std::any_of(out.times.begin(), out.times.end(), [&](double t) {
      const Vec2 p = sp.motion.at(t);
      return overlap(p.x, p.x + sp.width, -0.5, spec.width - 0.5) > 0.0 &&
             overlap(p.y, p.y + sp.height, -0.5, spec.height - 0.5) > 0.0;
    });
    if (!visible)
      throw InputError("sprite " + std::to_string(s) + " lies outside the canvas in every frame");
  }
  for (double t : out.times) out.frames.push_back(scene.render(t));
  return out;
}

SynthSample synthesize_scene_sample(const SyntheticScene& scene, const ExposureTimeline& timeline,
                                    const SynthOptions& options) {
  const SceneFrames rendered = generate_synthetic_scene(scene, timeline);
  SynthSample s = synthesize_sample(rendered.frames, timeline, options);
  const double tau = timeline.tau();
  s.gt_intra_0 = scene.flow(0.0, -tau);
  s.gt_intra_1 = scene.flow(1.0, 1.0 - tau);
  s.gt_cross_01 = scene.flow(0.0, 1.0);
  s.gt_cross_10 = scene.flow(1.0, 0.0);
  return s;
}

SceneSpec random_sprite_scene(std::mt19937_64& rng, int width, int height, int channels,
                              Vec2 velocity, Vec2 acceleration, double sprite_size) {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.channels = channels;
  spec.background = Texture::random(rng, channels, 0.05, 0.45);
  Sprite s;
  s.width = s.height = sprite_size;
  s.texture = Texture::random(rng, channels, 0.5, 0.95);
  s.motion.v = velocity;
  s.motion.a = acceleration;
  // Center the swept path over t in [-0.5, 1] on the canvas.
  auto centered = [&](double v, double a, double extent, double canvas) {
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k <= 30; ++k) {
      const double t = -0.5 + 1.5 * k / 30.0;
      const double d = v * t + 0.5 * a * t * t;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return std::round((canvas - extent) / 2.0 - (lo + hi) / 2.0);
  };
  s.motion.p0 = {centered(velocity.x, acceleration.x, sprite_size, width),
                 centered(velocity.y, acceleration.y, sprite_size, height)};
  spec.sprites.push_back(std::move(s));
  return spec;
}

}  // namespace dualvfi
