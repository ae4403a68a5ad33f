#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dualvfi {

// Row-major interleaved grid of doubles. Shared storage for Image and
// FlowField; not used directly by callers.
class Raster {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_size(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  friend bool operator==(const Raster&, const Raster&) = default;

 protected:
  Raster() = default;
  Raster(int width, int height, int channels, double fill);
  Raster(int width, int height, int channels, std::vector<double> data);

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Linear-light intensities, 1 or 3 channels. Gamma is only applied on export.
class Image : public Raster {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);
  Image(int width, int height, int channels, std::vector<double> data);

  friend bool operator==(const Image&, const Image&) = default;
};

// Per-pixel displacement (u, v) in pixels. A flow aligned with image A maps
// A's pixel x to x + F(x) in the other image.
class FlowField : public Raster {
 public:
  FlowField() = default;
  FlowField(int width, int height, double u = 0.0, double v = 0.0);
  FlowField(int width, int height, std::vector<double> data);

  double& u(int x, int y) { return at(x, y, 0); }
  double& v(int x, int y) { return at(x, y, 1); }
  double u(int x, int y) const { return at(x, y, 0); }
  double v(int x, int y) const { return at(x, y, 1); }

  FlowField operator-() const;
  FlowField& operator*=(double s);

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

template <class T>
struct Pyramid {
  std::vector<T> levels;  // levels[0] is full resolution

  std::size_t size() const { return levels.size(); }
  const T& operator[](std::size_t l) const { return levels[l]; }
};

// Bilinear interpolation with replicate-clamped borders.
double bilinear_sample(const Raster& r, double x, double y, int channel);
Vec2 sample_flow(const FlowField& flow, double x, double y);

// out(x) = img(x + flow(x)), bilinear, per channel.
Image backward_warp(const Image& img, const FlowField& flow);

// 2x2 box mean; a trailing odd row/column averages over the pixels present.
Image downsample2x(const Image& img);
// Box-downsamples the field and halves the displacement values.
FlowField downsample2x(const FlowField& flow);

// Level l has ceil(dim / 2^l) pixels per side. Requires the smallest level
// to keep both dimensions >= 8.
Pyramid<Image> build_pyramid(const Image& img, int levels);
Pyramid<FlowField> build_pyramid(const FlowField& flow, int levels);

// Deepest pyramid (capped at `wanted`) whose coarsest level keeps both
// dimensions >= 8. Returns 0 when the base itself is smaller than 8.
int max_pyramid_levels(int width, int height, int wanted);

// Bilinear upsampling onto a grid of (2w-1 .. 2w) x (2h-1 .. 2h) sampled at
// source coordinate x' / 2; displacements are doubled.
FlowField upsample_flow2x(const FlowField& flow, int target_w, int target_h);
// Same spatial rule without value scaling, for weight maps and images.
Image upsample2x(const Image& img, int target_w, int target_h);

Image to_grayscale(const Image& img);
double luminance(const Image& img, int x, int y);

}  // namespace dualvfi
