#include "dualvfi/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw InputError("raster dimensions must be positive");
  if (channels <= 0) throw InputError("raster needs at least one channel");
}

int half_up(int n) { return (n + 1) / 2; }

void downsample_into(const Raster& in, std::span<double> out, int out_w, int out_h) {
  const int c = in.channels();
  parallel_rows(out_h, [&](int y) {
    const int y0 = 2 * y;
    const int y1 = std::min(y0 + 1, in.height() - 1);
    for (int x = 0; x < out_w; ++x) {
      const int x0 = 2 * x;
      const int x1 = std::min(x0 + 1, in.width() - 1);
      const int count = (x1 - x0 + 1) * (y1 - y0 + 1);
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int yy = y0; yy <= y1; ++yy)
          for (int xx = x0; xx <= x1; ++xx) s += in.at(xx, yy, ch);
        out[(static_cast<std::size_t>(y) * out_w + x) * c + ch] = s / count;
      }
    }
  });
}

void check_upsample_target(const Raster& in, int target_w, int target_h) {
  auto ok = [](int src, int dst) { return dst == 2 * src || dst == 2 * src - 1; };
  if (!ok(in.width(), target_w) || !ok(in.height(), target_h))
    throw InputError("upsample target " + std::to_string(target_w) + "x" +
                     std::to_string(target_h) + " incompatible with source " +
                     std::to_string(in.width()) + "x" + std::to_string(in.height()));
}

void upsample_into(const Raster& in, std::span<double> out, int target_w, int target_h,
                   double scale) {
  const int c = in.channels();
  parallel_rows(target_h, [&](int y) {
    for (int x = 0; x < target_w; ++x)
      for (int ch = 0; ch < c; ++ch)
        out[(static_cast<std::size_t>(y) * target_w + x) * c + ch] =
            scale * bilinear_sample(in, 0.5 * x, 0.5 * y, ch);
  });
}

}  // namespace

Raster::Raster(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(pixel_count() * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != pixel_count() * channels)
    throw InputError("raster data length does not match width*height*channels");
}

bool Raster::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Image::Image(int width, int height, int channels, double fill)
    : Raster(width, height, channels, fill) {}

Image::Image(int width, int height, int channels, std::vector<double> data)
    : Raster(width, height, channels, std::move(data)) {}

FlowField::FlowField(int width, int height, double u, double v) : Raster(width, height, 2, 0.0) {
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[2 * i] = u;
    data_[2 * i + 1] = v;
  }
}

FlowField::FlowField(int width, int height, std::vector<double> data)
    : Raster(width, height, 2, std::move(data)) {}

FlowField FlowField::operator-() const {
  FlowField out = *this;
  for (double& d : out.data_) d = -d;
  return out;
}

FlowField& FlowField::operator*=(double s) {
  for (double& d : data_) d *= s;
  return *this;
}

double bilinear_sample(const Raster& r, double x, double y, int channel) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw NumericalError("invalid coordinate");
  x = std::clamp(x, 0.0, static_cast<double>(r.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(r.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = r.at(x0, y0, channel) + fx * (r.at(x1, y0, channel) - r.at(x0, y0, channel));
  const double bot = r.at(x0, y1, channel) + fx * (r.at(x1, y1, channel) - r.at(x0, y1, channel));
  return top + fy * (bot - top);
}

Vec2 sample_flow(const FlowField& flow, double x, double y) {
  return {bilinear_sample(flow, x, y, 0), bilinear_sample(flow, x, y, 1)};
}

Image backward_warp(const Image& img, const FlowField& flow) {
  if (!img.same_size(flow)) throw InputError("backward_warp: image and flow dimensions differ");
  Image out(img.width(), img.height(), img.channels());
  parallel_rows(img.height(), [&](int y) {
    for (int x = 0; x < img.width(); ++x) {
      const double sx = x + flow.u(x, y);
      const double sy = y + flow.v(x, y);
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = bilinear_sample(img, sx, sy, c);
    }
  });
  return out;
}

Image downsample2x(const Image& img) {
  Image out(half_up(img.width()), half_up(img.height()), img.channels());
  downsample_into(img, out.data(), out.width(), out.height());
  return out;
}

FlowField downsample2x(const FlowField& flow) {
  FlowField out(half_up(flow.width()), half_up(flow.height()));
  downsample_into(flow, out.data(), out.width(), out.height());
  out *= 0.5;
  return out;
}

int max_pyramid_levels(int width, int height, int wanted) {
  if (std::min(width, height) < 8) return 0;
  int levels = 1;
  int w = width, h = height;
  while (levels < wanted) {
    w = half_up(w);
    h = half_up(h);
    if (std::min(w, h) < 8) break;
    ++levels;
  }
  return levels;
}

namespace {

template <class T>
Pyramid<T> build_pyramid_impl(const T& base, int levels) {
  if (levels < 1) throw InputError("pyramid needs at least one level");
  if (max_pyramid_levels(base.width(), base.height(), levels) < levels)
    throw InputError("image " + std::to_string(base.width()) + "x" +
                     std::to_string(base.height()) + " too small for " +
                     std::to_string(levels) + " pyramid levels");
  Pyramid<T> p;
  p.levels.reserve(levels);
  p.levels.push_back(base);
  for (int l = 1; l < levels; ++l) p.levels.push_back(downsample2x(p.levels.back()));
  return p;
}

}  // namespace

Pyramid<Image> build_pyramid(const Image& img, int levels) {
  return build_pyramid_impl(img, levels);
}

Pyramid<FlowField> build_pyramid(const FlowField& flow, int levels) {
  return build_pyramid_impl(flow, levels);
}

FlowField upsample_flow2x(const FlowField& flow, int target_w, int target_h) {
  check_upsample_target(flow, target_w, target_h);
  FlowField out(target_w, target_h);
  upsample_into(flow, out.data(), target_w, target_h, 2.0);
  return out;
}

Image upsample2x(const Image& img, int target_w, int target_h) {
  check_upsample_target(img, target_w, target_h);
  Image out(target_w, target_h, img.channels());
  upsample_into(img, out.data(), target_w, target_h, 1.0);
  return out;
}

double luminance(const Image& img, int x, int y) {
  if (img.channels() == 1) return img.at(x, y, 0);
  return 0.2126 * img.at(x, y, 0) + 0.7152 * img.at(x, y, 1) + 0.0722 * img.at(x, y, 2);
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y, 0) = luminance(img, x, y);
  return out;
}

}  // namespace dualvfi
