#include "dualvfi/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "dualvfi/errors.hpp"

namespace dualvfi {

int ExposureTimeline::index_of(double t) const {
  return exposure_frames + static_cast<int>(std::lround(t * inter_end_interval()));
}

void ExposureTimeline::validate() const {
  if (exposure_frames < 2) throw InputError("exposure_frames must be >= 2");
  if (gap_frames < 1) throw InputError("gap_frames must be >= 1");
  if (!(ratio > 1.0)) throw InputError("exposure ratio must be > 1");
  const double tau_v = tau();
  if (!(tau_v > 0.0 && tau_v < 1.0)) throw InputError("tau must lie in (0, 1)");
  std::set<int> seen;
  for (double t : target_times) {
    if (!(t > 0.0 && t < 1.0)) throw InputError("target times must lie strictly in (0, 1)");
    const int idx = index_of(t);
    if (idx <= frame0_end() || idx >= frame1_end())
      throw InputError("target t=" + std::to_string(t) + " does not map to an in-between frame");
    if (!seen.insert(idx).second)
      throw InputError("target times map to the same source frame");
  }
}

Image simulate_long_exposure(std::span<const Image> frames, double saturation_level) {
  if (frames.size() < 2) throw InputError("long exposure needs at least 2 frames");
  Image out = frames.front();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_size(out) || frames[i].channels() != out.channels())
      throw InputError("long exposure frames differ in dimensions");
    auto dst = out.data();
    auto src = frames[i].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  for (double& v : out.data()) v = std::min(v, saturation_level);
  return out;
}

double saturated_fraction(const Image& patch, double saturation_level) {
  std::size_t count = 0;
  for (int y = 0; y < patch.height(); ++y)
    for (int x = 0; x < patch.width(); ++x)
      for (int c = 0; c < patch.channels(); ++c)
        if (patch.at(x, y, c) >= saturation_level) {
          ++count;
          break;
        }
  return static_cast<double>(count) / patch.pixel_count();
}

bool reject_saturated_patch(const Image& patch, double saturation_level, double threshold) {
  return saturated_fraction(patch, saturation_level) > threshold;
}

Image interleave_columns(const Image& short_exp, const Image& long_exp) {
  if (!short_exp.same_size(long_exp) || short_exp.channels() != long_exp.channels())
    throw InputError("interleave_columns: short and long exposures differ in dimensions");
  Image raw(2 * short_exp.width(), short_exp.height(), short_exp.channels());
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < short_exp.width(); ++x)
      for (int c = 0; c < raw.channels(); ++c) {
        raw.at(2 * x, y, c) = long_exp.at(x, y, c);
        raw.at(2 * x + 1, y, c) = short_exp.at(x, y, c);
      }
  return raw;
}

std::pair<Image, Image> deinterleave_columns(const Image& raw) {
  if (raw.width() % 2 != 0) throw InputError("deinterleave_columns: raw width must be even");
  Image short_exp(raw.width() / 2, raw.height(), raw.channels());
  Image long_exp(raw.width() / 2, raw.height(), raw.channels());
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < short_exp.width(); ++x)
      for (int c = 0; c < raw.channels(); ++c) {
        long_exp.at(x, y, c) = raw.at(2 * x, y, c);
        short_exp.at(x, y, c) = raw.at(2 * x + 1, y, c);
      }
  return {std::move(short_exp), std::move(long_exp)};
}

namespace {

Image columns(const Image& full, int parity) {
  Image out(full.width() / 2, full.height(), full.channels());
  for (int y = 0; y < full.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < full.channels(); ++c) out.at(x, y, c) = full.at(2 * x + parity, y, c);
  return out;
}

void add_noise(Image& img, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  for (double& v : img.data()) v = std::max(0.0, v + n(rng));
}

}  // namespace

DualExposureFrame make_dual_exposure(const Image& sharp_end, std::span<const Image> exposure,
                                     double saturation_level) {
  if (sharp_end.width() % 2 != 0) throw InputError("frame width must be even for column interleaving");
  DualExposureFrame f;
  f.saturation_level = saturation_level;
  f.short_full = sharp_end;
  f.long_full = simulate_long_exposure(exposure, saturation_level);
  f.short_exp = columns(f.short_full, 1);
  f.long_exp = columns(f.long_full, 0);
  f.raw = interleave_columns(f.short_exp, f.long_exp);
  return f;
}

SynthSample synthesize_sample(std::span<const Image> frames, const ExposureTimeline& timeline,
                              const SynthOptions& options) {
  timeline.validate();
  if (static_cast<int>(frames.size()) != timeline.window_frames())
    throw InputError("synthesize_sample needs " + std::to_string(timeline.window_frames()) +
                     " frames, got " + std::to_string(frames.size()));
  if (std::abs(timeline.ratio - timeline.exposure_frames) > 1e-12)
    throw InputError("frame-sum simulation fixes the exposure ratio to exposure_frames (" +
                     std::to_string(timeline.exposure_frames) + ")");
  for (const auto& f : frames)
    if (!f.same_size(frames.front()) || f.channels() != frames.front().channels())
      throw InputError("synthesize_sample: frames differ in dimensions");

  auto frame = [&](int index) -> const Image& { return frames[index - 1]; };
  const auto n = static_cast<std::size_t>(timeline.exposure_frames);

  SynthSample s;
  s.tau = timeline.tau();
  s.frame0 = make_dual_exposure(frame(timeline.frame0_end()),
                                frames.subspan(timeline.frame0_start() - 1, n),
                                options.saturation_level);
  s.frame1 = make_dual_exposure(frame(timeline.frame1_end()),
                                frames.subspan(timeline.frame1_start() - 1, n),
                                options.saturation_level);
  s.sharp_0s = frame(timeline.frame0_start());
  s.sharp_0e = frame(timeline.frame0_end());
  s.sharp_1s = frame(timeline.frame1_start());
  s.sharp_1e = frame(timeline.frame1_end());
  for (double t : timeline.target_times) {
    const int idx = timeline.index_of(t);
    s.targets.push_back({timeline.time_of(idx), idx, frame(idx)});
  }

  for (const auto& f : frames)
    s.verdict.max_fraction =
        std::max(s.verdict.max_fraction, saturated_fraction(f, options.saturation_level));
  s.verdict.rejected = s.verdict.max_fraction > options.reject_fraction;

  if (options.noise_sigma > 0.0) {
    std::mt19937_64 rng(options.noise_seed);
    for (auto* f : {&s.frame0, &s.frame1}) {
      add_noise(f->short_exp, options.noise_sigma, rng);
      add_noise(f->long_exp, options.noise_sigma, rng);
      f->raw = interleave_columns(f->short_exp, f->long_exp);
    }
  }
  return s;
}

}  // namespace dualvfi
