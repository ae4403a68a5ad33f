#include "dualvfi/hdrmerge.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

namespace {
constexpr double kLogDelta = 1e-6;
}

void MergeConfig::validate() const {
  if (!(ratio > 1.0)) throw InputError("merge ratio must be > 1");
  if (!(weight_knee > 0.0 && weight_knee < 1.0)) throw InputError("weight_knee must lie in (0, 1)");
  if (!(saturation_level > 0.0)) throw InputError("saturation level must be positive");
}

double long_exposure_weight(double long_value, const MergeConfig& cfg) {
  const double knee = cfg.weight_knee * cfg.saturation_level;
  if (long_value <= knee) return 1.0;
  if (long_value >= cfg.saturation_level) return 0.0;
  return (cfg.saturation_level - long_value) / (cfg.saturation_level - knee);
}

Image merge_exposures(const Image& short_exp, const Image& long_exp, const MergeConfig& cfg) {
  cfg.validate();
  if (!short_exp.same_size(long_exp) || short_exp.channels() != long_exp.channels())
    throw InputError("merge_exposures: short and long exposures differ in dimensions");
  Image out(short_exp.width(), short_exp.height(), short_exp.channels());
  auto s = short_exp.data();
  auto l = long_exp.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (s[i] < 0.0 || l[i] < 0.0) throw InputError("merge_exposures: negative intensity");
    const double w_long = long_exposure_weight(l[i], cfg);
    if (w_long == 0.0) {
      o[i] = s[i];
      continue;
    }
    o[i] = (s[i] + w_long * (l[i] / cfg.ratio)) / (1.0 + w_long);
  }
  return out;
}

RecoverableRange recoverable_range(const MergeConfig& cfg) {
  cfg.validate();
  return {cfg.saturation_level / cfg.ratio, cfg.saturation_level};
}

TonemapStats measure_tonemap_stats(const Image& hdr) {
  // Per-row partial sums reduced in row order: independent of thread count.
  std::vector<double> row_log(hdr.height(), 0.0);
  std::vector<double> row_max(hdr.height(), 0.0);
  parallel_rows(hdr.height(), [&](int y) {
    for (int x = 0; x < hdr.width(); ++x) {
      const double lum = luminance(hdr, x, y);
      row_log[y] += std::log(kLogDelta + lum);
      row_max[y] = std::max(row_max[y], lum);
    }
  });
  TonemapStats st;
  double sum = 0.0;
  for (int y = 0; y < hdr.height(); ++y) {
    sum += row_log[y];
    st.white = std::max(st.white, row_max[y]);
  }
  st.log_average = std::exp(sum / hdr.pixel_count());
  return st;
}

Image tonemap_reinhard(const Image& hdr, const TonemapConfig& cfg) {
  for (double v : hdr.data())
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("tonemap input must be finite and non-negative");
  TonemapStats st;
  if (!cfg.log_average || !cfg.white) st = measure_tonemap_stats(hdr);
  const double l_avg = cfg.log_average.value_or(st.log_average);
  const double l_white = cfg.white.value_or(st.white);

  Image out(hdr.width(), hdr.height(), hdr.channels());
  if (l_white <= 0.0) return out;
  const double white_scaled = cfg.key * l_white / l_avg;
  const double white_sq = white_scaled * white_scaled;
  parallel_rows(hdr.height(), [&](int y) {
    for (int x = 0; x < hdr.width(); ++x) {
      const double lum = luminance(hdr, x, y);
      if (lum <= 0.0) continue;
      const double lm = cfg.key * lum / l_avg;
      const double ld = lm * (1.0 + lm / white_sq) / (1.0 + lm);
      const double gain = ld / lum;
      for (int c = 0; c < hdr.channels(); ++c)
        out.at(x, y, c) = std::clamp(hdr.at(x, y, c) * gain, 0.0, 1.0);
    }
  });
  return out;
}

}  // namespace dualvfi
