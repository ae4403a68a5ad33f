#include "dualvfi/quality.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

namespace {

void check_pair(const Image& a, const Image& b, const char* what) {
  if (!a.same_size(b) || a.channels() != b.channels())
    throw InputError(std::string(what) + ": image dimensions differ");
}

}  // namespace

double psnr(const Image& pred, const Image& gt, double peak, int border_exclude) {
  check_pair(pred, gt, "psnr");
  if (!(peak > 0.0)) throw InputError("psnr: peak must be positive");
  const int b = std::max(0, border_exclude);
  if (2 * b >= pred.width() || 2 * b >= pred.height())
    throw InputError("psnr: border exclusion leaves no pixels");
  std::vector<double> row_sum(pred.height(), 0.0);
  parallel_rows(pred.height() - 2 * b, [&](int r) {
    const int y = r + b;
    double s = 0.0;
    for (int x = b; x < pred.width() - b; ++x)
      for (int c = 0; c < pred.channels(); ++c) {
        const double d = pred.at(x, y, c) - gt.at(x, y, c);
        s += d * d;
      }
    row_sum[y] = s;
  });
  double sum = 0.0;
  for (double s : row_sum) sum += s;
  const double count = static_cast<double>(pred.width() - 2 * b) * (pred.height() - 2 * b) * pred.channels();
  const double mse = sum / count;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& pred, const Image& gt, const SsimParams& p) {
  check_pair(pred, gt, "ssim");
  if (p.window < 1 || p.window % 2 == 0) throw InputError("ssim: window must be odd");
  if (pred.width() < p.window || pred.height() < p.window)
    throw InputError("ssim: image smaller than window");

  const int r = p.window / 2;
  std::vector<double> kernel(p.window);
  double ksum = 0.0;
  for (int i = 0; i < p.window; ++i) {
    const double d = i - r;
    kernel[i] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
    ksum += kernel[i];
  }
  for (double& k : kernel) k /= ksum;

  const double c1 = (p.k1 * p.peak) * (p.k1 * p.peak);
  const double c2 = (p.k2 * p.peak) * (p.k2 * p.peak);
  const int out_w = pred.width() - 2 * r;
  const int out_h = pred.height() - 2 * r;

  std::vector<double> row_sum(out_h, 0.0);
  parallel_rows(out_h, [&](int oy) {
    double acc = 0.0;
    for (int ox = 0; ox < out_w; ++ox)
      for (int c = 0; c < pred.channels(); ++c) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int j = 0; j < p.window; ++j)
          for (int i = 0; i < p.window; ++i) {
            const double w = kernel[i] * kernel[j];
            const double a = pred.at(ox + i, oy + j, c);
            const double b = gt.at(ox + i, oy + j, c);
            mx += w * a;
            my += w * b;
            sxx += w * a * a;
            syy += w * b * b;
            sxy += w * (a * b);
          }
        const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      }
    row_sum[oy] = acc;
  });
  double sum = 0.0;
  for (double s : row_sum) sum += s;
  return sum / (static_cast<double>(out_w) * out_h * pred.channels());
}

}  // namespace dualvfi
