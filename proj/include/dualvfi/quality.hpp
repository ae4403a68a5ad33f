#pragma once

#include "dualvfi/core.hpp"

namespace dualvfi {

// +infinity for identical images.
double psnr(const Image& pred, const Image& gt, double peak = 1.0, int border_exclude = 0);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

// Gaussian-windowed SSIM averaged over every full window position and
// channel.
double ssim(const Image& pred, const Image& gt, const SsimParams& params = {});

}  // namespace dualvfi
