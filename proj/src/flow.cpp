#include "dualvfi/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "dualvfi/errors.hpp"
#include "dualvfi/io.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

namespace fs = std::filesystem;

void LucasKanadeParams::validate() const {
  if (levels < 1) throw InputError("estimator needs at least one pyramid level");
  if (window < 3 || window % 2 == 0) throw InputError("estimator window must be odd and >= 3");
  if (iterations < 1) throw InputError("estimator needs at least one iteration");
  if (!(damping >= 0.0)) throw InputError("estimator damping must be non-negative");
  if (median_radius < 0) throw InputError("estimator median_radius must be non-negative");
  if (!(min_eigenvalue >= 0.0)) throw InputError("estimator min_eigenvalue must be non-negative");
}

namespace {

// Window sums over a (2r+1)^2 neighbourhood truncated at the borders.
std::vector<double> box_sum(const std::vector<double>& in, int w, int h, int r) {
  std::vector<double> tmp(in.size()), out(in.size());
  parallel_rows(h, [&](int y) {
    const double* row = in.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, x - r); k <= std::min(w - 1, x + r); ++k) s += row[k];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  });
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = std::max(0, y - r); k <= std::min(h - 1, y + r); ++k)
        s += tmp[static_cast<std::size_t>(k) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  });
  return out;
}

struct Gradients {
  std::vector<double> gx, gy;
};

Gradients central_gradients(const Image& img) {
  const int w = img.width(), h = img.height();
  Gradients g{std::vector<double>(img.pixel_count()), std::vector<double>(img.pixel_count())};
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(0, x - 1), xr = std::min(w - 1, x + 1);
      const int yu = std::max(0, y - 1), yd = std::min(h - 1, y + 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      g.gx[i] = xr > xl ? (img.at(xr, y, 0) - img.at(xl, y, 0)) / (xr - xl) : 0.0;
      g.gy[i] = yd > yu ? (img.at(x, yd, 0) - img.at(x, yu, 0)) / (yd - yu) : 0.0;
    }
  });
  return g;
}

void refine_level(const Image& a, const Image& b, FlowField& flow, const LucasKanadeParams& p) {
  const int w = a.width(), h = a.height();
  const int r = p.window / 2;
  const std::size_t n = a.pixel_count();
  const Gradients g = central_gradients(a);

  std::vector<double> xx(n), xy(n), yy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = g.gx[i] * g.gx[i];
    xy[i] = g.gx[i] * g.gy[i];
    yy[i] = g.gy[i] * g.gy[i];
  }
  const auto sxx = box_sum(xx, w, h, r);
  const auto sxy = box_sum(xy, w, h, r);
  const auto syy = box_sum(yy, w, h, r);

  // Each pixel iterates on its own window, translated by its own estimate.
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double area = static_cast<double>((std::min(w - 1, x + r) - std::max(0, x - r) + 1) *
                                              (std::min(h - 1, y + r) - std::max(0, y - r) + 1));
      const double half_tr = 0.5 * (sxx[i] + syy[i]);
      const double lambda_min =
          half_tr - std::sqrt(0.25 * (sxx[i] - syy[i]) * (sxx[i] - syy[i]) + sxy[i] * sxy[i]);
      if (lambda_min < p.min_eigenvalue * area) continue;
      const double m00 = sxx[i] + p.damping, m01 = sxy[i], m11 = syy[i] + p.damping;
      const double det = m00 * m11 - m01 * m01;
      if (!(det > 0.0)) continue;
      double u = flow.u(x, y), v = flow.v(x, y);
      // The iterate with the lowest window SSD is kept, so a pixel never ends
      // up worse than its initialization.
      double best_u = u, best_v = v, best_ssd = std::numeric_limits<double>::infinity();
      for (int it = 0; it <= p.iterations; ++it) {
        double bx = 0.0, by = 0.0, ssd = 0.0;
        for (int yy2 = std::max(0, y - r); yy2 <= std::min(h - 1, y + r); ++yy2)
          for (int xx2 = std::max(0, x - r); xx2 <= std::min(w - 1, x + r); ++xx2) {
            const std::size_t j = static_cast<std::size_t>(yy2) * w + xx2;
            const double e = bilinear_sample(b, xx2 + u, yy2 + v, 0) - a.data()[j];
            bx += g.gx[j] * e;
            by += g.gy[j] * e;
            ssd += e * e;
          }
        if (ssd < best_ssd) {
          best_ssd = ssd;
          best_u = u;
          best_v = v;
        }
        if (it == p.iterations) break;
        double du = -(m11 * bx - m01 * by) / det;
        double dv = -(m00 * by - m01 * bx) / det;
        // Steps beyond one pixel leave the linearization's range.
        const double step = std::hypot(du, dv);
        if (step > 1.0) {
          du /= step;
          dv /= step;
        }
        u += du;
        v += dv;
        if (du * du + dv * dv < 1e-8) break;
      }
      u = best_u;
      v = best_v;
      flow.u(x, y) = u;
      flow.v(x, y) = v;
    }
  });
}

FlowField median_filter(const FlowField& f, int r) {
  const int w = f.width(), h = f.height();
  FlowField out(w, h);
  parallel_rows(h, [&](int y) {
    std::vector<double> vals;
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 2; ++c) {
        vals.clear();
        for (int j = std::max(0, y - r); j <= std::min(h - 1, y + r); ++j)
          for (int i = std::max(0, x - r); i <= std::min(w - 1, x + r); ++i) vals.push_back(f.at(i, j, c));
        auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
        std::nth_element(vals.begin(), mid, vals.end());
        out.at(x, y, c) = *mid;
      }
  });
  return out;
}

}  // namespace

FlowField estimate_flow(const Image& a, const Image& b, const LucasKanadeParams& params) {
  params.validate();
  if (!a.same_size(b)) throw InputError("estimate_flow: images differ in dimensions");
  const auto pa = build_pyramid(to_grayscale(a), params.levels);
  const auto pb = build_pyramid(to_grayscale(b), params.levels);

  FlowField flow(pa.levels.back().width(), pa.levels.back().height());
  for (int l = params.levels - 1; l >= 0; --l) {
    if (l != params.levels - 1)
      flow = upsample_flow2x(flow, pa[l].width(), pa[l].height());
    refine_level(pa[l], pb[l], flow, params);
    if (params.median_radius > 0) flow = median_filter(flow, params.median_radius);
  }
  if (!flow.all_finite()) throw NumericalError("estimate_flow produced non-finite values");
  return flow;
}

FlowField compose_flows(const FlowField& ab, const FlowField& bc) {
  if (!ab.same_size(bc)) throw InputError("compose_flows: dimension mismatch");
  FlowField out(ab.width(), ab.height());
  parallel_rows(ab.height(), [&](int y) {
    for (int x = 0; x < ab.width(); ++x) {
      const Vec2 next = sample_flow(bc, x + ab.u(x, y), y + ab.v(x, y));
      out.u(x, y) = ab.u(x, y) + next.x;
      out.v(x, y) = ab.v(x, y) + next.y;
    }
  });
  return out;
}

FlowField smooth_perturbation(int width, int height, double rms_px, std::uint64_t seed) {
  if (!(rms_px >= 0.0)) throw InputError("perturbation magnitude must be non-negative");
  FlowField f(width, height);
  if (rms_px == 0.0) return f;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kWaves = 3;
  for (int c = 0; c < 2; ++c) {
    double kx[kWaves], ky[kWaves], ph[kWaves];
    for (int k = 0; k < kWaves; ++k) {
      const double wavelength = 24.0 + 40.0 * unit(rng);
      const double dir = 2.0 * std::numbers::pi * unit(rng);
      kx[k] = 2.0 * std::numbers::pi * std::cos(dir) / wavelength;
      ky[k] = 2.0 * std::numbers::pi * std::sin(dir) / wavelength;
      ph[k] = 2.0 * std::numbers::pi * unit(rng);
    }
    // Each unit sinusoid has RMS 1/sqrt(2); the sum of kWaves has sqrt(kWaves/2).
    const double amp = rms_px / std::sqrt(0.5 * kWaves);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double s = 0.0;
        for (int k = 0; k < kWaves; ++k) s += std::sin(kx[k] * x + ky[k] * y + ph[k]);
        f.at(x, y, c) = amp * s;
      }
  }
  return f;
}

Mask fb_consistency_mask(const FlowField& fwd, const FlowField& bwd, double tol_px) {
  if (!fwd.same_size(bwd)) throw InputError("fb_consistency_mask: dimension mismatch");
  Mask mask(fwd.pixel_count(), 0);
  parallel_rows(fwd.height(), [&](int y) {
    for (int x = 0; x < fwd.width(); ++x) {
      const Vec2 back = sample_flow(bwd, x + fwd.u(x, y), y + fwd.v(x, y));
      const double err = std::hypot(fwd.u(x, y) + back.x, fwd.v(x, y) + back.y);
      mask[static_cast<std::size_t>(y) * fwd.width() + x] = err <= tol_px ? 1 : 0;
    }
  });
  return mask;
}

FlowField clip_small_flows(const FlowField& flow, double min_px) {
  FlowField out = flow;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x)
      if (std::hypot(flow.u(x, y), flow.v(x, y)) < min_px) out.u(x, y) = out.v(x, y) = 0.0;
  return out;
}

FlowSource FlowSource::from_string(const std::string& s) {
  FlowSource src;
  if (s == "gt") {
    src.kind = Kind::ground_truth;
  } else if (s == "estimate") {
    src.kind = Kind::estimated;
  } else {
    src.kind = Kind::file;
    src.directory = s;
  }
  return src;
}

std::string FlowSource::describe() const {
  std::string s;
  switch (kind) {
    case Kind::ground_truth:
      s = "gt";
      break;
    case Kind::estimated:
      s = "estimate(levels=" + std::to_string(estimator.levels) + ",window=" + std::to_string(estimator.window) +
          ",iters=" + std::to_string(estimator.iterations) + ")";
      break;
    case Kind::file:
      s = "file(" + directory.string() + ")";
      break;
  }
  if (perturb_px > 0.0) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "+perturb(rms=%g,seed=%llu)", perturb_px,
                  static_cast<unsigned long long>(perturb_seed));
    s += buf;
  }
  return s;
}

FlowSet read_flow_set(const fs::path& dir) {
  FlowSet set;
  if (fs::exists(dir / kIntra0File)) set.intra_0 = read_flo(dir / kIntra0File);
  if (fs::exists(dir / kIntra1File)) set.intra_1 = read_flo(dir / kIntra1File);
  set.cross_01 = read_flo(dir / kCross01File);
  set.cross_10 = read_flo(dir / kCross10File);
  return set;
}

void write_flow_set(const fs::path& dir, const FlowSet& flows) {
  fs::create_directories(dir);
  if (flows.intra_0) write_flo(dir / kIntra0File, *flows.intra_0);
  if (flows.intra_1) write_flo(dir / kIntra1File, *flows.intra_1);
  write_flo(dir / kCross01File, flows.cross_01);
  write_flo(dir / kCross10File, flows.cross_10);
}

}  // namespace dualvfi
