#include "dualvfi/motion.hpp"

#include <algorithm>
#include <cmath>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

double basis_time(Basis basis) { return basis == Basis::frame0 ? 0.0 : 1.0; }

std::array<double, 3> constraint_times(double tau, Basis basis) {
  if (basis == Basis::frame0) return {-tau, 1.0, 1.0 - tau};
  return {-tau, -1.0, -(1.0 + tau)};
}

MotionVariant parse_variant(const std::string& s) {
  if (s == "quadratic") return MotionVariant::quadratic;
  if (s == "cubic") return MotionVariant::cubic;
  if (s == "two-flow" || s == "two_flow") return MotionVariant::two_flow;
  if (s == "linear") return MotionVariant::linear;
  throw InputError("unknown motion variant: " + s);
}

std::string to_string(MotionVariant v) {
  switch (v) {
    case MotionVariant::quadratic:
      return "quadratic";
    case MotionVariant::cubic:
      return "cubic";
    case MotionVariant::two_flow:
      return "two_flow";
    case MotionVariant::linear:
      return "linear";
  }
  return "";
}

QuadScalarFit fit_quadratic_scalar(const std::array<double, 3>& dt, const std::array<double, 3>& d) {
  // Rows (dt, dt^2 / 2) against unknowns (v, a).
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, r1 = 0.0, r2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double c1 = dt[k];
    const double c2 = 0.5 * dt[k] * dt[k];
    s11 += c1 * c1;
    s12 += c1 * c2;
    s22 += c2 * c2;
    r1 += c1 * d[k];
    r2 += c2 * d[k];
  }
  const double det = s11 * s22 - s12 * s12;
  if (!(std::abs(det) > 0.0)) throw NumericalError("singular quadratic normal matrix");
  QuadScalarFit f;
  f.v = (s22 * r1 - s12 * r2) / det;
  f.a = (s11 * r2 - s12 * r1) / det;
  for (int k = 0; k < 3; ++k) {
    const double r = f.v * dt[k] + 0.5 * f.a * dt[k] * dt[k] - d[k];
    f.residual_sq += r * r;
  }
  return f;
}

QuadScalarFit fit_two_point_scalar(double dt0, double d0, double dt1, double d1) {
  const double det = 0.5 * dt0 * dt1 * (dt1 - dt0);
  if (!(std::abs(det) > 0.0)) throw NumericalError("singular two-flow system");
  QuadScalarFit f;
  f.v = 0.5 * (d0 * dt1 * dt1 - d1 * dt0 * dt0) / det;
  f.a = (dt0 * d1 - dt1 * d0) / det;
  return f;
}

std::array<double, 3> fit_cubic_scalar(const std::array<double, 3>& dt, const std::array<double, 3>& d) {
  // Rows (dt, dt^2 / 2, dt^3 / 6); Cramer's rule.
  double m[3][3];
  for (int k = 0; k < 3; ++k) {
    m[k][0] = dt[k];
    m[k][1] = 0.5 * dt[k] * dt[k];
    m[k][2] = dt[k] * dt[k] * dt[k] / 6.0;
  }
  auto det3 = [](const double (&a)[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double det = det3(m);
  if (!(std::abs(det) > 0.0)) throw NumericalError("singular cubic system");
  std::array<double, 3> out{};
  for (int col = 0; col < 3; ++col) {
    double mc[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) mc[r][c] = c == col ? d[r] : m[r][c];
    out[col] = det3(mc) / det;
  }
  return out;
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InputError("tau must lie in (0, 1)");
}

void check_finite(const FlowField& f, const char* what) {
  if (!f.all_finite()) throw NumericalError(std::string("non-finite values in ") + what);
}

void check_triplet(const FlowTriplet& tr) {
  check_tau(tr.tau);
  if (!tr.intra.same_size(tr.cross_end) || !tr.intra.same_size(tr.cross_start))
    throw InputError("flow triplet fields differ in dimensions");
  check_finite(tr.intra, "intra flow");
  check_finite(tr.cross_end, "cross_end flow");
  check_finite(tr.cross_start, "cross_start flow");
  if (!tr.cross_start_valid.empty() && tr.cross_start_valid.size() != tr.intra.pixel_count())
    throw InputError("cross_start mask size mismatch");
}

bool third_usable(const FlowTriplet& tr, int x, int y) {
  return tr.cross_start_valid.empty() ||
         tr.cross_start_valid[static_cast<std::size_t>(y) * tr.intra.width() + x] != 0;
}

QuadMotionField empty_quad(int w, int h, Basis basis) {
  QuadMotionField m;
  m.velocity = FlowField(w, h);
  m.acceleration = FlowField(w, h);
  m.basis_time = basis_time(basis);
  m.residual.assign(static_cast<std::size_t>(w) * h, 0.0);
  return m;
}

}  // namespace

FlowField derive_third_flow(const FlowField& cross_end, const FlowField& other_intra) {
  if (!cross_end.same_size(other_intra)) throw InputError("derive_third_flow: dimension mismatch");
  FlowField out(cross_end.width(), cross_end.height());
  parallel_rows(cross_end.height(), [&](int y) {
    for (int x = 0; x < cross_end.width(); ++x) {
      const double cu = cross_end.u(x, y), cv = cross_end.v(x, y);
      const Vec2 in = sample_flow(other_intra, x + cu, y + cv);
      out.u(x, y) = cu + in.x;
      out.v(x, y) = cv + in.y;
    }
  });
  return out;
}

std::vector<std::uint8_t> third_flow_mask(const FlowField& cross_end, const FlowField& cross_back,
                                          const FlowField& other_intra, double tol_px) {
  if (!cross_end.same_size(cross_back) || !cross_end.same_size(other_intra))
    throw InputError("third_flow_mask: dimension mismatch");
  const int w = cross_end.width(), h = cross_end.height();
  std::vector<std::uint8_t> mask(cross_end.pixel_count(), 0);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double px = x + cross_end.u(x, y), py = y + cross_end.v(x, y);
      if (!std::isfinite(px) || !std::isfinite(py)) continue;
      const Vec2 back = sample_flow(cross_back, px, py);
      if (std::hypot(cross_end.u(x, y) + back.x, cross_end.v(x, y) + back.y) > tol_px) continue;
      const int x0 = std::clamp(static_cast<int>(std::floor(px)), 0, w - 1);
      const int y0 = std::clamp(static_cast<int>(std::floor(py)), 0, h - 1);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      bool smooth = true;
      for (const FlowField* f : {&other_intra, &cross_back})
        for (int c = 0; c < 2 && smooth; ++c) {
          const double t[4] = {f->at(x0, y0, c), f->at(x1, y0, c), f->at(x0, y1, c), f->at(x1, y1, c)};
          smooth = *std::max_element(t, t + 4) - *std::min_element(t, t + 4) <= 0.25 * tol_px;
        }
      mask[static_cast<std::size_t>(y) * w + x] = smooth;
    }
  });
  return mask;
}

QuadMotionField fit_quadratic(const FlowTriplet& tr) {
  check_triplet(tr);
  const int w = tr.intra.width(), h = tr.intra.height();
  const auto dt = constraint_times(tr.tau, tr.basis);
  QuadMotionField m = empty_quad(w, h, tr.basis);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double res = 0.0;
      const bool third = third_usable(tr, x, y);
      for (int c = 0; c < 2; ++c) {
        const auto f =
            third ? fit_quadratic_scalar(dt, {tr.intra.at(x, y, c), tr.cross_end.at(x, y, c),
                                              tr.cross_start.at(x, y, c)})
                  : fit_two_point_scalar(dt[0], tr.intra.at(x, y, c), dt[1], tr.cross_end.at(x, y, c));
        m.velocity.at(x, y, c) = f.v;
        m.acceleration.at(x, y, c) = f.a;
        res += f.residual_sq;
      }
      m.residual[static_cast<std::size_t>(y) * w + x] = std::sqrt(res);
    }
  });
  return m;
}

QuadMotionField fit_two_flow_quadratic(const FlowField& intra, const FlowField& cross_end,
                                       double tau, Basis basis) {
  check_tau(tau);
  if (!intra.same_size(cross_end)) throw InputError("two-flow fit: dimension mismatch");
  check_finite(intra, "intra flow");
  check_finite(cross_end, "cross_end flow");
  const auto dt = constraint_times(tau, basis);
  QuadMotionField m = empty_quad(intra.width(), intra.height(), basis);
  parallel_rows(intra.height(), [&](int y) {
    for (int x = 0; x < intra.width(); ++x)
      for (int c = 0; c < 2; ++c) {
        const auto f = fit_two_point_scalar(dt[0], intra.at(x, y, c), dt[1], cross_end.at(x, y, c));
        m.velocity.at(x, y, c) = f.v;
        m.acceleration.at(x, y, c) = f.a;
      }
  });
  return m;
}

CubicMotionField fit_cubic(const FlowTriplet& tr) {
  check_triplet(tr);
  const int w = tr.intra.width(), h = tr.intra.height();
  const auto dt = constraint_times(tr.tau, tr.basis);
  CubicMotionField m{FlowField(w, h), FlowField(w, h), FlowField(w, h), basis_time(tr.basis)};
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const bool third = third_usable(tr, x, y);
      for (int c = 0; c < 2; ++c) {
        if (!third) {
          const auto f = fit_two_point_scalar(dt[0], tr.intra.at(x, y, c), dt[1], tr.cross_end.at(x, y, c));
          m.velocity.at(x, y, c) = f.v;
          m.acceleration.at(x, y, c) = f.a;
          continue;
        }
        const auto s = fit_cubic_scalar(
            dt, {tr.intra.at(x, y, c), tr.cross_end.at(x, y, c), tr.cross_start.at(x, y, c)});
        m.velocity.at(x, y, c) = s[0];
        m.acceleration.at(x, y, c) = s[1];
        m.jerk.at(x, y, c) = s[2];
      }
    }
  });
  return m;
}

QuadMotionField linear_model(const FlowField& cross_end, Basis basis) {
  check_finite(cross_end, "cross_end flow");
  QuadMotionField m = empty_quad(cross_end.width(), cross_end.height(), basis);
  m.velocity = cross_end;
  if (basis == Basis::frame1) m.velocity *= -1.0;
  return m;
}

namespace {

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolation time must lie in [0, 1]");
}

}  // namespace

FlowField eval_displacement(const QuadMotionField& model, double t) {
  check_t(t);
  const double dt = t - model.basis_time;
  const double c2 = 0.5 * dt * dt;
  FlowField out(model.velocity.width(), model.velocity.height());
  auto v = model.velocity.data();
  auto a = model.acceleration.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = v[i] * dt + a[i] * c2;
  return out;
}

FlowField eval_displacement(const CubicMotionField& model, double t) {
  check_t(t);
  const double dt = t - model.basis_time;
  const double c2 = 0.5 * dt * dt;
  const double c3 = dt * dt * dt / 6.0;
  FlowField out(model.velocity.width(), model.velocity.height());
  auto v = model.velocity.data();
  auto a = model.acceleration.data();
  auto j = model.jerk.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = v[i] * dt + a[i] * c2 + j[i] * c3;
  return out;
}

namespace {

constexpr int kSplatBandRows = 16;

struct SplatBuffer {
  int row0 = 0;
  int rows = 0;
  std::vector<long double> weight, iweight, su, sv;
};

ReversedFlow reverse_flow_impl(const FlowField& fwd, const Image* importance, const ReverseParams& params) {
  check_finite(fwd, "forward flow");
  const int w = fwd.width(), h = fwd.height();
  const double inv_sigma_sq = 1.0 / (params.sigma * params.sigma);

  // Each fixed band of source rows scatters into its own buffer; buffers are
  // merged in band order so the sums never depend on scheduling.
  const int bands = (h + kSplatBandRows - 1) / kSplatBandRows;
  std::vector<SplatBuffer> buffers(bands);
  parallel_for(static_cast<std::size_t>(bands), 1, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const int y_begin = static_cast<int>(b) * kSplatBandRows;
      const int y_end = std::min(h, y_begin + kSplatBandRows);
      int lo = h, hi = -1;
      for (int y = y_begin; y < y_end; ++y)
        for (int x = 0; x < w; ++x) {
          const int ty = static_cast<int>(std::floor(y + fwd.v(x, y)));
          lo = std::min(lo, std::max(0, ty));
          hi = std::max(hi, std::min(h - 1, ty + 1));
        }
      SplatBuffer& buf = buffers[b];
      if (hi < lo) continue;
      buf.row0 = lo;
      buf.rows = hi - lo + 1;
      const std::size_t n = static_cast<std::size_t>(buf.rows) * w;
      buf.weight.assign(n, 0.0L);
      buf.iweight.assign(n, 0.0L);
      buf.su.assign(n, 0.0L);
      buf.sv.assign(n, 0.0L);
      for (int y = y_begin; y < y_end; ++y)
        for (int x = 0; x < w; ++x) {
          const double px = x + fwd.u(x, y), py = y + fwd.v(x, y);
          const long double imp = importance ? importance->at(x, y, 0) : 1.0;
          const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
          for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
              const int tx = x0 + i, ty = y0 + j;
              if (tx < 0 || tx >= w || ty < 0 || ty >= h) continue;
              const double dx = px - tx, dy = py - ty;
              const long double wt = std::exp(-(dx * dx + dy * dy) * inv_sigma_sq);
              const std::size_t k = static_cast<std::size_t>(ty - buf.row0) * w + tx;
              buf.weight[k] += wt;
              buf.iweight[k] += wt * imp;
              buf.su[k] -= wt * imp * fwd.u(x, y);
              buf.sv[k] -= wt * imp * fwd.v(x, y);
            }
        }
    }
  });

  const std::size_t n = fwd.pixel_count();
  std::vector<long double> weight(n, 0.0L), iweight(n, 0.0L), su(n, 0.0L), sv(n, 0.0L);
  for (const auto& buf : buffers) {
    const std::size_t off = static_cast<std::size_t>(buf.row0) * w;
    for (std::size_t k = 0; k < buf.weight.size(); ++k) {
      weight[off + k] += buf.weight[k];
      iweight[off + k] += buf.iweight[k];
      su[off + k] += buf.su[k];
      sv[off + k] += buf.sv[k];
    }
  }

  ReversedFlow out{FlowField(w, h), Image(w, h, 1)};
  std::vector<std::uint8_t> valid(n, 0);
  std::size_t holes = 0;
  for (std::size_t k = 0; k < n; ++k) {
    out.coverage.data()[k] = static_cast<double>(weight[k]);
    if (weight[k] >= params.hole_threshold) {
      out.backward.data()[2 * k] = static_cast<double>(su[k] / iweight[k]);
      out.backward.data()[2 * k + 1] = static_cast<double>(sv[k] / iweight[k]);
      valid[k] = 1;
    } else {
      ++holes;
    }
  }
  if (holes == n) return out;  // nothing landed inside: zero flow

  // Jacobi-style fill: each sweep reads only values valid before the sweep.
  const int max_sweeps = w + h;
  for (int sweep = 0; sweep < max_sweeps && holes > 0; ++sweep) {
    std::vector<std::uint8_t> next = valid;
    FlowField& bwd = out.backward;
    FlowField filled = bwd;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * w + x;
        if (valid[k]) continue;
        double su_n = 0.0, sv_n = 0.0;
        int count = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            if (!valid[static_cast<std::size_t>(ny) * w + nx]) continue;
            su_n += bwd.u(nx, ny);
            sv_n += bwd.v(nx, ny);
            ++count;
          }
        if (count == 0) continue;
        filled.u(x, y) = su_n / count;
        filled.v(x, y) = sv_n / count;
        next[k] = 1;
        --holes;
      }
    bwd = std::move(filled);
    valid = std::move(next);
  }
  return out;
}

}  // namespace

ReversedFlow reverse_flow(const FlowField& fwd, const ReverseParams& params) {
  return reverse_flow_impl(fwd, nullptr, params);
}

ReversedFlow reverse_flow(const FlowField& fwd, const Image& importance, const ReverseParams& params) {
  if (importance.width() != fwd.width() || importance.height() != fwd.height() || importance.channels() != 1)
    throw InputError("reverse_flow: importance must be a single-channel map of the flow size");
  for (double v : importance.data())
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("reverse_flow: importance must be positive");
  return reverse_flow_impl(fwd, &importance, params);
}

}  // namespace dualvfi
