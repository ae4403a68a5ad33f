#include "dualvfi/interp.hpp"

#include <algorithm>
#include <cmath>

#include "dualvfi/errors.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

void BlendConfig::validate() const {
  if (levels < 1) throw InputError("blend needs at least one level");
  if (!(alpha_mix >= 0.0 && alpha_mix <= 1.0)) throw InputError("alpha_mix must lie in [0, 1]");
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (!(coverage_cap > 0.0)) throw InputError("coverage_cap must be positive");
  if (!(reverse.sigma > 0.0)) throw InputError("splat_sigma must be positive");
  if (!(splat_fb_scale > 0.0)) throw InputError("splat_fb_scale must be positive");
  if (!std::isfinite(third_flow_tolerance) || !std::isfinite(splat_photo_scale))
    throw InputError("blend tolerances must be finite");
}

namespace {

void require_same(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_size(b)) throw InputError(std::string(what) + ": dimension mismatch");
}

FlowField downsample_levels(FlowField f, int levels) {
  for (int l = 0; l < levels; ++l) f = downsample2x(f);
  return f;
}

FlowSet downsample_set(const FlowSet& s, int levels) {
  FlowSet out;
  if (s.intra_0) out.intra_0 = downsample_levels(*s.intra_0, levels);
  if (s.intra_1) out.intra_1 = downsample_levels(*s.intra_1, levels);
  out.cross_01 = downsample_levels(s.cross_01, levels);
  out.cross_10 = downsample_levels(s.cross_10, levels);
  return out;
}

}  // namespace

Image cross_residual(const Image& warped, const FlowField& backward, const FlowField& cross,
                     const Image& other_key) {
  require_same(warped, backward, "cross_residual");
  require_same(warped, cross, "cross_residual");
  require_same(warped, other_key, "cross_residual");
  Image e(warped.width(), warped.height(), 1);
  const int channels = warped.channels();
  parallel_rows(warped.height(), [&](int y) {
    for (int x = 0; x < warped.width(); ++x) {
      const double px = x + backward.u(x, y), py = y + backward.v(x, y);
      const Vec2 c = sample_flow(cross, px, py);
      double s = 0.0;
      for (int ch = 0; ch < channels; ++ch)
        s += std::abs(warped.at(x, y, ch) - bilinear_sample(other_key, px + c.x, py + c.y, ch));
      e.at(x, y, 0) = s / channels;
    }
  });
  return e;
}

Image occlusion_weight(const Image& w0, const Image& w1, const FlowField& b0, const FlowField& b1,
                       const Image& cov0, const Image& cov1, const std::optional<Image>& alpha_up,
                       const BlendConfig& cfg, const std::optional<CrossCheck>& check) {
  cfg.validate();
  require_same(w0, w1, "occlusion_weight");
  require_same(w0, b0, "occlusion_weight");
  require_same(w0, b1, "occlusion_weight");
  require_same(w0, cov0, "occlusion_weight");
  require_same(w0, cov1, "occlusion_weight");

  std::optional<Image> e0, e1;
  if (check) {
    e0 = cross_residual(w0, b0, check->cross_01, check->key1);
    e1 = cross_residual(w1, b1, check->cross_10, check->key0);
  }
  std::optional<Image> up;
  if (alpha_up) {
    up = alpha_up->same_size(w0) ? *alpha_up : upsample2x(*alpha_up, w0.width(), w0.height());
  }

  Image alpha(w0.width(), w0.height(), 1);
  parallel_rows(w0.height(), [&](int y) {
    for (int x = 0; x < w0.width(); ++x) {
      const double c0 = std::min(cov0.at(x, y, 0), cfg.coverage_cap);
      const double c1 = std::min(cov1.at(x, y, 0), cfg.coverage_cap);
      double a = 0.5 + cfg.coverage_gain * (c0 - c1) / (c0 + c1 + cfg.eps);
      if (check) a -= cfg.residual_gain * (e0->at(x, y, 0) - e1->at(x, y, 0));
      a = std::clamp(a, 0.0, 1.0);
      if (up) a = cfg.alpha_mix * up->at(x, y, 0) + (1.0 - cfg.alpha_mix) * a;
      alpha.at(x, y, 0) = a;
    }
  });
  return alpha;
}

Image blend_frames(const Image& w0, const Image& w1, const Image& alpha, double t, double eps) {
  require_same(w0, w1, "blend_frames");
  require_same(w0, alpha, "blend_frames");
  if (w0.channels() != w1.channels()) throw InputError("blend_frames: channel mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("blend time must lie in [0, 1]");
  Image out(w0.width(), w0.height(), w0.channels());
  parallel_rows(w0.height(), [&](int y) {
    for (int x = 0; x < w0.width(); ++x) {
      const double a = alpha.at(x, y, 0);
      const double k0 = (1.0 - t) * a;
      const double k1 = t * (1.0 - a);
      const double den = k0 + k1;
      for (int c = 0; c < w0.channels(); ++c) {
        out.at(x, y, c) = den < eps ? (1.0 - t) * w0.at(x, y, c) + t * w1.at(x, y, c)
                                    : (k0 * w0.at(x, y, c) + k1 * w1.at(x, y, c)) / den;
      }
    }
  });
  return out;
}

Image splat_importance(const Image& key_i, const Image& key_j, const FlowField& cross_ij,
                       const FlowField& cross_ji, const BlendConfig& cfg) {
  require_same(key_i, key_j, "splat_importance");
  require_same(key_i, cross_ij, "splat_importance");
  require_same(key_i, cross_ji, "splat_importance");
  Image imp(key_i.width(), key_i.height(), 1, 1.0);
  if (!(cfg.splat_photo_scale > 0.0)) return imp;
  const int channels = key_i.channels();
  parallel_rows(key_i.height(), [&](int y) {
    for (int x = 0; x < key_i.width(); ++x) {
      const double px = x + cross_ij.u(x, y), py = y + cross_ij.v(x, y);
      double e = 0.0;
      for (int c = 0; c < channels; ++c) e += std::abs(key_i.at(x, y, c) - bilinear_sample(key_j, px, py, c));
      e /= channels;
      double z = e / cfg.splat_photo_scale;
      if (cfg.splat_fb_scale > 0.0) {
        const Vec2 back = sample_flow(cross_ji, px, py);
        z += std::hypot(cross_ij.u(x, y) + back.x, cross_ij.v(x, y) + back.y) / cfg.splat_fb_scale;
      }
      imp.at(x, y, 0) = std::exp(-std::min(z, 30.0));
    }
  });
  return imp;
}

std::pair<FlowTriplet, FlowTriplet> make_triplets(const FlowSet& flows, double tau, double third_flow_tolerance) {
  if (!flows.intra_0 || !flows.intra_1) throw InputError("intra flow required");
  std::pair<FlowTriplet, FlowTriplet> tr{
      {*flows.intra_0, flows.cross_01, derive_third_flow(flows.cross_01, *flows.intra_1), tau, Basis::frame0, {}},
      {*flows.intra_1, flows.cross_10, derive_third_flow(flows.cross_10, *flows.intra_0), tau, Basis::frame1, {}}};
  if (third_flow_tolerance > 0.0) {
    tr.first.cross_start_valid = third_flow_mask(flows.cross_01, flows.cross_10, *flows.intra_1, third_flow_tolerance);
    tr.second.cross_start_valid = third_flow_mask(flows.cross_10, flows.cross_01, *flows.intra_0, third_flow_tolerance);
  }
  return tr;
}

ForwardFlows forward_flows(const FlowSet& flows, double tau, double t, MotionVariant variant,
                           double third_flow_tolerance) {
  require_same(flows.cross_01, flows.cross_10, "forward_flows");
  if (variant != MotionVariant::linear) {
    if (!flows.intra_0 || !flows.intra_1) throw InputError("intra flow required");
    require_same(flows.cross_01, *flows.intra_0, "forward_flows");
    require_same(flows.cross_01, *flows.intra_1, "forward_flows");
  }

  auto triplets = [&] { return make_triplets(flows, tau, third_flow_tolerance); };

  switch (variant) {
    case MotionVariant::quadratic: {
      const auto [tr0, tr1] = triplets();
      return {eval_displacement(fit_quadratic(tr0), t), eval_displacement(fit_quadratic(tr1), t)};
    }
    case MotionVariant::cubic: {
      const auto [tr0, tr1] = triplets();
      return {eval_displacement(fit_cubic(tr0), t), eval_displacement(fit_cubic(tr1), t)};
    }
    case MotionVariant::two_flow:
      return {eval_displacement(fit_two_flow_quadratic(*flows.intra_0, flows.cross_01, tau, Basis::frame0), t),
              eval_displacement(fit_two_flow_quadratic(*flows.intra_1, flows.cross_10, tau, Basis::frame1), t)};
    case MotionVariant::linear:
      return {eval_displacement(linear_model(flows.cross_01, Basis::frame0), t),
              eval_displacement(linear_model(flows.cross_10, Basis::frame1), t)};
  }
  throw InputError("unknown motion variant");
}

Image interpolate_at(const InterpInputs& in, double t, MotionVariant variant, const BlendConfig& cfg,
                     const IntermediateSink* sink) {
  cfg.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolation time must lie in [0, 1]");
  require_same(in.key0, in.key1, "interpolate_at");
  require_same(in.key0, in.flows.cross_01, "interpolate_at");
  if (in.key0.channels() != in.key1.channels()) throw InputError("keyframes differ in channels");

  const auto keys0 = build_pyramid(in.key0, cfg.levels);
  const auto keys1 = build_pyramid(in.key1, cfg.levels);

  std::optional<ForwardFlows> full;
  if (!cfg.per_level_fit) full = forward_flows(in.flows, in.tau, t, variant, cfg.third_flow_tolerance);

  auto emit_image = [&](const char* name, int l, const Image& img) {
    if (sink && sink->image) sink->image(name, l, img);
  };
  auto emit_flow = [&](const char* name, int l, const FlowField& f) {
    if (sink && sink->flow) sink->flow(name, l, f);
  };

  std::optional<Image> alpha_prev;
  Image mid;
  for (int l = cfg.levels - 1; l >= 0; --l) {
    const FlowSet level_flows = downsample_set(in.flows, l);
    ForwardFlows fwd = cfg.per_level_fit
                           ? forward_flows(level_flows, in.tau, t, variant, cfg.third_flow_tolerance)
                           : ForwardFlows{downsample_levels(full->to_t_from0, l),
                                          downsample_levels(full->to_t_from1, l)};
    const Image imp0 =
        splat_importance(keys0[l], keys1[l], level_flows.cross_01, level_flows.cross_10, cfg);
    const Image imp1 =
        splat_importance(keys1[l], keys0[l], level_flows.cross_10, level_flows.cross_01, cfg);
    const ReversedFlow r0 = reverse_flow(fwd.to_t_from0, imp0, cfg.reverse);
    const ReversedFlow r1 = reverse_flow(fwd.to_t_from1, imp1, cfg.reverse);
    const Image w0 = backward_warp(keys0[l], r0.backward);
    const Image w1 = backward_warp(keys1[l], r1.backward);
    const CrossCheck check{keys0[l], keys1[l], level_flows.cross_01, level_flows.cross_10};
    Image alpha = occlusion_weight(w0, w1, r0.backward, r1.backward, r0.coverage, r1.coverage,
                                   alpha_prev, cfg, check);
    mid = blend_frames(w0, w1, alpha, t, cfg.eps);

    emit_flow("forward0", l, fwd.to_t_from0);
    emit_flow("forward1", l, fwd.to_t_from1);
    emit_flow("backward0", l, r0.backward);
    emit_flow("backward1", l, r1.backward);
    emit_image("importance0", l, imp0);
    emit_image("importance1", l, imp1);
    emit_image("coverage0", l, r0.coverage);
    emit_image("coverage1", l, r1.coverage);
    emit_image("warped0", l, w0);
    emit_image("warped1", l, w1);
    emit_image("alpha", l, alpha);
    emit_image("mid", l, mid);
    alpha_prev = std::move(alpha);
  }
  if (!mid.all_finite()) throw NumericalError("interpolation produced non-finite values");
  return mid;
}

}  // namespace dualvfi
