#pragma once

#include <functional>
#include <utility>
#include <optional>
#include <string>

#include "dualvfi/core.hpp"
#include "dualvfi/flow.hpp"
#include "dualvfi/motion.hpp"

namespace dualvfi {

struct BlendConfig {
  int levels = 4;
  double alpha_mix = 0.5;  // weight of the upsampled coarser alpha
  double eps = 1e-6;
  double residual_gain = 1.0;
  double coverage_gain = 2.0;
  // Splat coverage is capped at this value before it enters the alpha
  // heuristic, so pixels where several sources collide are not favoured.
  double coverage_cap = 1.0;
  ReverseParams reverse;
  bool per_level_fit = false;
  // The derived cross_start constraint is dropped where the cross flows fail
  // the forward-backward check by more than this many px (<= 0: never).
  double third_flow_tolerance = 1.0;
  // Splat importance exp(-(e / photo_scale + d / fb_scale)) from the
  // photometric error e and forward-backward distance d of each source
  // pixel's cross flow (photo_scale <= 0: plain averaging).
  double splat_photo_scale = 0.05;
  double splat_fb_scale = 1.0;

  void validate() const;
};

// Optional photometric check for the alpha heuristic: each warped frame is
// compared with the other keyframe sampled through the backward flow and the
// end-to-end cross flow. Without it the residual term is zero.
struct CrossCheck {
  const Image& key0;
  const Image& key1;
  const FlowField& cross_01;
  const FlowField& cross_10;
};

// Mean absolute difference between W_i and the other keyframe reached via
// x + B_i(x) followed by the cross flow.
Image cross_residual(const Image& warped, const FlowField& backward, const FlowField& cross,
                     const Image& other_key);

// alpha = clamp(0.5 + cg * (c0 - c1) / (c0 + c1 + eps) - rg * (e0 - e1), 0, 1),
// with c_i = min(cov_i, coverage_cap), mixed with the upsampled coarse alpha
// when one is given.
Image occlusion_weight(const Image& w0, const Image& w1, const FlowField& b0, const FlowField& b1,
                       const Image& cov0, const Image& cov1, const std::optional<Image>& alpha_up,
                       const BlendConfig& cfg, const std::optional<CrossCheck>& check = std::nullopt);

// [(1-t) a W0 + t (1-a) W1] / [(1-t) a + t (1-a)], falling back to the
// linear blend where the denominator drops below eps.
Image blend_frames(const Image& w0, const Image& w1, const Image& alpha, double t, double eps = 1e-6);

// Importance of each pixel of key_i as a splat source, from the consistency
// of its cross flow with key_j and with the reverse cross flow.
Image splat_importance(const Image& key_i, const Image& key_j, const FlowField& cross_ij,
                       const FlowField& cross_ji, const BlendConfig& cfg);

struct InterpInputs {
  Image key0;  // sharp frame at frame 0's exposure end
  Image key1;  // sharp frame at frame 1's exposure end
  FlowSet flows;
  double tau = 0.25;
};

// Receives intermediate products (name, pyramid level, data).
struct IntermediateSink {
  std::function<void(const std::string&, int, const Image&)> image;
  std::function<void(const std::string&, int, const FlowField&)> flow;
};

struct ForwardFlows {
  FlowField to_t_from0;
  FlowField to_t_from1;
};

// Both frames' constraint triplets with the derived third flows; a positive
// tolerance also attaches the third-flow validity masks.
std::pair<FlowTriplet, FlowTriplet> make_triplets(const FlowSet& flows, double tau,
                                                  double third_flow_tolerance = 1.0);

// Fits the chosen motion variant for both frames and evaluates the forward
// flows at time t (full resolution).
ForwardFlows forward_flows(const FlowSet& flows, double tau, double t, MotionVariant variant,
                           double third_flow_tolerance = 1.0);

Image interpolate_at(const InterpInputs& in, double t, MotionVariant variant,
                     const BlendConfig& cfg = {}, const IntermediateSink* sink = nullptr);

}  // namespace dualvfi
