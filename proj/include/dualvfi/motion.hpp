#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dualvfi/core.hpp"

namespace dualvfi {

// Time conventions: t = 0 at the end of frame 0's exposure, t = 1 at the end
// of frame 1's exposure, tau = exposure length in the same units. A model
// anchored at basis_time predicts the displacement of each of its pixels at
// time t, with dt = t - basis_time.
enum class Basis { frame0, frame1 };

double basis_time(Basis basis);

// The three constraints of one frame. intra points end->start within the
// frame's own exposure; cross_end points to the other frame's exposure end;
// cross_start to the other frame's exposure start.
struct FlowTriplet {
  FlowField intra;
  FlowField cross_end;
  FlowField cross_start;
  double tau = 0.25;
  Basis basis = Basis::frame0;
  // Per-pixel flag for the cross_start constraint (empty: all usable). Where
  // it is 0 the fits use the intra and cross_end constraints only.
  std::vector<std::uint8_t> cross_start_valid;
};

// dt of (intra, cross_end, cross_start) relative to the basis time:
// frame 0: {-tau, 1, 1 - tau}; frame 1: {-tau, -1, -(1 + tau)}.
std::array<double, 3> constraint_times(double tau, Basis basis);

struct QuadMotionField {
  FlowField velocity;      // px per unit time
  FlowField acceleration;  // px per unit time^2
  double basis_time = 0.0;
  std::vector<double> residual;  // per pixel, L2 norm over both components (px)
};

struct CubicMotionField {
  FlowField velocity;
  FlowField acceleration;
  FlowField jerk;
  double basis_time = 0.0;
};

enum class MotionVariant { quadratic, cubic, two_flow, linear };
MotionVariant parse_variant(const std::string& s);
std::string to_string(MotionVariant v);

// Scalar solvers, one displacement component at a time.
struct QuadScalarFit {
  double v = 0.0, a = 0.0;
  double residual_sq = 0.0;
};
QuadScalarFit fit_quadratic_scalar(const std::array<double, 3>& dt, const std::array<double, 3>& d);
QuadScalarFit fit_two_point_scalar(double dt0, double d0, double dt1, double d1);
std::array<double, 3> fit_cubic_scalar(const std::array<double, 3>& dt, const std::array<double, 3>& d);

// Flow from this frame's end to the other frame's exposure start:
// cross_end(x) + other_intra(x + cross_end(x)).
FlowField derive_third_flow(const FlowField& cross_end, const FlowField& other_intra);

// 1 where the derived flow can be trusted: the cross flows agree
// forward-backward within tol_px, and neither the other intra flow nor the
// backward cross flow varies by more than tol_px / 4 over the bilinear taps
// at the landing point.
std::vector<std::uint8_t> third_flow_mask(const FlowField& cross_end, const FlowField& cross_back,
                                          const FlowField& other_intra, double tol_px);

// Per-pixel least squares over all three constraints (2x2 normal equations).
QuadMotionField fit_quadratic(const FlowTriplet& triplet);
// Exact solve of the intra and cross_end constraints only.
QuadMotionField fit_two_flow_quadratic(const FlowField& intra, const FlowField& cross_end,
                                       double tau, Basis basis = Basis::frame0);
// Exact 3x3 solve with a jerk term.
CubicMotionField fit_cubic(const FlowTriplet& triplet);
// Constant velocity from the cross flow alone.
QuadMotionField linear_model(const FlowField& cross_end, Basis basis = Basis::frame0);

// Displacement at time t in [0, 1].
FlowField eval_displacement(const QuadMotionField& model, double t);
FlowField eval_displacement(const CubicMotionField& model, double t);

struct ReverseParams {
  double sigma = 0.5;           // Gaussian splat radius, px
  double hole_threshold = 1e-4; // minimum accumulated weight
};

struct ReversedFlow {
  FlowField backward;  // aligned with the frame at time t, pointing to the basis frame
  Image coverage;      // accumulated splat weight before normalization
};

// Splats -F(x) onto the four integer neighbours of x + F(x) with weights
// exp(-d^2 / sigma^2), normalizes, then fills holes by iterated 3x3 averaging
// of valid neighbours. Bitwise identical for any thread count.
ReversedFlow reverse_flow(const FlowField& forward, const ReverseParams& params = {});
// Same, with each source pixel's contribution to the normalized flow scaled
// by importance(x) > 0 so that reliable sources win where splats collide.
// Coverage and hole detection still use the geometric weights alone.
ReversedFlow reverse_flow(const FlowField& forward, const Image& importance,
                          const ReverseParams& params = {});

}  // namespace dualvfi
