#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dualvfi/core.hpp"

namespace dualvfi {

struct LucasKanadeParams {
  int levels = 4;
  int window = 7;  // odd side length
  int iterations = 10;
  double damping = 1e-3;  // Tikhonov term added to the 2x2 normal matrix
  // Windows whose smaller structure-tensor eigenvalue, per window pixel, is
  // below this keep the flow propagated from the coarser level.
  double min_eigenvalue = 1e-5;
  int median_radius = 2;  // median filter on the flow after each level (0: off)

  void validate() const;
};

// Dense pyramidal Lucas-Kanade. The result is aligned with `a` and points
// into `b`, so backward_warp(b, flow) approximates a.
FlowField estimate_flow(const Image& a, const Image& b, const LucasKanadeParams& params = {});

// F_ac(x) = F_ab(x) + F_bc(x + F_ab(x)), bilinear.
FlowField compose_flows(const FlowField& ab, const FlowField& bc);

using Mask = std::vector<std::uint8_t>;

// 1 where |F_fwd(x) + F_bwd(x + F_fwd(x))| <= tol_px.
Mask fb_consistency_mask(const FlowField& fwd, const FlowField& bwd, double tol_px);

// Zeroes vectors whose Euclidean norm is below min_px.
FlowField clip_small_flows(const FlowField& flow, double min_px = 1.0);

// Where the flows used by the interpolation pipeline come from. All flows
// follow the pipeline conventions: intra flows are end->start within one
// exposure, cross flows are end->end between the two frames.
struct FlowSet {
  std::optional<FlowField> intra_0, intra_1;
  FlowField cross_01, cross_10;
};

struct FlowSource {
  enum class Kind { ground_truth, file, estimated };
  Kind kind = Kind::ground_truth;
  std::filesystem::path directory;  // Kind::file
  LucasKanadeParams estimator;      // Kind::estimated
  // Emulated estimation error for ground-truth or file flows: each flow gets
  // an independent smooth random field with this per-component RMS (px).
  double perturb_px = 0.0;
  std::uint64_t perturb_seed = 0;

  static FlowSource from_string(const std::string& s);
  std::string describe() const;
};

// Smooth random displacement field (a few low-frequency sinusoids per
// component) with per-component RMS rms_px, fully determined by the seed.
FlowField smooth_perturbation(int width, int height, double rms_px, std::uint64_t seed);

// File layout used by FlowSource::Kind::file.
inline constexpr const char* kIntra0File = "intra_0.flo";
inline constexpr const char* kIntra1File = "intra_1.flo";
inline constexpr const char* kCross01File = "cross_01.flo";
inline constexpr const char* kCross10File = "cross_10.flo";

FlowSet read_flow_set(const std::filesystem::path& dir);
void write_flow_set(const std::filesystem::path& dir, const FlowSet& flows);

}  // namespace dualvfi
