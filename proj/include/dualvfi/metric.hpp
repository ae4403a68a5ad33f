#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualvfi/core.hpp"
#include "dualvfi/flow.hpp"

namespace dualvfi {

// Per-pixel positions over N frames. positions[p * N + k] is pixel p's
// location in frame k; positions[p * N] is the pixel's own coordinate.
struct TrajectorySet {
  int frames = 0;
  int width = 0;
  int height = 0;
  std::vector<Vec2> positions;
  Mask valid;

  std::span<const Vec2> trajectory(std::size_t pixel) const {
    return std::span<const Vec2>(positions).subspan(pixel * frames, frames);
  }
};

struct TrackParams {
  double fb_tolerance_px = 1.0;
  double min_flow_px = 1.0;  // flows shorter than this are zeroed before tracking
};

// Tracks every pixel of frame 0 through N-1 consecutive flows. Valid pixels
// stay inside the image and, when endpoint flows are given, pass the
// forward-backward check between the first and last frames.
TrajectorySet track_trajectories(std::span<const FlowField> flows,
                                 const FlowField* endpoint_fwd, const FlowField* endpoint_bwd,
                                 const TrackParams& params = {});

// Error normalization: squared divides the line-fit MSE by the squared
// aggregated displacement (scale invariant); linear divides by it once.
enum class NormMode { squared, linear };
NormMode parse_norm(const std::string& s);
std::string to_string(NormMode m);

// Normalized residual of the least-squares line through one trajectory;
// nullopt when the trajectory does not move.
std::optional<double> trajectory_nonuniformity(std::span<const Vec2> positions,
                                               NormMode norm = NormMode::squared);

// Nearest-rank median over valid, moving pixels. Throws NumericalError
// "no valid trajectories" when nothing qualifies.
double frame_nonuniformity(const TrajectorySet& traj, NormMode norm = NormMode::squared);

enum class Category { easy, medium, difficult, extreme };
std::string to_string(Category c);
// Quarter of [0, range] holding the score; anything above range is extreme.
Category category_of(double score, double range = 0.15);

struct WindowScore {
  int index = 0;
  std::optional<double> score;  // empty when the window had no moving pixels
  std::optional<Category> category;
};

struct NonuniformityReport {
  std::vector<WindowScore> windows;
  std::vector<double> histogram;  // probability per bin over [0, range]
  int bins = 8;
  double range = 0.15;
  NormMode norm = NormMode::squared;
  int frames_per_window = 8;
};

NonuniformityReport categorize(std::span<const double> scores, int bins = 8, double range = 0.15);

struct AnalyzeParams {
  int frames_per_window = 8;
  int bins = 8;
  double range = 0.15;
  NormMode norm = NormMode::squared;
  TrackParams track;
  LucasKanadeParams estimator;
};

// Consecutive forward flows fwd[k] (frame k -> k+1) and backward flows
// bwd[k] (frame k+1 -> k) over the whole sequence, split into
// non-overlapping windows of frames_per_window frames.
NonuniformityReport analyze_flow_sequence(std::span<const FlowField> fwd,
                                          std::span<const FlowField> bwd,
                                          const AnalyzeParams& params);

// Frames in `frames_dir` (flows estimated), or precomputed flows in
// `flows_dir` named fwd_%04d.flo / bwd_%04d.flo.
NonuniformityReport analyze_dataset(const std::filesystem::path& frames_dir,
                                    const std::optional<std::filesystem::path>& flows_dir,
                                    const AnalyzeParams& params);

std::string report_to_json(const NonuniformityReport& report, int indent = 2);

}  // namespace dualvfi
