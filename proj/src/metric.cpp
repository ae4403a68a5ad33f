#include "dualvfi/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "dualvfi/errors.hpp"
#include "dualvfi/io.hpp"
#include "dualvfi/parallel.hpp"

namespace dualvfi {

namespace fs = std::filesystem;

TrajectorySet track_trajectories(std::span<const FlowField> flows, const FlowField* endpoint_fwd,
                                 const FlowField* endpoint_bwd, const TrackParams& params) {
  if (flows.size() + 1 < 3) throw InputError("tracking needs at least 3 frames");
  const int w = flows.front().width(), h = flows.front().height();
  for (const auto& f : flows)
    if (f.width() != w || f.height() != h) throw InputError("tracking flows differ in dimensions");
  if ((endpoint_fwd == nullptr) != (endpoint_bwd == nullptr))
    throw InputError("endpoint flows must be given as a forward/backward pair");

  std::vector<FlowField> clipped;
  clipped.reserve(flows.size());
  for (const auto& f : flows) clipped.push_back(clip_small_flows(f, params.min_flow_px));

  TrajectorySet ts;
  ts.frames = static_cast<int>(flows.size()) + 1;
  ts.width = w;
  ts.height = h;
  ts.positions.resize(static_cast<std::size_t>(w) * h * ts.frames);
  ts.valid.assign(static_cast<std::size_t>(w) * h, 1);

  Mask fb;
  if (endpoint_fwd) {
    fb = fb_consistency_mask(clip_small_flows(*endpoint_fwd, params.min_flow_px),
                             clip_small_flows(*endpoint_bwd, params.min_flow_px),
                             params.fb_tolerance_px);
  }

  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      Vec2* traj = ts.positions.data() + p * ts.frames;
      traj[0] = {static_cast<double>(x), static_cast<double>(y)};
      bool in_bounds = true;
      for (int k = 1; k < ts.frames; ++k) {
        const Vec2 prev = traj[k - 1];
        const Vec2 d = sample_flow(clipped[k - 1], prev.x, prev.y);
        traj[k] = {prev.x + d.x, prev.y + d.y};
        if (traj[k].x < 0 || traj[k].y < 0 || traj[k].x > w - 1 || traj[k].y > h - 1) in_bounds = false;
      }
      ts.valid[p] = in_bounds && (fb.empty() || fb[p]);
    }
  });
  return ts;
}

NormMode parse_norm(const std::string& s) {
  if (s == "squared") return NormMode::squared;
  if (s == "linear") return NormMode::linear;
  throw InputError("unknown normalization: " + s);
}

std::string to_string(NormMode m) { return m == NormMode::squared ? "squared" : "linear"; }

std::optional<double> trajectory_nonuniformity(std::span<const Vec2> pos, NormMode norm) {
  const std::size_t n = pos.size();
  if (n < 3) throw InputError("trajectory needs at least 3 samples");
  double path = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k)
    path += std::hypot(pos[k + 1].x - pos[k].x, pos[k + 1].y - pos[k].y);
  if (path == 0.0) return std::nullopt;

  // Least-squares line over k = 0..n-1, each coordinate independently.
  const double kmean = 0.5 * static_cast<double>(n - 1);
  double xm = 0.0, ym = 0.0, skk = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    xm += pos[k].x;
    ym += pos[k].y;
    skk += (k - kmean) * (k - kmean);
  }
  xm /= n;
  ym /= n;
  double skx = 0.0, sky = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    skx += (k - kmean) * (pos[k].x - xm);
    sky += (k - kmean) * (pos[k].y - ym);
  }
  const double qx = skx / skk, qy = sky / skk;
  double mse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double rx = pos[k].x - xm - qx * (k - kmean);
    const double ry = pos[k].y - ym - qy * (k - kmean);
    mse += rx * rx + ry * ry;
  }
  mse /= n;
  return norm == NormMode::squared ? mse / (path * path) : mse / path;
}

double frame_nonuniformity(const TrajectorySet& traj, NormMode norm) {
  std::vector<double> errors;
  const std::size_t pixels = traj.valid.size();
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!traj.valid[p]) continue;
    if (const auto e = trajectory_nonuniformity(traj.trajectory(p), norm)) errors.push_back(*e);
  }
  if (errors.empty()) throw NumericalError("no valid trajectories");
  std::sort(errors.begin(), errors.end());
  // Nearest rank: ceil(0.5 n) - 1.
  const std::size_t rank = (errors.size() + 1) / 2 - 1;
  return errors[rank];
}

std::string to_string(Category c) {
  switch (c) {
    case Category::easy:
      return "Easy";
    case Category::medium:
      return "Medium";
    case Category::difficult:
      return "Difficult";
    case Category::extreme:
      return "Extreme";
  }
  return "";
}

Category category_of(double score, double range) {
  const int q = static_cast<int>(std::floor(score / (range / 4.0)));
  return static_cast<Category>(std::clamp(q, 0, 3));
}

namespace {

void fill_histogram(NonuniformityReport& r, std::span<const double> scores) {
  r.histogram.assign(r.bins, 0.0);
  if (scores.empty()) return;
  for (double s : scores) {
    const int b = std::clamp(static_cast<int>(std::floor(s / r.range * r.bins)), 0, r.bins - 1);
    r.histogram[b] += 1.0;
  }
  for (double& h : r.histogram) h /= static_cast<double>(scores.size());
}

}  // namespace

NonuniformityReport categorize(std::span<const double> scores, int bins, double range) {
  if (scores.empty()) throw InputError("categorize: empty score list");
  if (bins < 1 || !(range > 0.0)) throw InputError("categorize: bins and range must be positive");
  NonuniformityReport r;
  r.bins = bins;
  r.range = range;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0)) throw InputError("categorize: scores must be non-negative");
    r.windows.push_back({static_cast<int>(i), scores[i], category_of(scores[i], range)});
  }
  fill_histogram(r, scores);
  return r;
}

NonuniformityReport analyze_flow_sequence(std::span<const FlowField> fwd, std::span<const FlowField> bwd,
                                          const AnalyzeParams& params) {
  const int n = params.frames_per_window;
  if (n < 3) throw InputError("frames per window must be >= 3");
  if (fwd.size() != bwd.size()) throw InputError("forward and backward flow counts differ");
  const int frames = static_cast<int>(fwd.size()) + 1;
  if (frames < n) throw InputError("sequence has fewer frames than one window");

  NonuniformityReport report;
  report.bins = params.bins;
  report.range = params.range;
  report.norm = params.norm;
  report.frames_per_window = n;
  std::vector<double> scored;
  for (int wdx = 0; (wdx + 1) * n <= frames; ++wdx) {
    const auto first = static_cast<std::size_t>(wdx * n);
    const auto steps = fwd.subspan(first, n - 1);
    FlowField end_fwd = steps[0];
    for (int k = 1; k < n - 1; ++k) end_fwd = compose_flows(end_fwd, steps[k]);
    FlowField end_bwd = bwd[first + n - 2];
    for (int k = n - 3; k >= 0; --k) end_bwd = compose_flows(end_bwd, bwd[first + k]);

    const TrajectorySet ts = track_trajectories(steps, &end_fwd, &end_bwd, params.track);
    WindowScore ws{wdx, std::nullopt, std::nullopt};
    try {
      ws.score = frame_nonuniformity(ts, params.norm);
      ws.category = category_of(*ws.score, params.range);
      scored.push_back(*ws.score);
    } catch (const NumericalError&) {
      // static window: no moving pixels to score
    }
    report.windows.push_back(ws);
  }
  if (scored.empty()) throw NumericalError("no valid trajectories in any window");
  fill_histogram(report, scored);
  return report;
}

NonuniformityReport analyze_dataset(const fs::path& frames_dir, const std::optional<fs::path>& flows_dir,
                                    const AnalyzeParams& params) {
  std::vector<FlowField> fwd, bwd;
  if (flows_dir) {
    char name[32];
    for (int k = 0;; ++k) {
      std::snprintf(name, sizeof(name), "fwd_%04d.flo", k);
      if (!fs::exists(*flows_dir / name)) break;
      fwd.push_back(read_flo(*flows_dir / name));
      std::snprintf(name, sizeof(name), "bwd_%04d.flo", k);
      if (!fs::exists(*flows_dir / name)) throw InputError("missing " + std::string(name));
      bwd.push_back(read_flo(*flows_dir / name));
    }
  } else {
    const auto paths = list_frames(frames_dir);
    std::vector<Image> frames;
    for (const auto& p : paths) frames.push_back(read_image(p));
    for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
      fwd.push_back(estimate_flow(frames[k], frames[k + 1], params.estimator));
      bwd.push_back(estimate_flow(frames[k + 1], frames[k], params.estimator));
    }
  }
  if (static_cast<int>(fwd.size()) + 1 < params.frames_per_window)
    throw InputError("fewer than " + std::to_string(params.frames_per_window) + " frames");
  return analyze_flow_sequence(fwd, bwd, params);
}

std::string report_to_json(const NonuniformityReport& r, int indent) {
  nlohmann::ordered_json j;
  j["windows"] = nlohmann::ordered_json::array();
  for (const auto& w : r.windows) {
    nlohmann::ordered_json e;
    e["index"] = w.index;
    e["score"] = w.score ? nlohmann::ordered_json(*w.score) : nlohmann::ordered_json(nullptr);
    e["category"] = w.category ? nlohmann::ordered_json(to_string(*w.category)) : nlohmann::ordered_json(nullptr);
    j["windows"].push_back(e);
  }
  j["histogram"] = r.histogram;
  j["params"] = {{"frames_per_window", r.frames_per_window},
                 {"bins", r.bins},
                 {"range", r.range},
                 {"norm", to_string(r.norm)},
                 {"percentile", "nearest-rank 50th"},
                 {"per_pixel_error", "mean squared residual over frames"}};
  return j.dump(indent);
}

}  // namespace dualvfi
