#include "dualvfi/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dualvfi/errors.hpp"
#include "dualvfi/hdrmerge.hpp"
#include "dualvfi/io.hpp"

namespace dualvfi {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

Image to_display(const Image& img, const TonemapConfig& tm) {
  Image out = tonemap_reinhard(img, tm);
  for (double& v : out.data()) v = linear_to_srgb(v);
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

Score evaluate(const Image& pred, const Image& gt, const EvalConfig& cfg) {
  if (cfg.hdr_space) {
    SsimParams sp = cfg.ssim;
    sp.peak = cfg.hdr_peak;
    return {psnr(pred, gt, cfg.hdr_peak, cfg.border_exclude), ssim(pred, gt, sp)};
  }
  const TonemapStats st = measure_tonemap_stats(gt);
  TonemapConfig tm;
  tm.log_average = st.log_average;
  tm.white = st.white;
  const Image p = to_display(pred, tm);
  const Image g = to_display(gt, tm);
  SsimParams sp = cfg.ssim;
  sp.peak = 1.0;
  return {psnr(p, g, 1.0, cfg.border_exclude), ssim(p, g, sp)};
}

namespace {

FlowSet perturb(FlowSet f, const std::string& id, const FlowSource& source) {
  if (!(source.perturb_px > 0.0)) return f;
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a of the sample id
  for (unsigned char ch : id) h = (h ^ ch) * 1099511628211ull;
  auto add = [&](FlowField& flow, std::uint64_t k) {
    std::seed_seq seq{h, source.perturb_seed, k};
    std::uint64_t seed;
    seq.generate(reinterpret_cast<std::uint32_t*>(&seed), reinterpret_cast<std::uint32_t*>(&seed) + 2);
    const FlowField n = smooth_perturbation(flow.width(), flow.height(), source.perturb_px, seed);
    for (std::size_t i = 0; i < flow.data().size(); ++i) flow.data()[i] += n.data()[i];
  };
  if (f.intra_0) add(*f.intra_0, 0);
  if (f.intra_1) add(*f.intra_1, 1);
  add(f.cross_01, 2);
  add(f.cross_10, 3);
  return f;
}

}  // namespace

FlowSet resolve_flows(const LoadedSample& ls, const FlowSource& source) {
  return perturb(resolve_flows_exact(ls, source), ls.info.id, source);
}

FlowSet resolve_flows_exact(const LoadedSample& ls, const FlowSource& source) {
  const SynthSample& s = ls.sample;
  switch (source.kind) {
    case FlowSource::Kind::ground_truth: {
      if (!s.gt_cross_01 || !s.gt_cross_10)
        throw InputError("sample " + ls.info.id + " has no ground-truth flows");
      return {s.gt_intra_0, s.gt_intra_1, *s.gt_cross_01, *s.gt_cross_10};
    }
    case FlowSource::Kind::estimated: {
      const auto& p = source.estimator;
      FlowSet f;
      f.cross_01 = estimate_flow(s.sharp_0e, s.sharp_1e, p);
      f.cross_10 = estimate_flow(s.sharp_1e, s.sharp_0e, p);
      // Intra flows: exposure end -> exposure start of the same frame.
      f.intra_0 = estimate_flow(s.sharp_0e, s.sharp_0s, p);
      f.intra_1 = estimate_flow(s.sharp_1e, s.sharp_1s, p);
      return f;
    }
    case FlowSource::Kind::file: {
      const fs::path per_sample = source.directory / ls.info.id;
      return read_flow_set(fs::is_directory(per_sample) ? per_sample : source.directory);
    }
  }
  throw InputError("unknown flow source");
}

InterpInputs make_interp_inputs(const LoadedSample& ls, FlowSet flows) {
  return {ls.sample.sharp_0e, ls.sample.sharp_1e, std::move(flows), ls.sample.tau};
}

std::vector<fs::path> list_samples(const fs::path& dataset) {
  if (!fs::is_directory(dataset)) throw InputError("not a directory: " + dataset.string());
  std::vector<fs::path> out;
  if (fs::exists(dataset / "manifest.json")) out.push_back(dataset);
  for (const auto& e : fs::directory_iterator(dataset))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

ComparisonReport run_comparison(const fs::path& dataset, const CompareOptions& options) {
  ComparisonReport report;
  report.flow_source = options.flows.describe();
  report.eval = options.eval;
  for (auto v : options.variants) report.variants.push_back(to_string(v));

  const auto samples = list_samples(dataset);
  if (samples.empty()) throw InputError("no sample directories under " + dataset.string());

  for (const auto& dir : samples) {
    const LoadedSample ls = read_sample(dir);
    if (ls.sample.verdict.rejected) {
      report.warnings.push_back(ls.info.id + ": rejected by the saturated-patch rule, skipped");
      continue;
    }
    std::vector<const TargetFrame*> targets;
    if (options.times.empty()) {
      for (const auto& t : ls.sample.targets) targets.push_back(&t);
    } else {
      for (double t : options.times) {
        auto it = std::find_if(ls.sample.targets.begin(), ls.sample.targets.end(),
                               [&](const TargetFrame& tf) { return std::abs(tf.t - t) < 1e-9; });
        if (it == ls.sample.targets.end()) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.6g", t);
          report.warnings.push_back(ls.info.id + ": no target at t=" + buf + ", skipped");
        } else {
          targets.push_back(&*it);
        }
      }
    }
    if (targets.empty()) {
      report.warnings.push_back(ls.info.id + ": no targets, skipped");
      continue;
    }
    const InterpInputs inputs = make_interp_inputs(ls, resolve_flows(ls, options.flows));
    for (auto variant : options.variants)
      for (const TargetFrame* target : targets) {
        const Image pred = interpolate_at(inputs, target->t, variant, options.blend);
        const Score sc = evaluate(pred, target->image, options.eval);
        report.records.push_back({ls.info.id, to_string(variant), target->t, sc.psnr, sc.ssim,
                                  options.eval.border_exclude, ls.info.category, ls.info.acceleration});
      }
  }

  // Aggregates: overall, then categories in label order, then acceleration bins.
  using Pred = std::function<bool(const EvalRecord&)>;
  std::vector<std::pair<std::string, Pred>> groups{{"all", [](const EvalRecord&) { return true; }}};
  std::vector<std::string> labels;
  for (const auto& r : report.records)
    if (r.category && std::find(labels.begin(), labels.end(), *r.category) == labels.end())
      labels.push_back(*r.category);
  std::sort(labels.begin(), labels.end());
  for (const auto& l : labels)
    groups.emplace_back(l, [l](const EvalRecord& r) { return r.category == l; });
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  for (const auto& r : report.records)
    if (r.acceleration) {
      amin = std::min(amin, *r.acceleration);
      amax = std::max(amax, *r.acceleration);
    }
  if (options.accel_bins > 0 && amin <= amax) {
    const int bins = options.accel_bins;
    const double width = amax > amin ? (amax - amin) / bins : 1.0;
    for (int b = 0; b < bins; ++b) {
      const double lo = amin + b * width, hi = b + 1 == bins ? amax : amin + (b + 1) * width;
      char name[64];
      std::snprintf(name, sizeof(name), "accel[%.2f,%.2f%c", lo, hi, b + 1 == bins ? ']' : ')');
      groups.emplace_back(name, [=](const EvalRecord& r) {
        if (!r.acceleration) return false;
        const int k = std::clamp(static_cast<int>((*r.acceleration - amin) / width), 0, bins - 1);
        return k == b;
      });
    }
  }
  for (const auto& [name, pred] : groups)
    for (const auto& v : report.variants) {
      Aggregate a{name, v, 0, 0.0, 0.0};
      for (const auto& r : report.records) {
        if (r.variant != v || !pred(r)) continue;
        ++a.count;
        a.mean_psnr += r.psnr;
        a.mean_ssim += r.ssim;
      }
      if (a.count == 0) continue;
      a.mean_psnr /= a.count;
      a.mean_ssim /= a.count;
      report.aggregates.push_back(a);
    }
  return report;
}

std::string comparison_to_json(const ComparisonReport& r, int indent) {
  json j;
  j["params"] = {{"flow_source", r.flow_source},
                 {"variants", r.variants},
                 {"space", r.eval.hdr_space ? "hdr-linear" : "tonemapped-srgb"},
                 {"border_exclude", r.eval.border_exclude},
                 {"ssim_window", r.eval.ssim.window},
                 {"ssim_sigma", r.eval.ssim.sigma}};
  j["records"] = json::array();
  for (const auto& rec : r.records) {
    j["records"].push_back({{"sample", rec.sample_id},
                            {"variant", rec.variant},
                            {"t", rec.t},
                            {"psnr", number_or_null(rec.psnr)},
                            {"psnr_infinite", std::isinf(rec.psnr)},
                            {"ssim", rec.ssim},
                            {"excluded_border_px", rec.excluded_border_px},
                            {"category", rec.category ? json(*rec.category) : json(nullptr)},
                            {"acceleration", rec.acceleration ? json(*rec.acceleration) : json(nullptr)}});
  }
  j["aggregates"] = json::array();
  for (const auto& a : r.aggregates) {
    j["aggregates"].push_back({{"group", a.group},
                               {"variant", a.variant},
                               {"count", a.count},
                               {"mean_psnr", number_or_null(a.mean_psnr)},
                               {"psnr_infinite", std::isinf(a.mean_psnr)},
                               {"mean_ssim", a.mean_ssim}});
  }
  j["warnings"] = r.warnings;
  return j.dump(indent);
}

std::string comparison_to_text(const ComparisonReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %-10s %6s %10s %8s\n", "group", "variant", "count",
                "PSNR(dB)", "SSIM");
  os << line;
  for (const auto& a : r.aggregates) {
    std::snprintf(line, sizeof(line), "%-20s %-10s %6d %10.3f %8.4f\n", a.group.c_str(),
                  a.variant.c_str(), a.count, a.mean_psnr, a.mean_ssim);
    os << line;
  }
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace dualvfi
