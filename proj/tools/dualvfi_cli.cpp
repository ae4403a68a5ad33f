// dualvfi command-line front end.
//
//   dualvfi synth --input FRAMES --out DATASET
//   dualvfi synth --generate 50 --seed 7 --out DATASET
//   dualvfi interpolate --sample DATASET/scene_0000 --t 0.5 --out mid.pfm
//   dualvfi compare --dataset DATASET --out report.json
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualvfi/compare.hpp"
#include "dualvfi/config.hpp"
#include "dualvfi/errors.hpp"
#include "dualvfi/hdrmerge.hpp"
#include "dualvfi/io.hpp"
#include "dualvfi/metric.hpp"
#include "dualvfi/parallel.hpp"
#include "dualvfi/sample_io.hpp"
#include "dualvfi/sweep.hpp"

namespace fs = std::filesystem;
using namespace dualvfi;

namespace {

// --config has to be known before the other options get their defaults.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << text;
  if (!text.empty() && text.back() != '\n') os << '\n';
}

void write_png_beside(const fs::path& pfm, const Image& hdr, const TonemapConfig& tm) {
  fs::path png = pfm;
  png.replace_extension(".png");
  write_png(png, tonemap_reinhard(hdr, tm));
}

struct SynthArgs {
  std::string input, out;
  int generate = 0;
  int size = 128;
  int channels = 3;
  double accel_min = 2.0, accel_max = 16.0;
  bool linear = false;
};

int run_synth(const SynthArgs& a, Settings& s, std::uint64_t seed) {
  s.timeline.validate();
  const fs::path out = a.out;
  if (a.generate > 0) {
    SweepOptions o;
    o.count = a.generate;
    o.seed = seed;
    o.size = a.size;
    o.channels = a.channels;
    o.accel_min = a.accel_min;
    o.accel_max = a.accel_max;
    const auto entries = generate_sweep(out, o, s.timeline, s.synth, s.analyze.range);
    int rejected = 0;
    for (const auto& e : entries) {
      std::printf("%s  |a|=%6.2f  score=%.5f  %-9s%s\n", e.id.c_str(), e.acceleration, e.nonuniformity,
                  to_string(e.category).c_str(), e.rejected ? "  rejected (saturation)" : "");
      rejected += e.rejected;
    }
    std::printf("%zu samples written to %s, %d rejected\n", entries.size(), out.string().c_str(), rejected);
    return 0;
  }
  if (a.input.empty()) throw InputError("synth needs --input or --generate");
  const auto paths = list_frames(a.input);
  const int n = s.timeline.window_frames();
  if (static_cast<int>(paths.size()) < n)
    throw InputError("need at least " + std::to_string(n) + " frames, found " + std::to_string(paths.size()));
  int written = 0, rejected = 0;
  for (std::size_t first = 0; first + n <= paths.size(); first += n) {
    std::vector<Image> frames;
    for (int k = 0; k < n; ++k) frames.push_back(read_image(paths[first + k], a.linear));
    const SynthSample sample = synthesize_sample(frames, s.timeline, s.synth);
    char id[32];
    std::snprintf(id, sizeof(id), "sample_%04d", written);
    SampleInfo info;
    info.id = id;
    info.first_source_frame = static_cast<int>(first);
    const std::string ext = paths[first].extension().string();
    info.ingest = (ext == ".png" || ext == ".PNG") && !a.linear ? "srgb-decoded" : "linear";
    write_sample(out / id, sample, s.timeline, s.synth, info);
    std::printf("%s  frames %zu..%zu  saturated %.3f%s\n", id, first + 1, first + n, sample.verdict.max_fraction,
                sample.verdict.rejected ? "  rejected" : "");
    ++written;
    rejected += sample.verdict.rejected;
  }
  std::printf("%d samples written to %s, %d rejected\n", written, out.string().c_str(), rejected);
  return 0;
}

struct InterpArgs {
  std::string sample, variant = "quadratic", flows = "gt", out, dump, model_out;
  double t = 0.5;
  double flow_noise = 0.0;
  std::uint64_t seed = 1;
};

int run_interpolate(const InterpArgs& a, Settings& s) {
  const LoadedSample ls = read_sample(a.sample);
  FlowSource src = FlowSource::from_string(a.flows);
  src.estimator = s.flow;
  src.perturb_px = a.flow_noise;
  src.perturb_seed = a.seed;
  const MotionVariant variant = parse_variant(a.variant);
  const InterpInputs in = make_interp_inputs(ls, resolve_flows(ls, src));

  IntermediateSink sink;
  if (!a.dump.empty()) {
    const fs::path dir = a.dump;
    fs::create_directories(dir);
    auto name = [dir](const std::string& what, int level, const char* ext) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s_L%d%s", what.c_str(), level, ext);
      return dir / buf;
    };
    sink.image = [=](const std::string& what, int level, const Image& img) { write_pfm(name(what, level, ".pfm"), img); };
    sink.flow = [=](const std::string& what, int level, const FlowField& f) { write_flo(name(what, level, ".flo"), f); };
  }
  const Image out = interpolate_at(in, a.t, variant, s.blend, a.dump.empty() ? nullptr : &sink);
  write_pfm(a.out, out);
  write_png_beside(a.out, out, s.tonemap);

  if (!a.model_out.empty()) {
    const FlowSet& f = in.flows;
    if (!f.intra_0 || !f.intra_1) throw InputError("model export needs intra flows");
    const fs::path p0 = fs::path(a.model_out).replace_extension("").string() + "_frame0.pfm";
    const fs::path p1 = fs::path(a.model_out).replace_extension("").string() + "_frame1.pfm";
    switch (variant) {
      case MotionVariant::cubic:
      case MotionVariant::quadratic: {
        const auto [tr0, tr1] = make_triplets(f, in.tau, s.blend.third_flow_tolerance);
        if (variant == MotionVariant::cubic) {
          write_motion_model(p0, fit_cubic(tr0), in.tau);
          write_motion_model(p1, fit_cubic(tr1), in.tau);
        } else {
          write_motion_model(p0, fit_quadratic(tr0), in.tau, variant);
          write_motion_model(p1, fit_quadratic(tr1), in.tau, variant);
        }
        break;
      }
      case MotionVariant::two_flow:
        write_motion_model(p0, fit_two_flow_quadratic(*f.intra_0, f.cross_01, in.tau, Basis::frame0), in.tau, variant);
        write_motion_model(p1, fit_two_flow_quadratic(*f.intra_1, f.cross_10, in.tau, Basis::frame1), in.tau, variant);
        break;
      case MotionVariant::linear:
        write_motion_model(p0, linear_model(f.cross_01, Basis::frame0), in.tau, variant);
        write_motion_model(p1, linear_model(f.cross_10, Basis::frame1), in.tau, variant);
        break;
    }
  }
  std::printf("t=%g variant=%s flows=%s -> %s\n", a.t, to_string(variant).c_str(), src.describe().c_str(),
              a.out.c_str());
  return 0;
}

int run_eval(const std::string& pred, const std::string& gt, const std::string& json_out, const Settings& s) {
  const Image p = read_image(pred), g = read_image(gt);
  const Score sc = evaluate(p, g, s.eval);
  std::printf("PSNR %s dB  SSIM %.6f  (%s, border %d px)\n",
              std::isinf(sc.psnr) ? "inf" : std::to_string(sc.psnr).c_str(), sc.ssim,
              s.eval.hdr_space ? "linear HDR" : "tonemapped sRGB", s.eval.border_exclude);
  if (!json_out.empty()) {
    ComparisonReport r;
    r.eval = s.eval;
    r.flow_source = "n/a";
    r.records.push_back({fs::path(pred).stem().string(), "n/a", 0.0, sc.psnr, sc.ssim, s.eval.border_exclude, std::nullopt});
    write_text(json_out, comparison_to_json(r));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    Settings s;
    const std::string config = find_config(argc, argv);
    if (!config.empty()) s = load_settings(config);

    CLI::App app{"Dual-exposure video frame interpolation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    std::uint64_t seed = 1;
    std::string config_path;
    app.add_option("--threads", threads, "worker threads (default: all cores)");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--config", config_path, "JSON file overriding module defaults");
    app.add_flag_callback("--print-config", [&] {
      std::cout << settings_to_json(s) << '\n';
      std::exit(0);
    }, "print the effective settings and exit");

    // synth
    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "build dual-exposure samples from frames or analytic scenes");
    synth->add_option("--input", sa.input, "directory of sequential PNG/PFM frames");
    synth->add_option("--out", sa.out, "output dataset directory")->required();
    synth->add_option("--exposure-frames", s.timeline.exposure_frames)->capture_default_str();
    synth->add_option("--gap", s.timeline.gap_frames)->capture_default_str();
    synth->add_option("--ratio", s.timeline.ratio)->capture_default_str();
    synth->add_option("--saturation", s.synth.saturation_level)->capture_default_str();
    synth->add_option("--reject-frac", s.synth.reject_fraction)->capture_default_str();
    synth->add_option("--noise", s.synth.noise_sigma, "Gaussian noise sigma on both exposures");
    synth->add_option("--targets", s.timeline.target_times, "target times in (0, 1)")->capture_default_str();
    synth->add_flag("--linear", sa.linear, "treat PNG input as linear (no sRGB decode)");
    synth->add_option("--generate", sa.generate, "number of analytic sprite scenes to generate");
    synth->add_option("--size", sa.size, "generated scene size")->capture_default_str();
    synth->add_option("--channels", sa.channels, "generated scene channels")->capture_default_str();
    synth->add_option("--accel-min", sa.accel_min)->capture_default_str();
    synth->add_option("--accel-max", sa.accel_max)->capture_default_str();

    // flow
    std::string fa, fb, fout;
    auto* flow = app.add_subcommand("flow", "pyramidal Lucas-Kanade flow from A to B");
    flow->add_option("--a", fa)->required();
    flow->add_option("--b", fb)->required();
    flow->add_option("--out", fout)->required();
    flow->add_option("--levels", s.flow.levels)->capture_default_str();
    flow->add_option("--window", s.flow.window)->capture_default_str();
    flow->add_option("--iters", s.flow.iterations)->capture_default_str();
    flow->add_option("--damping", s.flow.damping)->capture_default_str();

    // hdrmerge
    std::string ms, ml, mout;
    auto* merge = app.add_subcommand("hdrmerge", "merge a short and a long exposure");
    merge->add_option("--short", ms)->required();
    merge->add_option("--long", ml)->required();
    merge->add_option("--out", mout)->required();
    merge->add_option("--ratio", s.merge.ratio)->capture_default_str();
    merge->add_option("--saturation", s.merge.saturation_level)->capture_default_str();
    merge->add_option("--knee", s.merge.weight_knee)->capture_default_str();

    // tonemap
    std::string tin, tout;
    auto* tonemap = app.add_subcommand("tonemap", "global Reinhard tonemapping");
    tonemap->add_option("--in", tin)->required();
    tonemap->add_option("--out", tout)->required();
    tonemap->add_option("--key", s.tonemap.key)->capture_default_str();

    // interpolate
    InterpArgs ia;
    auto* interp = app.add_subcommand("interpolate", "synthesize the frame at time t");
    interp->add_option("--sample", ia.sample, "sample directory")->required();
    interp->add_option("--t", ia.t)->capture_default_str();
    interp->add_option("--variant", ia.variant, "quadratic|cubic|two-flow|linear")->capture_default_str();
    interp->add_option("--flows", ia.flows, "gt|estimate|DIR")->capture_default_str();
    interp->add_option("--out", ia.out, "output PFM; a tonemapped PNG is written beside it")->required();
    interp->add_option("--dump-intermediates", ia.dump, "directory for per-level flows, alpha and warps");
    interp->add_option("--model-out", ia.model_out, "export the fitted motion fields");
    interp->add_flag("--per-level-fit", s.blend.per_level_fit, "refit the motion model at every level");
    double flow_noise = 0.0;
    interp->add_option("--flow-noise", flow_noise, "emulated flow error, RMS px (uses --seed)");

    // analyze
    std::string ain, aflows, aout, anorm = to_string(s.analyze.norm);
    auto* analyze = app.add_subcommand("analyze", "motion non-uniformity of a frame sequence");
    analyze->add_option("--input", ain, "frame directory")->required();
    analyze->add_option("--flows", aflows, "directory with fwd_NNNN.flo / bwd_NNNN.flo");
    analyze->add_option("--n", s.analyze.frames_per_window)->capture_default_str();
    analyze->add_option("--bins", s.analyze.bins)->capture_default_str();
    analyze->add_option("--range", s.analyze.range)->capture_default_str();
    analyze->add_option("--norm", anorm, "squared|linear")->capture_default_str();
    analyze->add_option("--out", aout, "JSON report");

    // eval
    std::string epred, egt, eout;
    auto* eval = app.add_subcommand("eval", "PSNR and SSIM of one prediction");
    eval->add_option("--pred", epred)->required();
    eval->add_option("--gt", egt)->required();
    eval->add_option("--out", eout, "JSON report");
    eval->add_flag("--hdr-space", s.eval.hdr_space, "score linear HDR instead of tonemapped sRGB");
    eval->add_option("--border", s.eval.border_exclude)->capture_default_str();

    // compare
    std::string cdata, cout_json, cout_text, cflows = "gt";
    std::vector<std::string> cvariants{"quadratic", "two-flow", "linear"};
    std::vector<double> ctimes;
    auto* compare = app.add_subcommand("compare", "score every variant over a dataset");
    compare->add_option("--dataset", cdata)->required();
    compare->add_option("--variants", cvariants)->capture_default_str();
    compare->add_option("--t", ctimes, "target times (default: all stored targets)");
    compare->add_option("--flows", cflows, "gt|estimate|DIR")->capture_default_str();
    compare->add_option("--out", cout_json, "JSON report");
    compare->add_option("--table", cout_text, "aligned-text report");
    compare->add_flag("--hdr-space", s.eval.hdr_space);
    compare->add_option("--border", s.eval.border_exclude)->capture_default_str();
    compare->add_flag("--per-level-fit", s.blend.per_level_fit);
    compare->add_option("--flow-noise", flow_noise, "emulated flow error, RMS px (uses --seed)");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 1;
    }
    if (threads > 0) set_thread_count(threads);
    s.analyze.estimator = s.flow;

    if (*synth) return run_synth(sa, s, seed);
    if (*flow) {
      s.flow.validate();
      write_flo(fout, estimate_flow(read_image(fa), read_image(fb), s.flow));
      return 0;
    }
    if (*merge) {
      s.merge.validate();
      write_image(mout, merge_exposures(read_image(ms), read_image(ml), s.merge));
      return 0;
    }
    if (*tonemap) {
      write_image(tout, tonemap_reinhard(read_image(tin), s.tonemap));
      return 0;
    }
    if (*interp) {
      ia.flow_noise = flow_noise;
      ia.seed = seed;
      return run_interpolate(ia, s);
    }
    if (*analyze) {
      s.analyze.norm = parse_norm(anorm);
      const auto report = analyze_dataset(ain, aflows.empty() ? std::nullopt : std::optional<fs::path>(aflows),
                                          s.analyze);
      for (const auto& w : report.windows)
        std::printf("window %3d  %s  %s\n", w.index, w.score ? std::to_string(*w.score).c_str() : "static",
                    w.category ? to_string(*w.category).c_str() : "-");
      if (!aout.empty()) write_text(aout, report_to_json(report));
      return 0;
    }
    if (*eval) return run_eval(epred, egt, eout, s);
    if (*compare) {
      CompareOptions o;
      o.variants.clear();
      for (const auto& v : cvariants) o.variants.push_back(parse_variant(v));
      o.times = ctimes;
      o.flows = FlowSource::from_string(cflows);
      o.flows.estimator = s.flow;
      o.flows.perturb_px = flow_noise;
      o.flows.perturb_seed = seed;
      o.blend = s.blend;
      o.eval = s.eval;
      const ComparisonReport r = run_comparison(cdata, o);
      const std::string text = comparison_to_text(r);
      std::cout << text;
      if (!cout_json.empty()) write_text(cout_json, comparison_to_json(r));
      if (!cout_text.empty()) write_text(cout_text, text);
      return 0;
    }
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
