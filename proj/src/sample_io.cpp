#include "dualvfi/sample_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dualvfi/errors.hpp"
#include "dualvfi/io.hpp"

namespace dualvfi {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string target_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "target_%02d.pfm", index);
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw InputError("bad JSON in " + path.string() + ": " + e.what());
  }
}

DualExposureFrame load_frame(const fs::path& dir, int k, const Image& sharp_end, double level) {
  DualExposureFrame f;
  f.saturation_level = level;
  f.raw = read_pfm(dir / ("raw_" + std::to_string(k) + ".pfm"));
  auto [s, l] = deinterleave_columns(f.raw);
  f.short_exp = std::move(s);
  f.long_exp = std::move(l);
  f.short_full = sharp_end;
  const fs::path long_full = dir / ("long_full_" + std::to_string(k) + ".pfm");
  if (fs::exists(long_full)) f.long_full = read_pfm(long_full);
  return f;
}

void write_stacked(const fs::path& path, std::initializer_list<const FlowField*> fields) {
  const FlowField& first = **fields.begin();
  const int w = first.width(), h = first.height();
  Image stacked(w, h * 2 * static_cast<int>(fields.size()), 1);
  int plane = 0;
  for (const FlowField* f : fields)
    for (int c = 0; c < 2; ++c, ++plane)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) stacked.at(x, plane * h + y, 0) = f->at(x, y, c);
  write_pfm(path, stacked);
}

}  // namespace

void write_sample(const fs::path& dir, const SynthSample& s, const ExposureTimeline& timeline,
                  const SynthOptions& options, const SampleInfo& info) {
  fs::create_directories(dir);
  const DualExposureFrame* frames[2] = {&s.frame0, &s.frame1};
  for (int k = 0; k < 2; ++k) {
    const auto suffix = std::to_string(k) + ".pfm";
    write_pfm(dir / ("raw_" + suffix), frames[k]->raw);
    write_pfm(dir / ("short_" + suffix), frames[k]->short_exp);
    write_pfm(dir / ("long_" + suffix), frames[k]->long_exp);
    write_pfm(dir / ("long_full_" + suffix), frames[k]->long_full);
  }
  write_pfm(dir / "sharp_0s.pfm", s.sharp_0s);
  write_pfm(dir / "sharp_0e.pfm", s.sharp_0e);
  write_pfm(dir / "sharp_1s.pfm", s.sharp_1s);
  write_pfm(dir / "sharp_1e.pfm", s.sharp_1e);

  json targets = json::array();
  for (const auto& t : s.targets) {
    write_pfm(dir / target_name(t.index), t.image);
    targets.push_back({{"index", t.index}, {"t", t.t}, {"file", target_name(t.index)}});
  }
  json gt = json::object();
  auto put_flow = [&](const char* key, const std::optional<FlowField>& f) {
    if (!f) return;
    const std::string name = std::string("gt_") + key + ".flo";
    write_flo(dir / name, *f);
    gt[key] = name;
  };
  put_flow("intra_0", s.gt_intra_0);
  put_flow("intra_1", s.gt_intra_1);
  put_flow("cross_01", s.gt_cross_01);
  put_flow("cross_10", s.gt_cross_10);

  json m;
  m["id"] = info.id;
  m["first_source_frame"] = info.first_source_frame;
  m["keyframes"] = {{"start0", timeline.frame0_start()},
                    {"end0", timeline.frame0_end()},
                    {"start1", timeline.frame1_start()},
                    {"end1", timeline.frame1_end()}};
  m["targets"] = targets;
  m["tau"] = s.tau;
  m["exposure_frames"] = timeline.exposure_frames;
  m["gap_frames"] = timeline.gap_frames;
  m["ratio"] = timeline.ratio;
  m["saturation_level"] = options.saturation_level;
  m["reject_fraction"] = options.reject_fraction;
  m["noise_sigma"] = options.noise_sigma;
  m["verdict"] = {{"rejected", s.verdict.rejected}, {"max_saturated_fraction", s.verdict.max_fraction}};
  m["ingest"] = info.ingest;
  m["category"] = info.category ? json(*info.category) : json(nullptr);
  m["acceleration"] = info.acceleration ? json(*info.acceleration) : json(nullptr);
  m["gt_flows"] = gt;
  m["layout"] = {{"raw", "even columns long, odd columns short"},
                 {"intra_flow", "end->start"},
                 {"cross_flow", "end->end"}};
  write_json(dir / "manifest.json", m);
}

LoadedSample read_sample(const fs::path& dir) {
  const json m = read_json(dir / "manifest.json");
  LoadedSample out;
  SynthSample& s = out.sample;
  try {
    out.info.id = m.at("id").get<std::string>();
    out.info.ingest = m.value("ingest", std::string("linear"));
    out.info.first_source_frame = m.value("first_source_frame", 0);
    if (m.contains("category") && !m["category"].is_null())
      out.info.category = m["category"].get<std::string>();
    if (m.contains("acceleration") && !m["acceleration"].is_null())
      out.info.acceleration = m["acceleration"].get<double>();
    s.tau = m.at("tau").get<double>();
    s.verdict.rejected = m.at("verdict").at("rejected").get<bool>();
    s.verdict.max_fraction = m.at("verdict").at("max_saturated_fraction").get<double>();
    const double level = m.at("saturation_level").get<double>();

    s.sharp_0s = read_pfm(dir / "sharp_0s.pfm");
    s.sharp_0e = read_pfm(dir / "sharp_0e.pfm");
    s.sharp_1s = read_pfm(dir / "sharp_1s.pfm");
    s.sharp_1e = read_pfm(dir / "sharp_1e.pfm");
    s.frame0 = load_frame(dir, 0, s.sharp_0e, level);
    s.frame1 = load_frame(dir, 1, s.sharp_1e, level);
    for (const auto& t : m.at("targets")) {
      const fs::path file = dir / t.at("file").get<std::string>();
      if (!fs::exists(file)) continue;  // reported as missing by the caller
      s.targets.push_back({t.at("t").get<double>(), t.at("index").get<int>(), read_pfm(file)});
    }
    const json& gt = m.at("gt_flows");
    auto get_flow = [&](const char* key, std::optional<FlowField>& dst) {
      if (gt.contains(key)) dst = read_flo(dir / gt[key].get<std::string>());
    };
    get_flow("intra_0", s.gt_intra_0);
    get_flow("intra_1", s.gt_intra_1);
    get_flow("cross_01", s.gt_cross_01);
    get_flow("cross_10", s.gt_cross_10);
  } catch (const json::exception& e) {
    throw InputError("bad manifest in " + dir.string() + ": " + e.what());
  }
  return out;
}

void write_motion_model(const fs::path& pfm_path, const QuadMotionField& m, double tau,
                        MotionVariant variant) {
  write_stacked(pfm_path, {&m.velocity, &m.acceleration});
  json j;
  j["variant"] = to_string(variant);
  j["basis_time"] = m.basis_time;
  j["tau"] = tau;
  j["width"] = m.velocity.width();
  j["height"] = m.velocity.height();
  j["planes"] = {"vx", "vy", "ax", "ay"};
  j["layout"] = "planes stacked vertically in a single-channel PFM";
  fs::path meta = pfm_path;
  write_json(meta.replace_extension(".json"), j);
}

void write_motion_model(const fs::path& pfm_path, const CubicMotionField& m, double tau) {
  write_stacked(pfm_path, {&m.velocity, &m.acceleration, &m.jerk});
  json j;
  j["variant"] = "cubic";
  j["basis_time"] = m.basis_time;
  j["tau"] = tau;
  j["width"] = m.velocity.width();
  j["height"] = m.velocity.height();
  j["planes"] = {"vx", "vy", "ax", "ay", "jx", "jy"};
  j["layout"] = "planes stacked vertically in a single-channel PFM";
  fs::path meta = pfm_path;
  write_json(meta.replace_extension(".json"), j);
}

}  // namespace dualvfi
