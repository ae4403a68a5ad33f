#include "dualvfi/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dualvfi/errors.hpp"

namespace dualvfi {

using json = nlohmann::ordered_json;

namespace {

// Binds JSON keys of one section to struct fields, in both directions.
class Section {
 public:
  template <typename T>
  Section& field(const std::string& key, T& ref) {
    readers_[key] = [&ref, key](const json& v) {
      try {
        ref = v.get<T>();
      } catch (const json::exception&) {
        throw InputError("config: bad value for '" + key + "'");
      }
    };
    writers_.emplace_back(key, [&ref] { return json(ref); });
    return *this;
  }

  Section& custom(const std::string& key, std::function<void(const json&)> read,
                  std::function<json()> write) {
    readers_[key] = std::move(read);
    writers_.emplace_back(key, std::move(write));
    return *this;
  }

  void read(const std::string& name, const json& obj) const {
    if (!obj.is_object()) throw InputError("config: section '" + name + "' must be an object");
    for (const auto& [k, v] : obj.items()) {
      auto it = readers_.find(k);
      if (it == readers_.end()) throw InputError("config: unknown key '" + name + "." + k + "'");
      it->second(v);
    }
  }

  json write() const {
    json j = json::object();
    for (const auto& [k, w] : writers_) j[k] = w();
    return j;
  }

 private:
  std::map<std::string, std::function<void(const json&)>> readers_;
  std::vector<std::pair<std::string, std::function<json()>>> writers_;
};

std::function<void(const json&)> optional_reader(std::optional<double>& ref, const std::string& key) {
  return [&ref, key](const json& v) {
    if (v.is_null()) {
      ref.reset();
    } else if (v.is_number()) {
      ref = v.get<double>();
    } else {
      throw InputError("config: bad value for '" + key + "'");
    }
  };
}

std::function<json()> optional_writer(const std::optional<double>& ref) {
  return [&ref] { return ref ? json(*ref) : json(nullptr); };
}

void lk_fields(Section& s, LucasKanadeParams& p) {
  s.field("levels", p.levels).field("window", p.window).field("iterations", p.iterations)
      .field("damping", p.damping).field("min_eigenvalue", p.min_eigenvalue)
      .field("median_radius", p.median_radius);
}

std::vector<std::pair<std::string, Section>> sections(Settings& s) {
  std::vector<std::pair<std::string, Section>> out;
  {
    Section sec;
    sec.field("exposure_frames", s.timeline.exposure_frames)
        .field("gap_frames", s.timeline.gap_frames)
        .field("ratio", s.timeline.ratio)
        .field("target_times", s.timeline.target_times);
    out.emplace_back("timeline", std::move(sec));
  }
  {
    Section sec;
    sec.field("saturation_level", s.synth.saturation_level)
        .field("reject_fraction", s.synth.reject_fraction)
        .field("noise_sigma", s.synth.noise_sigma)
        .field("noise_seed", s.synth.noise_seed);
    out.emplace_back("synth", std::move(sec));
  }
  {
    Section sec;
    sec.field("ratio", s.merge.ratio)
        .field("saturation_level", s.merge.saturation_level)
        .field("weight_knee", s.merge.weight_knee);
    out.emplace_back("hdrmerge", std::move(sec));
  }
  {
    Section sec;
    sec.field("key", s.tonemap.key)
        .custom("log_average", optional_reader(s.tonemap.log_average, "log_average"),
                optional_writer(s.tonemap.log_average))
        .custom("white", optional_reader(s.tonemap.white, "white"), optional_writer(s.tonemap.white));
    out.emplace_back("tonemap", std::move(sec));
  }
  {
    Section sec;
    lk_fields(sec, s.flow);
    out.emplace_back("flow", std::move(sec));
  }
  {
    Section sec;
    sec.field("levels", s.blend.levels)
        .field("alpha_mix", s.blend.alpha_mix)
        .field("eps", s.blend.eps)
        .field("residual_gain", s.blend.residual_gain)
        .field("coverage_gain", s.blend.coverage_gain)
        .field("coverage_cap", s.blend.coverage_cap)
        .field("splat_sigma", s.blend.reverse.sigma)
        .field("hole_threshold", s.blend.reverse.hole_threshold)
        .field("per_level_fit", s.blend.per_level_fit)
        .field("third_flow_tolerance", s.blend.third_flow_tolerance)
        .field("splat_photo_scale", s.blend.splat_photo_scale)
        .field("splat_fb_scale", s.blend.splat_fb_scale);
    out.emplace_back("blend", std::move(sec));
  }
  {
    Section sec;
    sec.field("frames_per_window", s.analyze.frames_per_window)
        .field("bins", s.analyze.bins)
        .field("range", s.analyze.range)
        .custom(
            "norm", [&s](const json& v) { s.analyze.norm = parse_norm(v.get<std::string>()); },
            [&s] { return json(to_string(s.analyze.norm)); })
        .field("fb_tolerance_px", s.analyze.track.fb_tolerance_px)
        .field("min_flow_px", s.analyze.track.min_flow_px);
    out.emplace_back("analyze", std::move(sec));
  }
  {
    Section sec;
    sec.field("hdr_space", s.eval.hdr_space)
        .field("border_exclude", s.eval.border_exclude)
        .field("hdr_peak", s.eval.hdr_peak)
        .field("ssim_window", s.eval.ssim.window)
        .field("ssim_sigma", s.eval.ssim.sigma)
        .field("ssim_k1", s.eval.ssim.k1)
        .field("ssim_k2", s.eval.ssim.k2);
    out.emplace_back("eval", std::move(sec));
  }
  return out;
}

}  // namespace

void apply_settings_json(Settings& s, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config: top level must be an object");
  const auto secs = sections(s);
  for (const auto& [name, value] : j.items()) {
    auto it = std::find_if(secs.begin(), secs.end(), [&](const auto& p) { return p.first == name; });
    if (it == secs.end()) throw InputError("config: unknown section '" + name + "'");
    it->second.read(name, value);
  }
  // The analysis estimator follows the flow section.
  s.analyze.estimator = s.flow;
  s.flow.validate();
  s.merge.validate();
  s.blend.validate();
  s.timeline.validate();
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  Settings s;
  apply_settings_json(s, ss.str());
  return s;
}

std::string settings_to_json(const Settings& s, int indent) {
  Settings copy = s;
  json j = json::object();
  for (const auto& [name, sec] : sections(copy)) j[name] = sec.write();
  return j.dump(indent);
}

}  // namespace dualvfi
