#pragma once

#include <filesystem>
#include <string>

#include "dualvfi/compare.hpp"
#include "dualvfi/flow.hpp"
#include "dualvfi/hdrmerge.hpp"
#include "dualvfi/interp.hpp"
#include "dualvfi/metric.hpp"
#include "dualvfi/sensor.hpp"

namespace dualvfi {

// Every tunable default, grouped by module. A JSON config file overrides any
// subset, e.g. {"blend": {"coverage_gain": 1.5}, "flow": {"levels": 5}}.
struct Settings {
  ExposureTimeline timeline;
  SynthOptions synth;
  MergeConfig merge;
  TonemapConfig tonemap;
  LucasKanadeParams flow;
  BlendConfig blend;
  AnalyzeParams analyze;
  EvalConfig eval;
};

// Unknown sections or keys are an InputError so typos do not pass silently.
void apply_settings_json(Settings& s, const std::string& json_text);
Settings load_settings(const std::filesystem::path& path);
std::string settings_to_json(const Settings& s, int indent = 2);

}  // namespace dualvfi
