#include "cmfd/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cmfd/errors.h"

namespace cmfd {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double ToDouble(std::string_view key, std::string_view value) {
  double out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" +
                      std::string(value) + "'");
  }
  return out;
}

int ToInt(std::string_view key, std::string_view value) {
  int out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

bool ToBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError(std::string(key) + ": expected a boolean, got '" +
                    std::string(value) + "'");
}

ExclusionMode ParseExclusionMode(std::string_view value) {
  if (value == "footprint") return ExclusionMode::kFootprint;
  if (value == "fixed") return ExclusionMode::kFixed;
  if (value == "none") return ExclusionMode::kNone;
  throw ConfigError("matcher.exclusion_radius_mode: expected footprint, "
                    "fixed or none, got '" +
                    std::string(value) + "'");
}

using Setter = std::function<void(Config&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"scale_space.scales_per_octave",
       [](Config& c, auto k, auto v) {
         c.scale_space.scales_per_octave = ToInt(k, v);
       }},
      {"scale_space.sigma_min",
       [](Config& c, auto k, auto v) {
         c.scale_space.sigma_min = ToDouble(k, v);
       }},
      {"scale_space.sigma_in",
       [](Config& c, auto k, auto v) { c.scale_space.sigma_in = ToDouble(k, v); }},
      {"scale_space.upsample",
       [](Config& c, auto k, auto v) { c.scale_space.upsample = ToBool(k, v); }},
      {"scale_space.contrast_threshold",
       [](Config& c, auto k, auto v) {
         c.scale_space.contrast_threshold = ToDouble(k, v);
       }},
      {"scale_space.edge_threshold",
       [](Config& c, auto k, auto v) {
         c.scale_space.edge_threshold = ToDouble(k, v);
       }},
      {"scale_space.max_refine_offset",
       [](Config& c, auto k, auto v) {
         c.scale_space.max_refine_offset = ToDouble(k, v);
       }},
      {"scale_space.orientation_bins",
       [](Config& c, auto k, auto v) {
         c.scale_space.orientation_bins = ToInt(k, v);
       }},
      {"scale_space.orientation_sigma_factor",
       [](Config& c, auto k, auto v) {
         c.scale_space.orientation_sigma_factor = ToDouble(k, v);
       }},
      {"scale_space.orientation_smoothing",
       [](Config& c, auto k, auto v) {
         c.scale_space.orientation_smoothing = ToInt(k, v);
       }},
      {"scale_space.orientation_peak_ratio",
       [](Config& c, auto k, auto v) {
         c.scale_space.orientation_peak_ratio = ToDouble(k, v);
       }},
      {"descriptor.n",
       [](Config& c, auto k, auto v) { c.descriptor.n = ToInt(k, v); }},
      {"descriptor.channels",
       [](Config& c, auto k, auto v) { c.descriptor.channels = ToInt(k, v); }},
      {"descriptor.spacing",
       [](Config& c, auto k, auto v) { c.descriptor.spacing = ToDouble(k, v); }},
      {"descriptor.sampling",
       [](Config& c, auto, auto v) {
         if (v == "exact") {
           c.descriptor.sampling = LevelSelection::kExactBlur;
         } else if (v == "nearest") {
           c.descriptor.sampling = LevelSelection::kNearest;
         } else {
           throw ConfigError("descriptor.sampling: expected exact or nearest, "
                             "got '" + std::string(v) + "'");
         }
       }},
      {"acontrario.sigma",
       [](Config& c, auto k, auto v) { c.acontrario.sigma = ToDouble(k, v); }},
      {"acontrario.epsilon",
       [](Config& c, auto k, auto v) { c.acontrario.epsilon = ToDouble(k, v); }},
      {"acontrario.images_budget",
       [](Config& c, auto k, auto v) {
         c.acontrario.images_budget = ToDouble(k, v);
       }},
      {"acontrario.mode",
       [](Config& c, auto, auto v) {
         c.acontrario.mode = ParseThresholdMode(v);
       }},
      {"acontrario.count_flip_tests",
       [](Config& c, auto k, auto v) {
         c.acontrario.count_flip_tests = ToBool(k, v);
       }},
      {"matcher.exclusion_radius_mode",
       [](Config& c, auto, auto v) { c.matcher.exclusion = ParseExclusionMode(v); }},
      {"matcher.exclusion_radius",
       [](Config& c, auto k, auto v) {
         c.matcher.exclusion_radius = ToDouble(k, v);
       }},
      {"matcher.enable_flip",
       [](Config& c, auto k, auto v) { c.matcher.enable_flip = ToBool(k, v); }},
      {"threads", [](Config& c, auto k, auto v) { c.threads = ToInt(k, v); }},
  };
  return setters;
}

}  // namespace

ThresholdMode ParseThresholdMode(std::string_view text) {
  if (text == "cell" || text == "per-cell") return ThresholdMode::kPerCell;
  if (text == "cell-chi2") return ThresholdMode::kPerCellChi2;
  if (text == "scalar" || text == "per-scalar") {
    return ThresholdMode::kPerScalar;
  }
  throw ConfigError("mode: expected cell, cell-chi2 or scalar, got '" +
                    std::string(text) + "'");
}

std::string ToString(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::kPerCell:
      return "cell";
    case ThresholdMode::kPerCellChi2:
      return "cell-chi2";
    case ThresholdMode::kPerScalar:
      break;
  }
  return "scalar";
}

std::string ToString(ExclusionMode mode) {
  switch (mode) {
    case ExclusionMode::kFootprint:
      return "footprint";
    case ExclusionMode::kFixed:
      return "fixed";
    case ExclusionMode::kNone:
      break;
  }
  return "none";
}

void SetConfigValue(Config& config, std::string_view key,
                    std::string_view value) {
  const auto& setters = Setters();
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  it->second(config, key, value);
}

Config ParseConfig(std::string_view text, Config base) {
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{}
                                         : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    SetConfigValue(base, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return base;
}

Config LoadConfig(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), std::move(base));
}

void ValidateConfig(const Config& config) {
  const auto& ss = config.scale_space;
  if (ss.scales_per_octave < 1) {
    throw ConfigError("scale_space.scales_per_octave must be at least 1");
  }
  if (!(ss.sigma_in >= 0) || !(ss.sigma_min >= ss.sigma_in)) {
    throw ConfigError(
        "scale_space.sigma_min must not be below scale_space.sigma_in");
  }
  if (!(ss.contrast_threshold >= 0)) {
    throw ConfigError("scale_space.contrast_threshold must be non-negative");
  }
  if (!(ss.edge_threshold > 0)) {
    throw ConfigError("scale_space.edge_threshold must be positive");
  }
  if (ss.orientation_bins < 3) {
    throw ConfigError("scale_space.orientation_bins must be at least 3");
  }
  if (config.descriptor.n != 0 && config.descriptor.n < 2) {
    throw ConfigError("descriptor.n must be 0 (auto) or at least 2");
  }
  if (config.descriptor.channels != 1 && config.descriptor.channels != 3) {
    throw ConfigError("descriptor.channels must be 1 or 3");
  }
  if (!(config.descriptor.spacing > 0)) {
    throw ConfigError("descriptor.spacing must be positive");
  }
  if (!(config.acontrario.sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(config.acontrario.epsilon > 0)) {
    throw ConfigError("epsilon must be positive");
  }
  if (!(config.acontrario.images_budget >= 1)) {
    throw ConfigError("acontrario.images_budget must be at least 1");
  }
  if (!(config.matcher.exclusion_radius >= 0)) {
    throw ConfigError("matcher.exclusion_radius must be non-negative");
  }
  if (config.threads < 0) throw ConfigError("threads must be non-negative");
}

}  // namespace cmfd
