#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cmfd/acontrario.h"
#include "cmfd/descriptor.h"
#include "cmfd/matcher.h"
#include "cmfd/scale_space.h"

namespace cmfd {

struct DescriptorConfig {
  // Spatial side N; 0 selects 8 when min(width, height) > 1000, else 4.
  int n = 0;
  // 3 for color descriptors, 1 for grayscale.
  int channels = 3;
  // Sample spacing in units of the keypoint scale.
  double spacing = 1.0;
  LevelSelection sampling = LevelSelection::kExactBlur;
};

struct AContrarioConfig {
  // Noise standard deviation on the 0-255 scale.
  double sigma = 1.0;
  double epsilon = 1.0;
  // Number of images the false-alarm budget is spread over.
  double images_budget = 100.0;
  ThresholdMode mode = ThresholdMode::kPerCell;
  // Count each flipped comparison as a separate test.
  bool count_flip_tests = true;
};

struct MatcherConfig {
  ExclusionMode exclusion = ExclusionMode::kFootprint;
  double exclusion_radius = 0;
  bool enable_flip = true;
};

struct Config {
  ScaleSpaceConfig scale_space;
  DescriptorConfig descriptor;
  AContrarioConfig acontrario;
  MatcherConfig matcher;
  // 0 picks the hardware concurrency.
  int threads = 0;
};

// Sets one `section.key` entry. Throws ConfigError for unknown keys or
// malformed values.
void SetConfigValue(Config& config, std::string_view key,
                    std::string_view value);

// Flat `key = value` text; blank lines and `#` comments are ignored.
Config ParseConfig(std::string_view text, Config base = {});

// Throws IoError when the file cannot be read.
Config LoadConfig(const std::filesystem::path& path, Config base = {});

// Range checks across all sections. Throws ConfigError.
void ValidateConfig(const Config& config);

ThresholdMode ParseThresholdMode(std::string_view text);
std::string ToString(ThresholdMode mode);
std::string ToString(ExclusionMode mode);

}  // namespace cmfd
