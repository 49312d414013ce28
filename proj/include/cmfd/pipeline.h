#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmfd/acontrario.h"
#include "cmfd/config.h"
#include "cmfd/matcher.h"
#include "cmfd/raster.h"

namespace cmfd {

struct DetectionReport {
  std::string image_path;
  int width = 0;
  int height = 0;
  // Keypoints found by the detector, before boundary rejection.
  int detected_keypoints = 0;
  int rejected_keypoints = 0;
  // K, the number of descriptors entering the matcher.
  int keypoint_count = 0;
  int descriptor_n = 0;
  int descriptor_channels = 0;
  Threshold tau;
  // On the 0-255 scale, as configured.
  double sigma_255 = 0;
  MatchStats stats;
  std::vector<MatchPair> matches;
  double elapsed_ms = 0;

  bool forged() const { return !matches.empty(); }
};

int ResolveDescriptorSize(const DescriptorConfig& config, int width,
                          int height);

// Runs keypoints, descriptors, threshold and matching on a decoded image.
// `name` is echoed in the report.
DetectionReport DetectImage(const Raster& image, const Config& config,
                            std::string name = {});

// Loads `path` and runs DetectImage. I/O and decode errors carry the path.
DetectionReport Detect(const std::filesystem::path& path,
                       const Config& config);

struct DatasetEntry {
  std::filesystem::path path;
  bool forged = false;
};

// Either a directory with forged/ and pristine/ subdirectories or a CSV
// manifest with `path,label` rows (label forged|pristine; relative paths are
// resolved against the manifest's directory). Throws ConfigError when no
// image is listed.
std::vector<DatasetEntry> ListDataset(const std::filesystem::path& source);

struct DatasetSummary {
  std::string dataset_name;
  int forged_images = 0;
  int pristine_images = 0;
  int true_detections = 0;
  int false_detections = 0;
  double true_detection_rate = 0;
  double false_detection_rate = 0;
  double mean_comparisons_per_evaluation = 0;
  std::vector<DatasetEntry> entries;
  std::vector<DetectionReport> per_image;
};

// Runs Detect on every entry with the false-alarm budget spread over the
// dataset's image count. When `reports_dir` is set, one JSON report per image
// is written there.
DatasetSummary Evaluate(const std::filesystem::path& source,
                        const Config& config,
                        const std::optional<std::filesystem::path>&
                            reports_dir = std::nullopt);

DatasetSummary Evaluate(std::vector<DatasetEntry> entries,
                        std::string dataset_name, const Config& config,
                        const std::optional<std::filesystem::path>&
                            reports_dir = std::nullopt);

}  // namespace cmfd
