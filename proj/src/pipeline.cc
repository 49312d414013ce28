#include "cmfd/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "cmfd/descriptor.h"
#include "cmfd/errors.h"
#include "cmfd/image_io.h"
#include "cmfd/report.h"
#include "cmfd/scale_space.h"

namespace cmfd {
namespace {

namespace fs = std::filesystem;

bool IsImageFile(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" ||
         ext == ".tiff" || ext == ".bmp";
}

void CollectImages(const fs::path& dir, bool forged,
                   std::vector<DatasetEntry>* out) {
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && IsImageFile(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (auto& f : files) out->push_back({std::move(f), forged});
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"");
  return s.substr(first, last - first + 1);
}

std::vector<DatasetEntry> ReadManifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError(manifest.string() + ": cannot open manifest");
  std::vector<DatasetEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty() || Trim(line)[0] == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw ConfigError(manifest.string() + ":" + std::to_string(line_no) +
                        ": expected path,label");
    }
    const std::string path = Trim(line.substr(0, comma));
    std::string label = Trim(line.substr(comma + 1));
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (line_no == 1 && path == "path" && label == "label") continue;
    bool forged = false;
    if (label == "forged" || label == "1") {
      forged = true;
    } else if (label != "pristine" && label != "0") {
      throw ConfigError(manifest.string() + ":" + std::to_string(line_no) +
                        ": label must be forged or pristine");
    }
    fs::path p(path);
    if (p.is_relative()) p = manifest.parent_path() / p;
    entries.push_back({std::move(p), forged});
  }
  return entries;
}

}  // namespace

int ResolveDescriptorSize(const DescriptorConfig& config, int width,
                          int height) {
  if (config.n > 0) return config.n;
  return std::min(width, height) > 1000 ? 8 : 4;
}

DetectionReport DetectImage(const Raster& image, const Config& config,
                            std::string name) {
  ValidateConfig(config);
  const auto start = std::chrono::steady_clock::now();

  DetectionReport report;
  report.image_path = std::move(name);
  report.width = image.width();
  report.height = image.height();
  report.descriptor_n =
      ResolveDescriptorSize(config.descriptor, image.width(), image.height());
  report.descriptor_channels =
      image.channels() == 3 && config.descriptor.channels == 3 ? 3 : 1;
  report.sigma_255 = config.acontrario.sigma;

  const Raster gray = ToGray(image);
  const Pyramid pyramid = BuildPyramid(gray, config.scale_space);
  const std::vector<Keypoint> keypoints =
      DetectKeypoints(pyramid, config.scale_space);
  report.detected_keypoints = static_cast<int>(keypoints.size());

  const PatchSampler sampler(report.descriptor_channels == 3 ? image : gray,
                             config.scale_space, config.descriptor.sampling);
  ExtractionResult extracted = ExtractDescriptors(
      sampler, keypoints, report.descriptor_n, config.descriptor.spacing);
  report.rejected_keypoints = extracted.rejected;
  report.keypoint_count = static_cast<int>(extracted.descriptors.size());

  AContrarioParams params;
  params.sigma = config.acontrario.sigma / 255.0;
  params.epsilon = config.acontrario.epsilon;
  params.mode = config.acontrario.mode;
  params.exponent = TestExponent(params.mode, report.descriptor_n,
                                 report.descriptor_channels);
  params.n_tests = PairTestBudget(
      config.acontrario.images_budget, report.keypoint_count,
      config.matcher.enable_flip && config.acontrario.count_flip_tests);
  report.tau = ComputeThreshold(params);

  MatchOptions options;
  options.exclusion = config.matcher.exclusion;
  options.fixed_radius = config.matcher.exclusion_radius;
  options.spacing_factor = config.descriptor.spacing;
  options.enable_flip = config.matcher.enable_flip;
  options.threads = config.threads;
  MatchResult matched = MatchAll(extracted.descriptors, report.tau, options);
  report.matches = std::move(matched.matches);
  report.stats = matched.stats;

  report.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

DetectionReport Detect(const fs::path& path, const Config& config) {
  return DetectImage(LoadImage(path), config, path.string());
}

std::vector<DatasetEntry> ListDataset(const fs::path& source) {
  std::vector<DatasetEntry> entries;
  if (fs::is_directory(source)) {
    CollectImages(source / "forged", true, &entries);
    CollectImages(source / "pristine", false, &entries);
  } else if (fs::exists(source)) {
    entries = ReadManifest(source);
  } else {
    throw IoError(source.string() + ": no such dataset");
  }
  if (entries.empty()) {
    throw ConfigError(source.string() + ": dataset contains no images");
  }
  return entries;
}

DatasetSummary Evaluate(const fs::path& source, const Config& config,
                        const std::optional<fs::path>& reports_dir) {
  std::string name = source.filename().string();
  if (name.empty()) name = source.parent_path().filename().string();
  return Evaluate(ListDataset(source), name, config, reports_dir);
}

DatasetSummary Evaluate(std::vector<DatasetEntry> entries,
                        std::string dataset_name, const Config& config,
                        const std::optional<fs::path>& reports_dir) {
  if (entries.empty()) throw ConfigError("dataset contains no images");
  ValidateConfig(config);

  Config per_image = config;
  per_image.acontrario.images_budget = static_cast<double>(entries.size());
  per_image.threads = 1;

  DatasetSummary summary;
  summary.dataset_name = std::move(dataset_name);
  summary.per_image.resize(entries.size());

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(entries.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        summary.per_image[i] = Detect(entries[i].path, per_image);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(entries.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::int64_t comparisons = 0;
  std::int64_t evaluations = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const DetectionReport& r = summary.per_image[i];
    if (entries[i].forged) {
      ++summary.forged_images;
      if (r.forged()) ++summary.true_detections;
    } else {
      ++summary.pristine_images;
      if (r.forged()) ++summary.false_detections;
    }
    comparisons += r.stats.total_comparisons;
    evaluations += r.stats.distance_evaluations;
  }
  if (summary.forged_images > 0) {
    summary.true_detection_rate =
        static_cast<double>(summary.true_detections) / summary.forged_images;
  }
  if (summary.pristine_images > 0) {
    summary.false_detection_rate =
        static_cast<double>(summary.false_detections) / summary.pristine_images;
  }
  if (evaluations > 0) {
    summary.mean_comparisons_per_evaluation =
        static_cast<double>(comparisons) / evaluations;
  }
  summary.entries = std::move(entries);

  if (reports_dir) {
    std::error_code ec;
    fs::create_directories(*reports_dir, ec);
    if (ec) {
      throw IoError(reports_dir->string() + ": cannot create directory");
    }
    for (std::size_t i = 0; i < summary.per_image.size(); ++i) {
      std::ostringstream name;
      name << i << "_" << summary.entries[i].path.stem().string() << ".json";
      WriteJson(ToJson(summary.per_image[i]), *reports_dir / name.str());
    }
  }
  return summary;
}

}  // namespace cmfd
