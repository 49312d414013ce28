// Command-line front end: detect, evaluate and threshold subcommands.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cmfd/acontrario.h"
#include "cmfd/config.h"
#include "cmfd/errors.h"
#include "cmfd/image_io.h"
#include "cmfd/pipeline.h"
#include "cmfd/report.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct DetectArgs {
  std::string image;
  std::string config_file;
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::optional<int> descriptor_n;
  std::optional<int> threads;
  std::string json_out;
  std::string overlay_out;
};

struct EvaluateArgs {
  std::string source;
  std::string config_file;
  std::optional<int> threads;
  std::string summary_out;
  std::string reports_dir;
};

struct ThresholdArgs {
  double sigma = 1.0;
  double epsilon = 1.0;
  double images = 100.0;
  double avg_keypoints = 50.0;
  std::optional<int> exponent;
  int descriptor_n = 4;
  int channels = 3;
  std::string mode = "cell";
  bool count_flips = false;
  bool json = false;
};

cmfd::Config BuildConfig(const std::string& file) {
  cmfd::Config config;
  if (!file.empty()) config = cmfd::LoadConfig(file);
  return config;
}

int RunDetect(const DetectArgs& args) {
  cmfd::Config config = BuildConfig(args.config_file);
  if (args.sigma) config.acontrario.sigma = *args.sigma;
  if (args.epsilon) config.acontrario.epsilon = *args.epsilon;
  if (args.descriptor_n) config.descriptor.n = *args.descriptor_n;
  if (args.threads) config.threads = *args.threads;
  cmfd::ValidateConfig(config);

  const cmfd::Raster image = cmfd::LoadImage(args.image);
  const cmfd::DetectionReport report =
      cmfd::DetectImage(image, config, args.image);

  std::printf("%s: %s, K=%d, matches=%zu, tau_255=%.4f, "
              "mean comparisons=%.3f\n",
              args.image.c_str(), report.forged() ? "forged" : "pristine",
              report.keypoint_count, report.matches.size(),
              report.tau.tau * 255.0 * 255.0,
              report.stats.mean_comparisons_per_evaluation());
  if (!args.json_out.empty()) {
    cmfd::WriteJson(cmfd::ToJson(report), args.json_out);
  }
  if (!args.overlay_out.empty()) {
    cmfd::RenderOverlay(image, report.matches, args.overlay_out);
  }
  return kExitOk;
}

int RunEvaluate(const EvaluateArgs& args) {
  cmfd::Config config = BuildConfig(args.config_file);
  if (args.threads) config.threads = *args.threads;
  std::optional<std::filesystem::path> reports;
  if (!args.reports_dir.empty()) reports = args.reports_dir;
  const cmfd::DatasetSummary summary =
      cmfd::Evaluate(args.source, config, reports);
  std::cout << cmfd::FormatSummaryTable(summary);
  if (!args.summary_out.empty()) {
    cmfd::WriteJson(cmfd::ToJson(summary), args.summary_out);
  }
  return kExitOk;
}

int RunThreshold(const ThresholdArgs& args) {
  cmfd::AContrarioParams params;
  params.sigma = args.sigma / 255.0;
  params.epsilon = args.epsilon;
  params.mode = cmfd::ParseThresholdMode(args.mode);
  if (args.descriptor_n < 2 || (args.channels != 1 && args.channels != 3)) {
    throw cmfd::ConfigError("descriptor geometry must have n >= 2 and 1 or 3 "
                            "channels");
  }
  params.exponent = args.exponent
                        ? *args.exponent
                        : cmfd::TestExponent(params.mode, args.descriptor_n,
                                             args.channels);
  const double k = args.avg_keypoints;
  params.n_tests =
      args.images * k * (k - 1.0) / 2.0 * (args.count_flips ? 2.0 : 1.0);
  if (!(args.sigma > 0)) throw cmfd::ConfigError("sigma must be positive");
  const cmfd::Threshold tau = cmfd::ComputeThreshold(params);
  const double tau_255 = tau.tau * 255.0 * 255.0;
  const double predicted = cmfd::PredictedFalseMatchProbability(tau);

  if (args.json) {
    const nlohmann::json out = {
        {"schema", cmfd::kReportSchemaVersion},
        {"tau_255", tau_255},
        {"tau", tau.tau},
        {"sigma_255", args.sigma},
        {"epsilon", params.epsilon},
        {"n_tests", params.n_tests},
        {"exponent", params.exponent},
        {"mode", cmfd::ToString(params.mode)},
        {"predicted_false_match_probability", predicted},
    };
    std::cout << out.dump(2) << '\n';
  } else {
    std::printf("tau        %.6f  (0-255 scale)\n", tau_255);
    std::printf("tau_unit   %.6e  ([0,1] scale)\n", tau.tau);
    std::printf("exponent   %d\n", params.exponent);
    std::printf("n_tests    %.0f\n", params.n_tests);
    std::printf("mode       %s\n", cmfd::ToString(params.mode).c_str());
    std::printf("p_pair     %.6e\n", predicted);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copy-move forgery detector with a-contrario matching"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Analyze one image");
  detect_cmd->add_option("image", detect.image, "Input image")->required();
  detect_cmd->add_option("--config", detect.config_file, "Config file");
  detect_cmd->add_option("--sigma", detect.sigma, "Noise std (0-255 scale)");
  detect_cmd->add_option("--epsilon", detect.epsilon, "Number of false alarms");
  detect_cmd->add_option("--descriptor-n", detect.descriptor_n,
                         "Descriptor side N");
  detect_cmd->add_option("--threads", detect.threads, "Worker threads");
  detect_cmd->add_option("--json", detect.json_out, "Write JSON report");
  detect_cmd->add_option("--overlay", detect.overlay_out, "Write PNG overlay");

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Run the detector over a dataset");
  evaluate_cmd
      ->add_option("source", evaluate.source,
                   "Directory with forged/ and pristine/, or CSV manifest")
      ->required();
  evaluate_cmd->add_option("--config", evaluate.config_file, "Config file");
  evaluate_cmd->add_option("--threads", evaluate.threads, "Worker threads");
  evaluate_cmd->add_option("--summary", evaluate.summary_out,
                           "Write JSON summary");
  evaluate_cmd->add_option("--reports-dir", evaluate.reports_dir,
                           "Write one JSON report per image");

  ThresholdArgs threshold;
  auto* threshold_cmd =
      app.add_subcommand("threshold", "Print the a-contrario threshold");
  threshold_cmd->add_option("--sigma", threshold.sigma,
                            "Noise std (0-255 scale)");
  threshold_cmd->add_option("--epsilon", threshold.epsilon,
                            "Number of false alarms");
  threshold_cmd->add_option("--images", threshold.images, "Images budget");
  threshold_cmd->add_option("--avg-keypoints", threshold.avg_keypoints,
                            "Average keypoints per image");
  threshold_cmd->add_option("--exponent", threshold.exponent,
                            "Independent tests per pair (default n*n*C)");
  threshold_cmd->add_option("--descriptor-n", threshold.descriptor_n,
                            "Descriptor side N");
  threshold_cmd->add_option("--channels", threshold.channels,
                            "Descriptor channels");
  threshold_cmd->add_option("--mode", threshold.mode, "cell, cell-chi2 or scalar");
  threshold_cmd->add_flag("--count-flips", threshold.count_flips,
                          "Double the test count for flipped comparisons");
  threshold_cmd->add_flag("--json", threshold.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*detect_cmd) return RunDetect(detect);
    if (*evaluate_cmd) return RunEvaluate(evaluate);
    if (*threshold_cmd) return RunThreshold(threshold);
  } catch (const cmfd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cmfd::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const cmfd::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
