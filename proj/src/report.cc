#include "cmfd/report.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cmfd/config.h"
#include "cmfd/errors.h"

namespace cmfd {
namespace {

using nlohmann::json;

json KeypointJson(const Keypoint& kp) {
  return {{"x", kp.x},         {"y", kp.y},         {"sigma", kp.sigma},
          {"theta", kp.theta}, {"octave", kp.octave}, {"response", kp.response}};
}

}  // namespace

json ToJson(const MatchPair& match) {
  return {{"a", KeypointJson(match.a)},
          {"b", KeypointJson(match.b)},
          {"distance", match.distance},
          {"distance_255", match.distance * 255.0 * 255.0},
          {"flipped", match.flipped},
          {"comparisons", match.comparisons_used}};
}

json ToJson(const DetectionReport& report) {
  const AContrarioParams& p = report.tau.params;
  json matches = json::array();
  for (const MatchPair& m : report.matches) matches.push_back(ToJson(m));
  return {
      {"schema", kReportSchemaVersion},
      {"image", report.image_path},
      {"width", report.width},
      {"height", report.height},
      {"verdict", report.forged() ? "forged" : "pristine"},
      {"keypoints",
       {{"detected", report.detected_keypoints},
        {"rejected", report.rejected_keypoints},
        {"used", report.keypoint_count}}},
      {"descriptor",
       {{"n", report.descriptor_n}, {"channels", report.descriptor_channels}}},
      {"threshold",
       {{"tau", report.tau.tau},
        {"tau_255", report.tau.tau * 255.0 * 255.0},
        {"sigma_255", report.sigma_255},
        {"epsilon", p.epsilon},
        {"n_tests", p.n_tests},
        {"exponent", p.exponent},
        {"mode", ToString(p.mode)}}},
      {"matching",
       {{"pairs_considered", report.stats.pairs_considered},
        {"pairs_excluded", report.stats.pairs_excluded},
        {"pairs_tested", report.stats.pairs_tested},
        {"distance_evaluations", report.stats.distance_evaluations},
        {"total_comparisons", report.stats.total_comparisons},
        {"mean_comparisons_per_evaluation",
         report.stats.mean_comparisons_per_evaluation()}}},
      {"matches", std::move(matches)},
      {"elapsed_ms", report.elapsed_ms},
  };
}

json ToJson(const DatasetSummary& summary) {
  json images = json::array();
  for (std::size_t i = 0; i < summary.per_image.size(); ++i) {
    json entry = ToJson(summary.per_image[i]);
    entry["label"] = summary.entries[i].forged ? "forged" : "pristine";
    images.push_back(std::move(entry));
  }
  return {
      {"schema", kReportSchemaVersion},
      {"dataset", summary.dataset_name},
      {"forged_images", summary.forged_images},
      {"pristine_images", summary.pristine_images},
      {"true_detections", summary.true_detections},
      {"false_detections", summary.false_detections},
      {"true_detection_rate", summary.true_detection_rate},
      {"false_detection_rate", summary.false_detection_rate},
      {"mean_comparisons_per_evaluation",
       summary.mean_comparisons_per_evaluation},
      {"per_image", std::move(images)},
  };
}

std::string FormatSummaryTable(const DatasetSummary& summary) {
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof(line), "%-48s %-9s %-9s %6s %8s %8s\n", "image",
                "label", "verdict", "K", "matches", "tau_255");
  out << line;
  for (std::size_t i = 0; i < summary.per_image.size(); ++i) {
    const DetectionReport& r = summary.per_image[i];
    std::string name = summary.entries[i].path.filename().string();
    if (name.size() > 48) name = name.substr(0, 45) + "...";
    std::snprintf(line, sizeof(line), "%-48s %-9s %-9s %6d %8zu %8.3f\n",
                  name.c_str(),
                  summary.entries[i].forged ? "forged" : "pristine",
                  r.forged() ? "forged" : "pristine", r.keypoint_count,
                  r.matches.size(), r.tau.tau * 255.0 * 255.0);
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "\n%s: true detections %d/%d (%.1f%%), false detections "
                "%d/%d (%.1f%%), mean comparisons %.2f\n",
                summary.dataset_name.c_str(), summary.true_detections,
                summary.forged_images, 100.0 * summary.true_detection_rate,
                summary.false_detections, summary.pristine_images,
                100.0 * summary.false_detection_rate,
                summary.mean_comparisons_per_evaluation);
  out << line;
  return out.str();
}

void WriteJson(const json& value, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot write file");
  out << value.dump(2) << '\n';
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace cmfd
