#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmfd/acontrario.h"
#include "cmfd/descriptor.h"
#include "cmfd/scale_space.h"

namespace cmfd {

struct MatchPair {
  // a precedes b in canonical keypoint order.
  Keypoint a;
  Keypoint b;
  // Largest per-element squared difference, on the [0,1] intensity scale.
  float distance = 0;
  // Matched through the mirrored comparison.
  bool flipped = false;
  // Elements examined by the accepting test.
  int comparisons_used = 0;
};

struct DistanceResult {
  bool matched = false;
  // Maximum over all elements when matched. Otherwise the first element
  // value above tau, a lower bound of the maximum.
  float distance = 0;
  // Elements examined: cells in per-cell mode, scalars in per-scalar mode.
  int comparisons = 0;
};

// Early-exit max test over cells in row-major (k, l) order with channels
// innermost. The mode of `tau` selects cell norms or individual scalars.
// Throws std::invalid_argument on geometry mismatch.
DistanceResult DMax(const GradientDescriptor& d1, const GradientDescriptor& d2,
                    const Threshold& tau);

// DMax(d1, FlipDescriptor(d2), tau) evaluated with inline index remapping.
DistanceResult DFlip(const GradientDescriptor& d1,
                     const GradientDescriptor& d2, const Threshold& tau);

enum class ExclusionMode {
  // (n + 2) * spacing_factor * max(sigma_a, sigma_b).
  kFootprint,
  kFixed,
  kNone,
};

struct MatchOptions {
  ExclusionMode exclusion = ExclusionMode::kFootprint;
  // Used with ExclusionMode::kFixed, in pixels.
  double fixed_radius = 0;
  double spacing_factor = 1.0;
  bool enable_flip = true;
  // 0 picks the hardware concurrency.
  int threads = 0;
};

struct MatchStats {
  // K(K-1)/2.
  std::int64_t pairs_considered = 0;
  std::int64_t pairs_excluded = 0;
  std::int64_t pairs_tested = 0;
  // DMax plus DFlip evaluations.
  std::int64_t distance_evaluations = 0;
  std::int64_t total_comparisons = 0;

  double mean_comparisons_per_evaluation() const {
    return distance_evaluations == 0
               ? 0.0
               : static_cast<double>(total_comparisons) / distance_evaluations;
  }
};

struct MatchResult {
  std::vector<MatchPair> matches;
  MatchStats stats;
};

double ExclusionRadius(const Keypoint& a, const Keypoint& b, int n,
                       const MatchOptions& options);

// Tests every unordered pair of distinct descriptors with DMax and, when
// enabled, DFlip. A pair matching both ways is reported unflipped. The
// output is sorted canonically and does not depend on input order or thread
// count.
MatchResult MatchAll(std::span<const GradientDescriptor> descriptors,
                     const Threshold& tau, const MatchOptions& options = {});

}  // namespace cmfd
