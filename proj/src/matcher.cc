#include "cmfd/matcher.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace cmfd {
namespace {

void CheckGeometry(const GradientDescriptor& d1,
                   const GradientDescriptor& d2) {
  if (d1.n != d2.n || d1.channels != d2.channels ||
      d1.gx.size() != d2.gx.size() || d1.gy.size() != d2.gy.size()) {
    throw std::invalid_argument("matcher: descriptor geometry mismatch");
  }
}

// Shared early-exit loop. `mirror` remaps row k of d2 to n - 1 - k and
// negates its gy component.
template <bool mirror>
DistanceResult MaxTest(const GradientDescriptor& d1,
                       const GradientDescriptor& d2, const Threshold& tau) {
  CheckGeometry(d1, d2);
  const float limit = static_cast<float>(tau.tau);
  const bool per_cell = tau.params.mode != ThresholdMode::kPerScalar;
  const int n = d1.n;
  const int row = n * d1.channels;

  DistanceResult r;
  float worst = 0.0f;
  for (int k = 0; k < n; ++k) {
    const float* x1 = d1.gx.data() + static_cast<std::size_t>(k) * row;
    const float* y1 = d1.gy.data() + static_cast<std::size_t>(k) * row;
    const int k2 = mirror ? n - 1 - k : k;
    const float* x2 = d2.gx.data() + static_cast<std::size_t>(k2) * row;
    const float* y2 = d2.gy.data() + static_cast<std::size_t>(k2) * row;
    for (int i = 0; i < row; ++i) {
      const float dx = x1[i] - x2[i];
      const float dy = mirror ? y1[i] + y2[i] : y1[i] - y2[i];
      if (per_cell) {
        const float v = dx * dx + dy * dy;
        ++r.comparisons;
        if (v > limit) {
          r.distance = v;
          return r;
        }
        worst = std::max(worst, v);
      } else {
        const float vx = dx * dx;
        ++r.comparisons;
        if (vx > limit) {
          r.distance = vx;
          return r;
        }
        const float vy = dy * dy;
        ++r.comparisons;
        if (vy > limit) {
          r.distance = vy;
          return r;
        }
        worst = std::max(worst, std::max(vx, vy));
      }
    }
  }
  r.matched = true;
  r.distance = worst;
  return r;
}

}  // namespace

DistanceResult DMax(const GradientDescriptor& d1, const GradientDescriptor& d2,
                    const Threshold& tau) {
  return MaxTest<false>(d1, d2, tau);
}

DistanceResult DFlip(const GradientDescriptor& d1,
                     const GradientDescriptor& d2, const Threshold& tau) {
  return MaxTest<true>(d1, d2, tau);
}

double ExclusionRadius(const Keypoint& a, const Keypoint& b, int n,
                       const MatchOptions& options) {
  switch (options.exclusion) {
    case ExclusionMode::kFootprint:
      return (n + 2) * options.spacing_factor * std::max(a.sigma, b.sigma);
    case ExclusionMode::kFixed:
      return options.fixed_radius;
    case ExclusionMode::kNone:
      break;
  }
  return 0.0;
}

MatchResult MatchAll(std::span<const GradientDescriptor> descriptors,
                     const Threshold& tau, const MatchOptions& options) {
  MatchResult result;
  const std::size_t count = descriptors.size();
  if (count < 2) return result;

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return CanonicalLess(descriptors[i].keypoint, descriptors[j].keypoint);
  });

  std::vector<std::vector<MatchPair>> per_row(count);
  std::vector<MatchStats> per_row_stats(count);
  std::atomic<std::size_t> next_row{0};

  auto worker = [&] {
    for (std::size_t i = next_row++; i < count; i = next_row++) {
      const GradientDescriptor& da = descriptors[order[i]];
      MatchStats& stats = per_row_stats[i];
      for (std::size_t j = i + 1; j < count; ++j) {
        const GradientDescriptor& db = descriptors[order[j]];
        ++stats.pairs_considered;
        const double radius =
            ExclusionRadius(da.keypoint, db.keypoint, da.n, options);
        const double dist = std::hypot(da.keypoint.x - db.keypoint.x,
                                       da.keypoint.y - db.keypoint.y);
        if (dist < radius) {
          ++stats.pairs_excluded;
          continue;
        }
        ++stats.pairs_tested;
        const DistanceResult straight = DMax(da, db, tau);
        ++stats.distance_evaluations;
        stats.total_comparisons += straight.comparisons;
        DistanceResult mirrored;
        if (options.enable_flip) {
          mirrored = DFlip(da, db, tau);
          ++stats.distance_evaluations;
          stats.total_comparisons += mirrored.comparisons;
        }
        if (straight.matched || mirrored.matched) {
          const DistanceResult& hit = straight.matched ? straight : mirrored;
          per_row[i].push_back(MatchPair{da.keypoint, db.keypoint,
                                         hit.distance, !straight.matched,
                                         hit.comparisons});
        }
      }
    }
  };

  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < count; ++i) {
    result.matches.insert(result.matches.end(), per_row[i].begin(),
                          per_row[i].end());
    const MatchStats& s = per_row_stats[i];
    result.stats.pairs_considered += s.pairs_considered;
    result.stats.pairs_excluded += s.pairs_excluded;
    result.stats.pairs_tested += s.pairs_tested;
    result.stats.distance_evaluations += s.distance_evaluations;
    result.stats.total_comparisons += s.total_comparisons;
  }
  return result;
}

}  // namespace cmfd
