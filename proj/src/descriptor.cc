#include "cmfd/descriptor.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmfd {
namespace {

// Below this residual blur (in octave pixels) plain bilinear sampling is
// used.
constexpr double kMinGaussianSampling = 0.5;

float BilinearSample(const Raster& level, double x, double y) {
  const int w = level.width();
  const int h = level.height();
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const float fx = static_cast<float>(x - x0);
  const float fy = static_cast<float>(y - y0);
  const float top = (1 - fx) * level.at(0, y0, x0) + fx * level.at(0, y0, x1);
  const float bottom =
      (1 - fx) * level.at(0, y1, x0) + fx * level.at(0, y1, x1);
  return (1 - fy) * top + fy * bottom;
}

// Normalized Gaussian-weighted average of the pixels around (x, y), with
// half-sample symmetric extension at the borders.
float GaussianSample(const Raster& level, double x, double y, double sigma) {
  const int w = level.width();
  const int h = level.height();
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int xc = static_cast<int>(std::lround(x));
  const int yc = static_cast<int>(std::lround(y));
  const double inv = 1.0 / (2.0 * sigma * sigma);
  auto reflect = [](int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
    return std::clamp(i, 0, n - 1);
  };
  double acc = 0;
  double norm = 0;
  for (int j = yc - radius; j <= yc + radius; ++j) {
    const double wy = std::exp(-(j - y) * (j - y) * inv);
    const int row = reflect(j, h);
    for (int i = xc - radius; i <= xc + radius; ++i) {
      const double weight = wy * std::exp(-(i - x) * (i - x) * inv);
      acc += weight * level.at(0, row, reflect(i, w));
      norm += weight;
    }
  }
  return static_cast<float>(acc / norm);
}

}  // namespace

PatchSampler::PatchSampler(const Raster& image,
                           const ScaleSpaceConfig& config,
                           LevelSelection selection)
    : selection_(selection) {
  pyramids_.reserve(image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    pyramids_.push_back(BuildGaussianPyramid(image.Channel(c), config));
  }
}

std::optional<Patch> PatchSampler::Sample(const Keypoint& kp, int n,
                                          double spacing_factor) const {
  if (n < 2) throw std::invalid_argument("patch: n must be at least 2");
  if (!(spacing_factor > 0)) {
    throw std::invalid_argument("patch: spacing factor must be positive");
  }
  const Pyramid& ref = pyramids_.front();
  const int o = std::clamp(kp.octave, ref.first_octave,
                           ref.first_octave +
                               static_cast<int>(ref.octaves.size()) - 1);
  const Octave& oct_ref = ref.octave(o);
  const int last_level = static_cast<int>(oct_ref.gaussians.size()) - 1;
  const double s_exact =
      ref.scales_per_octave * std::log2(kp.sigma / ref.LevelSigma(o, 0));

  int s = 0;
  double extra = 0;
  if (selection_ == LevelSelection::kNearest) {
    s = std::clamp(static_cast<int>(std::lround(s_exact)), 0, last_level);
  } else {
    // Finest level not blurrier than the keypoint scale; the remainder is
    // applied by Gaussian-weighted sampling.
    s = std::clamp(static_cast<int>(std::floor(s_exact + 1e-9)), 0,
                   last_level);
    const double target = kp.sigma / oct_ref.delta;
    const double have = ref.LevelSigma(o, s) / oct_ref.delta;
    extra = target > have ? std::sqrt(target * target - have * have) : 0.0;
    if (extra < kMinGaussianSampling) extra = 0;
  }

  const int side = n + 2;
  const double step = spacing_factor * kp.sigma / oct_ref.delta;
  const double cx = kp.x / oct_ref.delta;
  const double cy = kp.y / oct_ref.delta;
  const double cos_t = std::cos(kp.theta);
  const double sin_t = std::sin(kp.theta);
  const double center = 0.5 * (side - 1);
  const int w = oct_ref.gaussians[s].width();
  const int h = oct_ref.gaussians[s].height();

  Patch patch;
  patch.side = side;
  patch.channels = channels();
  patch.values.resize(static_cast<std::size_t>(side) * side * channels());

  for (int k = 0; k < side; ++k) {
    const double v = (k - center) * step;
    for (int l = 0; l < side; ++l) {
      const double u = (l - center) * step;
      const double x = cx + u * cos_t - v * sin_t;
      const double y = cy + u * sin_t + v * cos_t;
      if (x < 0 || y < 0 || x > w - 1 || y > h - 1) return std::nullopt;
      for (int c = 0; c < channels(); ++c) {
        const Raster& level = pyramids_[c].octave(o).gaussians[s];
        patch.at(c, k, l) = extra > 0 ? GaussianSample(level, x, y, extra)
                                      : BilinearSample(level, x, y);
      }
    }
  }
  return patch;
}

std::optional<Patch> SamplePatch(const Raster& image, const Keypoint& kp,
                                 int n, double spacing_factor,
                                 const ScaleSpaceConfig& config) {
  return PatchSampler(image, config).Sample(kp, n, spacing_factor);
}

GradientDescriptor ComputeDescriptor(const Patch& patch,
                                     const Keypoint& keypoint) {
  if (patch.side < 3) throw std::invalid_argument("descriptor: patch too small");
  GradientDescriptor d;
  d.keypoint = keypoint;
  d.n = patch.side - 2;
  d.channels = patch.channels;
  d.gx.resize(d.cell_count());
  d.gy.resize(d.cell_count());
  for (int k = 0; k < d.n; ++k) {
    for (int l = 0; l < d.n; ++l) {
      for (int c = 0; c < d.channels; ++c) {
        const int pk = k + 1;
        const int pl = l + 1;
        const std::size_t i = d.index(k, l, c);
        d.gx[i] = 0.5f * (patch.at(c, pk, pl + 1) - patch.at(c, pk, pl - 1));
        d.gy[i] = 0.5f * (patch.at(c, pk + 1, pl) - patch.at(c, pk - 1, pl));
      }
    }
  }
  return d;
}

GradientDescriptor FlipDescriptor(const GradientDescriptor& d) {
  GradientDescriptor out = d;
  for (int k = 0; k < d.n; ++k) {
    for (int l = 0; l < d.n; ++l) {
      for (int c = 0; c < d.channels; ++c) {
        const std::size_t dst = d.index(k, l, c);
        const std::size_t src = d.index(d.n - 1 - k, l, c);
        out.gx[dst] = d.gx[src];
        out.gy[dst] = -d.gy[src];
      }
    }
  }
  return out;
}

ExtractionResult ExtractDescriptors(const PatchSampler& sampler,
                                    std::span<const Keypoint> keypoints, int n,
                                    double spacing_factor) {
  ExtractionResult result;
  result.descriptors.reserve(keypoints.size());
  for (const Keypoint& kp : keypoints) {
    auto patch = sampler.Sample(kp, n, spacing_factor);
    if (!patch) {
      ++result.rejected;
      continue;
    }
    result.descriptors.push_back(ComputeDescriptor(*patch, kp));
  }
  return result;
}

}  // namespace cmfd
