#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cmfd/raster.h"
#include "cmfd/scale_space.h"

namespace cmfd {

// (N+2) x (N+2) oriented samples around a keypoint, planar per channel.
// Row index k runs along the keypoint's normal direction (theta + pi/2),
// column index l along theta.
struct Patch {
  int side = 0;
  int channels = 0;
  std::vector<float> values;

  float at(int c, int k, int l) const {
    return values[(static_cast<std::size_t>(c) * side + k) * side + l];
  }
  float& at(int c, int k, int l) {
    return values[(static_cast<std::size_t>(c) * side + k) * side + l];
  }
};

// N x N grid of per-channel gradient 2-vectors. Cell (k, l, c) lives at
// index (k * n + l) * channels + c.
struct GradientDescriptor {
  Keypoint keypoint;
  int n = 0;
  int channels = 0;
  std::vector<float> gx;
  std::vector<float> gy;

  int cell_count() const { return n * n * channels; }
  std::size_t index(int k, int l, int c) const {
    return (static_cast<std::size_t>(k) * n + l) * channels + c;
  }
};

enum class LevelSelection {
  // Pyramid level whose blur is nearest the keypoint scale, bilinear
  // sampling.
  kNearest,
  // Finest level not blurrier than the keypoint scale, with the missing
  // blur applied by Gaussian-weighted sampling so that samples carry exactly
  // the keypoint scale.
  kExactBlur,
};

// Samples patches from per-channel Gaussian pyramids built once for an
// image. Keypoint geometry comes from the grayscale detector; values come
// from every color plane.
class PatchSampler {
 public:
  PatchSampler(const Raster& image, const ScaleSpaceConfig& config,
               LevelSelection selection = LevelSelection::kNearest);

  int channels() const { return static_cast<int>(pyramids_.size()); }
  const Pyramid& pyramid(int channel) const { return pyramids_[channel]; }

  // Returns nullopt when any sample falls outside the selected level.
  // Throws std::invalid_argument for n < 2 or spacing_factor <= 0.
  std::optional<Patch> Sample(const Keypoint& kp, int n,
                              double spacing_factor) const;

 private:
  LevelSelection selection_;
  std::vector<Pyramid> pyramids_;
};

std::optional<Patch> SamplePatch(const Raster& image, const Keypoint& kp,
                                 int n, double spacing_factor,
                                 const ScaleSpaceConfig& config = {});

// Central differences over the interior of the patch; the one-sample
// border is consumed.
GradientDescriptor ComputeDescriptor(const Patch& patch,
                                     const Keypoint& keypoint = {});

// Mirrors the grid along k and negates gy. An involution.
GradientDescriptor FlipDescriptor(const GradientDescriptor& d);

struct ExtractionResult {
  std::vector<GradientDescriptor> descriptors;
  // Keypoints dropped because their patch left the image.
  int rejected = 0;
};

ExtractionResult ExtractDescriptors(const PatchSampler& sampler,
                                    std::span<const Keypoint> keypoints, int n,
                                    double spacing_factor);

}  // namespace cmfd
