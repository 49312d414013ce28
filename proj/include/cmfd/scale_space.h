#pragma once

#include <vector>

#include "cmfd/raster.h"

namespace cmfd {

struct ScaleSpaceConfig {
  int scales_per_octave = 3;
  // Blur of the first pyramid level, in input pixels.
  double sigma_min = 0.8;
  // Blur assumed already present in the input.
  double sigma_in = 0.5;
  // Prepends an octave at twice the input resolution.
  bool upsample = false;
  // On the [0,1] intensity scale.
  double contrast_threshold = 0.015;
  // Maximum ratio of principal curvatures.
  double edge_threshold = 10.0;
  // Refined extrema whose offset exceeds this (in samples, per axis) are
  // discarded.
  double max_refine_offset = 0.6;
  int orientation_bins = 36;
  double orientation_sigma_factor = 1.5;
  int orientation_smoothing = 6;
  double orientation_peak_ratio = 0.8;
};

struct Keypoint {
  // Input-image coordinates; pixel centers are at integer positions.
  double x = 0;
  double y = 0;
  // Detection scale in input pixels.
  double sigma = 0;
  // Principal orientation in [0, 2 pi), measured from the +x axis towards +y.
  double theta = 0;
  int octave = 0;
  // Refined position within the octave, in scale steps.
  double level = 0;
  // Interpolated DoG value at the extremum.
  double response = 0;
};

// Canonical keypoint order: octave, then y, x, theta.
bool CanonicalLess(const Keypoint& a, const Keypoint& b);

struct Octave {
  int index = 0;
  // Distance between samples of this octave, in input pixels.
  double delta = 1.0;
  // scales_per_octave + 3 Gaussian levels.
  std::vector<Raster> gaussians;
  // scales_per_octave + 2 adjacent-level differences. Empty for pyramids
  // built without DoG.
  std::vector<Raster> dogs;
};

struct Pyramid {
  std::vector<Octave> octaves;
  int scales_per_octave = 3;
  double sigma_min = 0.8;
  // Index of the first octave: -1 with upsampling, 0 otherwise.
  int first_octave = 0;

  // Blur of level `s` of octave `o`, in input pixels.
  double LevelSigma(int o, double s) const;
  const Octave& octave(int o) const { return octaves[o - first_octave]; }
};

// Number of octaves for an input of the given size (without upsampling).
int OctaveCount(int width, int height);

// Gaussian and DoG pyramid of a grayscale image. The image minimum is
// subtracted first so that constant offsets do not reach the pyramid.
// Throws std::invalid_argument for color input or min(width, height) < 32.
Pyramid BuildPyramid(const Raster& gray, const ScaleSpaceConfig& config);

// Gaussian levels only, without offset removal. Used for sampling color
// planes at keypoints detected on the grayscale pyramid.
Pyramid BuildGaussianPyramid(const Raster& plane,
                             const ScaleSpaceConfig& config);

// DoG extrema with contrast and edge tests, one quadratic refinement step
// and one keypoint per dominant orientation. Sorted canonically.
std::vector<Keypoint> DetectKeypoints(const Pyramid& pyramid,
                                      const ScaleSpaceConfig& config);

}  // namespace cmfd
