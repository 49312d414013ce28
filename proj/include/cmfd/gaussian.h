#pragma once

#include <vector>

#include "cmfd/raster.h"

namespace cmfd {

// Sampled Gaussian of radius ceil(4 sigma), normalized to unit sum.
std::vector<float> GaussianKernel(double sigma);

// Separable Gaussian convolution of every plane with half-sample symmetric
// boundary extension. sigma == 0 returns the input unchanged; negative sigma
// throws std::invalid_argument.
Raster GaussianBlur(const Raster& image, double sigma);

}  // namespace cmfd
