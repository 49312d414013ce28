#include "cmfd/gaussian.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmfd {
namespace {

// Maps an arbitrary index onto [0, n) by half-sample symmetric reflection.
int Reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

std::vector<float> GaussianKernel(double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian: negative sigma");
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> weights(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = sigma > 0 ? std::exp(-0.5 * i * i / (sigma * sigma)) : 1.0;
    weights[i + radius] = w;
    sum += w;
  }
  std::vector<float> kernel(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    kernel[i] = static_cast<float>(weights[i] / sum);
  }
  return kernel;
}

Raster GaussianBlur(const Raster& image, double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian: negative sigma");
  if (sigma == 0 || image.empty()) return image;

  const std::vector<float> kernel = GaussianKernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width();
  const int h = image.height();

  Raster tmp(w, h, image.channels());
  Raster out(w, h, image.channels());
  std::vector<float> line(std::max(w, h) + 2 * radius);

  for (int c = 0; c < image.channels(); ++c) {
    const auto src = image.plane(c);
    auto mid = tmp.plane(c);
    auto dst = out.plane(c);

    for (int y = 0; y < h; ++y) {
      const float* row = src.data() + static_cast<std::size_t>(y) * w;
      for (int i = -radius; i < w + radius; ++i) {
        line[i + radius] = row[Reflect(i, w)];
      }
      float* out_row = mid.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = 0; k <= 2 * radius; ++k) acc += kernel[k] * line[x + k];
        out_row[x] = acc;
      }
    }

    for (int y = 0; y < h; ++y) {
      float* out_row = dst.data() + static_cast<std::size_t>(y) * w;
      std::fill(out_row, out_row + w, 0.0f);
      for (int k = 0; k <= 2 * radius; ++k) {
        const float weight = kernel[k];
        const float* in_row =
            mid.data() + static_cast<std::size_t>(Reflect(y + k - radius, h)) * w;
        for (int x = 0; x < w; ++x) out_row[x] += weight * in_row[x];
      }
    }
  }
  return out;
}

}  // namespace cmfd
