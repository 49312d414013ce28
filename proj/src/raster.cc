#include "cmfd/raster.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cmfd {

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("raster: invalid geometry");
  }
  samples_.assign(plane_size() * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<float> samples)
    : width_(width),
      height_(height),
      channels_(channels),
      samples_(std::move(samples)) {
  if (width < 0 || height < 0 || (channels != 1 && channels != 3)) {
    throw std::invalid_argument("raster: invalid geometry");
  }
  if (samples_.size() != plane_size() * channels) {
    throw std::invalid_argument("raster: expected " +
                                std::to_string(plane_size() * channels) +
                                " samples, got " +
                                std::to_string(samples_.size()));
  }
}

Raster Raster::Channel(int c) const {
  const auto src = plane(c);
  return Raster(width_, height_, 1, std::vector<float>(src.begin(), src.end()));
}

Raster ToGray(const Raster& image) {
  if (image.channels() == 1) return image;
  Raster gray(image.width(), image.height(), 1);
  const auto r = image.plane(0);
  const auto g = image.plane(1);
  const auto b = image.plane(2);
  auto out = gray.plane(0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.299f * r[i] + 0.587f * g[i] + 0.114f * b[i];
  }
  return gray;
}

}  // namespace cmfd
