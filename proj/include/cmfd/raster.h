#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cmfd {

// Planar floating-point image. Samples are stored plane by plane, each plane
// row-major, with intensities scaled to [0,1].
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, float fill = 0.0f);
  Raster(int width, int height, int channels, std::vector<float> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return samples_.empty(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  float at(int c, int y, int x) const {
    return samples_[c * plane_size() + static_cast<std::size_t>(y) * width_ +
                    x];
  }
  float& at(int c, int y, int x) {
    return samples_[c * plane_size() + static_cast<std::size_t>(y) * width_ +
                    x];
  }

  std::span<const float> plane(int c) const {
    return {samples_.data() + c * plane_size(), plane_size()};
  }
  std::span<float> plane(int c) {
    return {samples_.data() + c * plane_size(), plane_size()};
  }

  const std::vector<float>& samples() const { return samples_; }
  std::vector<float>& samples() { return samples_; }

  // Single channel copy.
  Raster Channel(int c) const;

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> samples_;
};

// Luma conversion 0.299 R + 0.587 G + 0.114 B. One-channel rasters are
// returned unchanged.
Raster ToGray(const Raster& image);

}  // namespace cmfd
