#include "synthetic.h"

#include "cmfd/gaussian.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace cmfd::testing {
namespace {

cv::Mat ToMat(const Raster& image) {
  std::vector<cv::Mat> planes;
  for (int c = 0; c < image.channels(); ++c) {
    cv::Mat plane(image.height(), image.width(), CV_32F);
    const auto src = image.plane(c);
    std::copy(src.begin(), src.end(), plane.ptr<float>());
    planes.push_back(plane);
  }
  cv::Mat out;
  cv::merge(planes, out);
  return out;
}

Raster FromMat(const cv::Mat& mat) {
  std::vector<cv::Mat> planes;
  cv::split(mat, planes);
  Raster out(mat.cols, mat.rows, mat.channels());
  for (int c = 0; c < mat.channels(); ++c) {
    cv::Mat contiguous = planes[c].clone();
    auto dst = out.plane(c);
    std::copy(contiguous.ptr<float>(), contiguous.ptr<float>() + dst.size(),
              dst.begin());
  }
  return out;
}

}  // namespace

Raster Quantize8(const Raster& image) {
  Raster out = image;
  for (float& v : out.samples()) {
    v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) /
        255.0f;
  }
  return out;
}

Raster TexturedImage(int width, int height, std::uint64_t seed,
                     int channels, double grain) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Raster out(width, height, channels);

  std::vector<double> base(channels);
  std::vector<double> tilt_x(channels);
  std::vector<double> tilt_y(channels);
  for (int c = 0; c < channels; ++c) {
    base[c] = 0.3 + 0.4 * unit(rng);
    tilt_x[c] = (unit(rng) - 0.5) * 0.3 / width;
    tilt_y[c] = (unit(rng) - 0.5) * 0.3 / height;
  }
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        out.at(c, y, x) =
            static_cast<float>(base[c] + tilt_x[c] * x + tilt_y[c] * y);
      }
    }
  }

  const int blobs = width * height / 150;
  std::vector<double> amp(channels);
  for (int b = 0; b < blobs; ++b) {
    const double cx = unit(rng) * width;
    const double cy = unit(rng) * height;
    const double r = 1.5 + 6.0 * std::pow(unit(rng), 2.0);
    const double aspect = 0.5 + unit(rng);
    const double angle = unit(rng) * 3.14159265358979;
    const double shade = unit(rng) - 0.5;
    for (int c = 0; c < channels; ++c) {
      amp[c] = 0.35 * shade + 0.12 * (unit(rng) - 0.5);
    }
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    const int reach = static_cast<int>(std::ceil(4 * r * std::max(1.0, aspect)));
    for (int y = std::max(0, static_cast<int>(cy) - reach);
         y < std::min(height, static_cast<int>(cy) + reach + 1); ++y) {
      for (int x = std::max(0, static_cast<int>(cx) - reach);
           x < std::min(width, static_cast<int>(cx) + reach + 1); ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        const double u = (ca * dx + sa * dy) / r;
        const double v = (-sa * dx + ca * dy) / (r * aspect);
        const double g = std::exp(-0.5 * (u * u + v * v));
        for (int c = 0; c < channels; ++c) out.at(c, y, x) += amp[c] * g;
      }
    }
  }
  // Fine multi-scale grain so that no area is flat.
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double scale : {1.0, 2.0, 4.0}) {
      Raster noise(width, height, channels);
      for (float& v : noise.samples()) v = static_cast<float>(gauss(rng));
      noise = GaussianBlur(noise, scale);
      // Blurred unit white noise has std about 1 / (2 sqrt(pi) scale).
      const double gain = grain * 2.0 * std::sqrt(3.14159265358979) * scale;
      for (std::size_t i = 0; i < noise.samples().size(); ++i) {
        out.samples()[i] += static_cast<float>(gain * noise.samples()[i]);
      }
    }
  }
  return Quantize8(out);
}

Raster SimilarityBicubic(const Raster& image, double radians, double factor,
                         double cx, double cy) {
  // Destination (x', y') samples source R(-angle) (x' - c) / factor + c.
  const double c = std::cos(radians) / factor;
  const double s = std::sin(radians) / factor;
  cv::Mat inverse = (cv::Mat_<double>(2, 3) << c, s, cx - c * cx - s * cy, -s,
                     c, cy + s * cx - c * cy);
  cv::Mat out;
  const cv::Mat src = ToMat(image);
  cv::warpAffine(src, out, inverse, src.size(),
                 cv::INTER_CUBIC | cv::WARP_INVERSE_MAP, cv::BORDER_REFLECT);
  return FromMat(out);
}

Raster RotateBicubic(const Raster& image, double radians, double cx,
                     double cy) {
  return SimilarityBicubic(image, radians, 1.0, cx, cy);
}

Raster ScaleBicubic(const Raster& image, double factor, double cx,
                    double cy) {
  return SimilarityBicubic(image, 0.0, factor, cx, cy);
}

Raster MirrorHorizontal(const Raster& image) {
  Raster out = image;
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        out.at(c, y, x) = image.at(c, y, image.width() - 1 - x);
      }
    }
  }
  return out;
}

Raster Rotate90(const Raster& image) {
  const int w = image.width();
  const int h = image.height();
  Raster out(h, w, image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, x, h - 1 - y) = image.at(c, y, x);
    }
  }
  return out;
}

Raster JpegRecompress(const Raster& image, int quality) {
  cv::Mat bgr8(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const int src_c = image.channels() == 3 ? c : 0;
        const float v = std::clamp(image.at(src_c, y, x), 0.0f, 1.0f);
        bgr8.at<cv::Vec3b>(y, x)[2 - c] =
            static_cast<uchar>(std::lround(v * 255.0f));
      }
    }
  }
  std::vector<uchar> buffer;
  cv::imencode(".jpg", bgr8, buffer, {cv::IMWRITE_JPEG_QUALITY, quality});
  const cv::Mat decoded = cv::imdecode(buffer, cv::IMREAD_COLOR);
  Raster out(image.width(), image.height(), 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(c, y, x) = decoded.at<cv::Vec3b>(y, x)[2 - c] / 255.0f;
      }
    }
  }
  return out;
}

Raster AddGaussianNoise(const Raster& image, double stddev,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, stddev);
  Raster out = image;
  for (float& v : out.samples()) v = static_cast<float>(v + noise(rng));
  return Quantize8(out);
}

std::string ToString(ForgeryKind kind) {
  switch (kind) {
    case ForgeryKind::kVerbatim:
      return "verbatim";
    case ForgeryKind::kRotated30:
      return "rotated30";
    case ForgeryKind::kScaled090:
      return "scaled0.9";
    case ForgeryKind::kRotated30Scaled090:
      return "rotated30+scaled0.9";
    case ForgeryKind::kFlipped:
      return "flipped";
    case ForgeryKind::kJpeg80:
      return "jpeg80";
    case ForgeryKind::kNoise2:
      return "noise2";
  }
  return "?";
}

Forgery MakeForgery(const Raster& base, ForgeryKind kind, int region,
                    int offset, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int w = base.width();
  const int h = base.height();
  const double radius = 0.5 * region;

  // Source center on even coordinates, destination offset horizontally.
  std::uniform_int_distribution<int> pick_y(static_cast<int>(radius) + 8,
                                            h - static_cast<int>(radius) - 8);
  const int margin = static_cast<int>(radius) + 8;
  std::uniform_int_distribution<int> pick_x(margin, w - margin - offset);
  Forgery f;
  f.src_x = 2 * (pick_x(rng) / 2);
  f.src_y = 2 * (pick_y(rng) / 2);
  f.dst_x = f.src_x + offset;
  f.dst_y = f.src_y;

  Raster transformed = base;
  switch (kind) {
    case ForgeryKind::kRotated30:
      transformed = RotateBicubic(base, 30.0 * 3.14159265358979 / 180.0,
                                  f.src_x, f.src_y);
      break;
    case ForgeryKind::kScaled090:
      transformed = ScaleBicubic(base, 0.9, f.src_x, f.src_y);
      break;
    case ForgeryKind::kRotated30Scaled090:
      transformed = SimilarityBicubic(base, 30.0 * 3.14159265358979 / 180.0,
                                      0.9, f.src_x, f.src_y);
      break;
    case ForgeryKind::kFlipped: {
      // Mirror about the vertical line through the source center.
      transformed = base;
      for (int c = 0; c < base.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const int mx = static_cast<int>(2 * f.src_x) - x;
            transformed.at(c, y, x) = base.at(c, y, std::clamp(mx, 0, w - 1));
          }
        }
      }
      break;
    }
    default:
      break;
  }

  Raster out = base;
  const int dx = static_cast<int>(f.dst_x - f.src_x);
  const int dy = static_cast<int>(f.dst_y - f.src_y);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (std::abs(x - f.dst_x) > radius || std::abs(y - f.dst_y) > radius) {
        continue;
      }
      const int sx = x - dx;
      const int sy = y - dy;
      if (sx < 0 || sy < 0 || sx >= w || sy >= h) continue;
      for (int c = 0; c < base.channels(); ++c) {
        out.at(c, y, x) = transformed.at(c, sy, sx);
      }
    }
  }
  out = Quantize8(out);

  if (kind == ForgeryKind::kJpeg80) out = JpegRecompress(out, 80);
  if (kind == ForgeryKind::kNoise2) out = AddGaussianNoise(out, 2.0 / 255.0, seed);
  f.image = std::move(out);
  return f;
}

}  // namespace cmfd::testing
