#include "cmfd/image_io.h"

#include <cmath>
#include <fstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cmfd/errors.h"

namespace cmfd {
namespace {

constexpr int kDiscRadius = 3;
const cv::Scalar kDrawColor(0, 0, 255);  // BGR red

Raster FromMat(const cv::Mat& mat, const std::string& where) {
  float full_scale = 1.0f;
  switch (mat.depth()) {
    case CV_8U:
      full_scale = 255.0f;
      break;
    case CV_16U:
      full_scale = 65535.0f;
      break;
    case CV_32F:
      break;
    default:
      throw FormatError(where + ": unsupported sample depth");
  }

  const int in_channels = mat.channels();
  int channels = 0;
  if (in_channels == 1 || in_channels == 2) {
    channels = 1;
  } else if (in_channels == 3 || in_channels == 4) {
    channels = 3;
  } else {
    throw FormatError(where + ": unsupported channel count " +
                      std::to_string(in_channels));
  }

  cv::Mat as_float;
  mat.convertTo(as_float, CV_MAKETYPE(CV_32F, in_channels));
  std::vector<cv::Mat> planes;
  cv::split(as_float, planes);

  Raster out(mat.cols, mat.rows, channels);
  for (int c = 0; c < channels; ++c) {
    // OpenCV stores BGR; planes are written as RGB.
    const cv::Mat& src = channels == 3 ? planes[2 - c] : planes[0];
    auto dst = out.plane(c);
    for (int y = 0; y < mat.rows; ++y) {
      const float* row = src.ptr<float>(y);
      for (int x = 0; x < mat.cols; ++x) {
        if (!std::isfinite(row[x])) {
          throw FormatError(where + ": non-finite sample");
        }
        dst[static_cast<std::size_t>(y) * mat.cols + x] = row[x] / full_scale;
      }
    }
  }
  return out;
}

cv::Mat ToBgr8(const Raster& image) {
  cv::Mat out(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const int src_c = image.channels() == 3 ? c : 0;
        const float v = std::clamp(image.at(src_c, y, x), 0.0f, 1.0f);
        row[x][2 - c] = static_cast<uchar>(std::lround(v * 255.0f));
      }
    }
  }
  return out;
}

Raster FromBgr8(const cv::Mat& mat) {
  Raster out(mat.cols, mat.rows, 3);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) {
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = row[x][2 - c] / 255.0f;
    }
  }
  return out;
}

}  // namespace

Raster LoadImage(const std::filesystem::path& path) {
  const std::string where = path.string();
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError(where + ": cannot open file");
  }
  cv::Mat mat;
  try {
    mat = cv::imread(where, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  if (mat.empty()) throw FormatError(where + ": not a decodable image");
  return FromMat(mat, where);
}

void SavePng(const Raster& image, const std::filesystem::path& path) {
  cv::Mat mat(image.height(), image.width(), CV_8UC(image.channels()));
  for (int y = 0; y < image.height(); ++y) {
    uchar* row = mat.ptr<uchar>(y);
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        const int dst_c = image.channels() == 3 ? 2 - c : 0;
        const float v = std::clamp(image.at(c, y, x), 0.0f, 1.0f);
        row[x * image.channels() + dst_c] =
            static_cast<uchar>(std::lround(v * 255.0f));
      }
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (!ok) throw IoError(path.string() + ": cannot write image");
}

Raster DrawMatches(const Raster& image, std::span<const MatchPair> matches) {
  cv::Mat canvas = ToBgr8(image);
  for (const MatchPair& m : matches) {
    const cv::Point a(static_cast<int>(std::lround(m.a.x)),
                      static_cast<int>(std::lround(m.a.y)));
    const cv::Point b(static_cast<int>(std::lround(m.b.x)),
                      static_cast<int>(std::lround(m.b.y)));
    cv::line(canvas, a, b, kDrawColor, 1, cv::LINE_8);
    cv::circle(canvas, a, kDiscRadius, kDrawColor, cv::FILLED, cv::LINE_8);
    cv::circle(canvas, b, kDiscRadius, kDrawColor, cv::FILLED, cv::LINE_8);
  }
  return FromBgr8(canvas);
}

void RenderOverlay(const Raster& image, std::span<const MatchPair> matches,
                   const std::filesystem::path& path) {
  SavePng(DrawMatches(image, matches), path);
}

}  // namespace cmfd
