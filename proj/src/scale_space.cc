#include "cmfd/scale_space.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "cmfd/gaussian.h"

namespace cmfd {
namespace {

constexpr int kMinImageSide = 32;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Raster Subsample(const Raster& image) {
  const int w = (image.width() + 1) / 2;
  const int h = (image.height() + 1) / 2;
  Raster out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(0, y, x) = image.at(0, 2 * y, 2 * x);
  }
  return out;
}

// Bilinear 2x upsampling; output sample i lies at input position i / 2.
Raster Upsample(const Raster& image) {
  const int w = image.width();
  const int h = image.height();
  Raster out(2 * w, 2 * h, 1);
  for (int y = 0; y < 2 * h; ++y) {
    const int y0 = y / 2;
    const int y1 = std::min(y0 + (y & 1), h - 1);
    for (int x = 0; x < 2 * w; ++x) {
      const int x0 = x / 2;
      const int x1 = std::min(x0 + (x & 1), w - 1);
      out.at(0, y, x) = 0.25f * (image.at(0, y0, x0) + image.at(0, y0, x1) +
                                 image.at(0, y1, x0) + image.at(0, y1, x1));
    }
  }
  return out;
}

Raster Difference(const Raster& a, const Raster& b) {
  Raster out(a.width(), a.height(), 1);
  const auto pa = a.plane(0);
  const auto pb = b.plane(0);
  auto po = out.plane(0);
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

Pyramid BuildLevels(Raster base, const ScaleSpaceConfig& config,
                    bool with_dog) {
  if (base.channels() != 1) {
    throw std::invalid_argument("scale space: expected a grayscale image");
  }
  if (std::min(base.width(), base.height()) < kMinImageSide) {
    throw std::invalid_argument("scale space: image smaller than 32x32");
  }
  if (config.scales_per_octave < 1 || config.sigma_min < config.sigma_in ||
      config.sigma_in < 0) {
    throw std::invalid_argument("scale space: invalid blur configuration");
  }

  Pyramid pyr;
  pyr.scales_per_octave = config.scales_per_octave;
  pyr.sigma_min = config.sigma_min;
  pyr.first_octave = config.upsample ? -1 : 0;

  int n_octaves = OctaveCount(base.width(), base.height());
  double delta = 1.0;
  if (config.upsample) {
    base = Upsample(base);
    delta = 0.5;
    ++n_octaves;
  }

  const int n_levels = config.scales_per_octave + 3;
  for (int i = 0; i < n_octaves; ++i) {
    Octave oct;
    oct.index = pyr.first_octave + i;
    oct.delta = delta;
    oct.gaussians.reserve(n_levels);
    if (i == 0) {
      const double initial =
          std::sqrt(config.sigma_min * config.sigma_min -
                    config.sigma_in * config.sigma_in) /
          delta;
      oct.gaussians.push_back(GaussianBlur(base, initial));
    } else {
      const Octave& prev = pyr.octaves.back();
      oct.gaussians.push_back(
          Subsample(prev.gaussians[config.scales_per_octave]));
    }
    for (int s = 1; s < n_levels; ++s) {
      const double cur = pyr.LevelSigma(oct.index, s);
      const double prev = pyr.LevelSigma(oct.index, s - 1);
      const double increment = std::sqrt(cur * cur - prev * prev) / delta;
      oct.gaussians.push_back(GaussianBlur(oct.gaussians.back(), increment));
    }
    if (with_dog) {
      for (int s = 0; s + 1 < n_levels; ++s) {
        oct.dogs.push_back(Difference(oct.gaussians[s + 1], oct.gaussians[s]));
      }
    }
    pyr.octaves.push_back(std::move(oct));
    delta *= 2.0;
  }
  return pyr;
}

struct Refined {
  double dx, dy, ds;
  double response;
};

// One Newton step on the 3-D quadratic model of the DoG around (s, y, x).
// Returns false when the Hessian is singular.
bool RefineExtremum(const Octave& oct, int s, int y, int x, Refined* out) {
  auto d = [&](int ds, int dy, int dx) {
    return static_cast<double>(oct.dogs[s + ds].at(0, y + dy, x + dx));
  };
  const double v = d(0, 0, 0);
  const std::array<double, 3> g = {
      0.5 * (d(0, 0, 1) - d(0, 0, -1)),
      0.5 * (d(0, 1, 0) - d(0, -1, 0)),
      0.5 * (d(1, 0, 0) - d(-1, 0, 0)),
  };
  const double hxx = d(0, 0, 1) + d(0, 0, -1) - 2 * v;
  const double hyy = d(0, 1, 0) + d(0, -1, 0) - 2 * v;
  const double hss = d(1, 0, 0) + d(-1, 0, 0) - 2 * v;
  const double hxy =
      0.25 * (d(0, 1, 1) - d(0, 1, -1) - d(0, -1, 1) + d(0, -1, -1));
  const double hxs =
      0.25 * (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1));
  const double hys =
      0.25 * (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0));

  // Cofactor inverse of the symmetric Hessian.
  const double c00 = hyy * hss - hys * hys;
  const double c01 = hxs * hys - hxy * hss;
  const double c02 = hxy * hys - hxs * hyy;
  const double c11 = hxx * hss - hxs * hxs;
  const double c12 = hxy * hxs - hxx * hys;
  const double c22 = hxx * hyy - hxy * hxy;
  const double det = hxx * c00 + hxy * c01 + hxs * c02;
  if (std::abs(det) < 1e-30) return false;

  out->dx = -(c00 * g[0] + c01 * g[1] + c02 * g[2]) / det;
  out->dy = -(c01 * g[0] + c11 * g[1] + c12 * g[2]) / det;
  out->ds = -(c02 * g[0] + c12 * g[1] + c22 * g[2]) / det;
  out->response = v + 0.5 * (g[0] * out->dx + g[1] * out->dy + g[2] * out->ds);
  return true;
}

bool PassesEdgeTest(const Raster& dog, int y, int x, double edge_threshold) {
  const double v = dog.at(0, y, x);
  const double hxx = dog.at(0, y, x + 1) + dog.at(0, y, x - 1) - 2 * v;
  const double hyy = dog.at(0, y + 1, x) + dog.at(0, y - 1, x) - 2 * v;
  const double hxy = 0.25 * (dog.at(0, y + 1, x + 1) - dog.at(0, y + 1, x - 1) -
                             dog.at(0, y - 1, x + 1) + dog.at(0, y - 1, x - 1));
  const double det = hxx * hyy - hxy * hxy;
  if (det <= 0) return false;
  const double trace = hxx + hyy;
  const double r = edge_threshold;
  return trace * trace / det < (r + 1) * (r + 1) / r;
}

bool IsLocalExtremum(const Octave& oct, int s, int y, int x) {
  const float v = oct.dogs[s].at(0, y, x);
  bool is_max = true;
  bool is_min = true;
  for (int ds = -1; ds <= 1; ++ds) {
    const Raster& dog = oct.dogs[s + ds];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const float n = dog.at(0, y + dy, x + dx);
        is_max = is_max && v > n;
        is_min = is_min && v < n;
        if (!is_max && !is_min) return false;
      }
    }
  }
  return true;
}

// Orientation histogram peaks for a keypoint at octave coordinates
// (xo, yo) with octave-relative scale sigma_o. Empty when the window leaves
// the image.
std::vector<double> DominantOrientations(const Raster& level, double xo,
                                         double yo, double sigma_o,
                                         const ScaleSpaceConfig& config) {
  const double window_sigma = config.orientation_sigma_factor * sigma_o;
  const double radius = 3.0 * window_sigma;
  const int w = level.width();
  const int h = level.height();
  if (xo - radius < 1 || yo - radius < 1 || xo + radius > w - 2 ||
      yo + radius > h - 2) {
    return {};
  }

  const int bins = config.orientation_bins;
  std::vector<double> hist(bins, 0.0);
  const int x_lo = static_cast<int>(std::ceil(xo - radius));
  const int x_hi = static_cast<int>(std::floor(xo + radius));
  const int y_lo = static_cast<int>(std::ceil(yo - radius));
  const int y_hi = static_cast<int>(std::floor(yo + radius));
  const double inv_two_var = 1.0 / (2.0 * window_sigma * window_sigma);
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double gx = 0.5 * (level.at(0, y, x + 1) - level.at(0, y, x - 1));
      const double gy = 0.5 * (level.at(0, y + 1, x) - level.at(0, y - 1, x));
      const double mag = std::hypot(gx, gy);
      if (mag == 0) continue;
      const double dist2 = (x - xo) * (x - xo) + (y - yo) * (y - yo);
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += kTwoPi;
      int bin = static_cast<int>(std::lround(angle * bins / kTwoPi)) % bins;
      hist[bin] += std::exp(-dist2 * inv_two_var) * mag;
    }
  }

  std::vector<double> tmp(bins);
  for (int pass = 0; pass < config.orientation_smoothing; ++pass) {
    for (int b = 0; b < bins; ++b) {
      tmp[b] = (hist[(b + bins - 1) % bins] + hist[b] + hist[(b + 1) % bins]) /
               3.0;
    }
    hist.swap(tmp);
  }

  const double peak = *std::max_element(hist.begin(), hist.end());
  std::vector<double> thetas;
  if (peak <= 0) return thetas;
  for (int b = 0; b < bins; ++b) {
    const double prev = hist[(b + bins - 1) % bins];
    const double next = hist[(b + 1) % bins];
    const double cur = hist[b];
    if (cur > prev && cur > next &&
        cur >= config.orientation_peak_ratio * peak) {
      const double offset = 0.5 * (prev - next) / (prev - 2 * cur + next);
      double theta = kTwoPi * (b + offset) / bins;
      theta = std::fmod(theta, kTwoPi);
      if (theta < 0) theta += kTwoPi;
      if (theta >= kTwoPi) theta = 0;
      thetas.push_back(theta);
    }
  }
  return thetas;
}

}  // namespace

bool CanonicalLess(const Keypoint& a, const Keypoint& b) {
  return std::tie(a.octave, a.y, a.x, a.theta, a.sigma) <
         std::tie(b.octave, b.y, b.x, b.theta, b.sigma);
}

double Pyramid::LevelSigma(int o, double s) const {
  return sigma_min * std::exp2((o - first_octave) + s / scales_per_octave);
}

int OctaveCount(int width, int height) {
  const int side = std::min(width, height);
  if (side < 12) return 0;
  return static_cast<int>(std::floor(std::log2(side / 12.0)));
}

Pyramid BuildPyramid(const Raster& gray, const ScaleSpaceConfig& config) {
  if (gray.channels() != 1) {
    throw std::invalid_argument("scale space: expected a grayscale image");
  }
  Raster shifted = gray;
  if (!shifted.empty()) {
    const auto& samples = shifted.samples();
    const float lowest = *std::min_element(samples.begin(), samples.end());
    for (float& v : shifted.samples()) v -= lowest;
  }
  return BuildLevels(std::move(shifted), config, /*with_dog=*/true);
}

Pyramid BuildGaussianPyramid(const Raster& plane,
                             const ScaleSpaceConfig& config) {
  return BuildLevels(plane, config, /*with_dog=*/false);
}

std::vector<Keypoint> DetectKeypoints(const Pyramid& pyramid,
                                      const ScaleSpaceConfig& config) {
  std::vector<Keypoint> keypoints;
  const int spo = pyramid.scales_per_octave;
  const double width = pyramid.octaves.empty()
                           ? 0
                           : pyramid.octaves.front().gaussians[0].width() *
                                 pyramid.octaves.front().delta;
  const double height = pyramid.octaves.empty()
                            ? 0
                            : pyramid.octaves.front().gaussians[0].height() *
                                  pyramid.octaves.front().delta;
  const float prefilter = static_cast<float>(0.8 * config.contrast_threshold);

  for (const Octave& oct : pyramid.octaves) {
    if (oct.dogs.size() < 3) continue;
    const int w = oct.dogs[0].width();
    const int h = oct.dogs[0].height();
    for (int s = 1; s <= spo; ++s) {
      const Raster& dog = oct.dogs[s];
      for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
          if (std::abs(dog.at(0, y, x)) < prefilter) continue;
          if (!IsLocalExtremum(oct, s, y, x)) continue;

          Refined r;
          if (!RefineExtremum(oct, s, y, x, &r)) continue;
          const double limit = config.max_refine_offset;
          if (std::abs(r.dx) >= limit || std::abs(r.dy) >= limit ||
              std::abs(r.ds) >= limit) {
            continue;
          }
          if (std::abs(r.response) < config.contrast_threshold) continue;
          if (!PassesEdgeTest(dog, y, x, config.edge_threshold)) continue;

          const double level = s + r.ds;
          const double xo = x + r.dx;
          const double yo = y + r.dy;
          Keypoint kp;
          kp.x = xo * oct.delta;
          kp.y = yo * oct.delta;
          if (kp.x < 0 || kp.y < 0 || kp.x >= width || kp.y >= height) {
            continue;
          }
          kp.sigma = pyramid.LevelSigma(oct.index, level);
          kp.octave = oct.index;
          kp.level = level;
          kp.response = r.response;

          const int ori_level =
              std::clamp(static_cast<int>(std::lround(level)), 0, spo + 2);
          const double sigma_o = kp.sigma / oct.delta;
          for (double theta : DominantOrientations(oct.gaussians[ori_level], xo,
                                                   yo, sigma_o, config)) {
            kp.theta = theta;
            keypoints.push_back(kp);
          }
        }
      }
    }
  }
  std::sort(keypoints.begin(), keypoints.end(), CanonicalLess);
  return keypoints;
}

}  // namespace cmfd
