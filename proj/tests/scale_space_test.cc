#include "cmfd/scale_space.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmfd/gaussian.h"
#include "synthetic.h"

namespace cmfd {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double AngleDistance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

Raster GrayTexture(int size, std::uint64_t seed) {
  return ToGray(testing::TexturedImage(size, size, seed));
}

Raster GaussianBlobImage(int size, double blob_sigma) {
  Raster img(size, size, 1);
  const double c = 0.5 * (size - 1);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r2 = (x - c) * (x - c) + (y - c) * (y - c);
      img.at(0, y, x) = static_cast<float>(
          0.2 + 0.6 * std::exp(-r2 / (2 * blob_sigma * blob_sigma)));
    }
  }
  return img;
}

TEST(BuildPyramid, OctaveCountAndStructure) {
  EXPECT_EQ(OctaveCount(512, 512), 5);
  EXPECT_EQ(OctaveCount(640, 480), 5);
  EXPECT_EQ(OctaveCount(32, 40), 1);

  const ScaleSpaceConfig config;
  const Pyramid pyr = BuildPyramid(Raster(512, 512, 1, 0.5f), config);
  ASSERT_EQ(pyr.octaves.size(), 5u);
  int expected_side = 512;
  for (const Octave& oct : pyr.octaves) {
    EXPECT_EQ(oct.gaussians.size(), 6u);
    EXPECT_EQ(oct.dogs.size(), 5u);
    EXPECT_EQ(oct.gaussians[0].width(), expected_side);
    expected_side /= 2;
  }
  EXPECT_DOUBLE_EQ(pyr.LevelSigma(2, 1), 0.8 * std::exp2(2 + 1.0 / 3));
}

TEST(BuildPyramid, ConstantImageHasZeroDoG) {
  const Pyramid pyr = BuildPyramid(Raster(64, 64, 1, 0.3f), {});
  for (const Octave& oct : pyr.octaves) {
    for (const Raster& dog : oct.dogs) {
      for (float v : dog.samples()) EXPECT_EQ(v, 0.0f);
    }
  }
}

TEST(BuildPyramid, RejectsSmallOrColorInput) {
  EXPECT_THROW(BuildPyramid(Raster(31, 64, 1), {}), std::invalid_argument);
  EXPECT_THROW(BuildPyramid(Raster(64, 64, 3), {}), std::invalid_argument);
}

// Every DoG level against the difference of two full-resolution blurs of the
// input, subsampled to the octave grid.
TEST(BuildPyramid, DoGMatchesNonPyramidalOracle) {
  const ScaleSpaceConfig config;
  const Raster img = GrayTexture(192, 21);
  const Pyramid pyr = BuildPyramid(img, config);

  Raster shifted = img;
  const float lowest =
      *std::min_element(img.samples().begin(), img.samples().end());
  for (float& v : shifted.samples()) v -= lowest;

  for (const Octave& oct : pyr.octaves) {
    const int stride = static_cast<int>(oct.delta);
    for (int s = 0; s < static_cast<int>(oct.dogs.size()); ++s) {
      auto full_blur = [&](int level) {
        const double total = pyr.LevelSigma(oct.index, level);
        return GaussianBlur(
            shifted, std::sqrt(total * total -
                               config.sigma_in * config.sigma_in));
      };
      const Raster hi = full_blur(s + 1);
      const Raster lo = full_blur(s);
      float worst = 0;
      const Raster& dog = oct.dogs[s];
      for (int y = 0; y < dog.height(); ++y) {
        for (int x = 0; x < dog.width(); ++x) {
          const float expected = hi.at(0, y * stride, x * stride) -
                                 lo.at(0, y * stride, x * stride);
          worst = std::max(worst, std::abs(dog.at(0, y, x) - expected));
        }
      }
      EXPECT_LT(worst, 1e-2) << "octave " << oct.index << " level " << s;
    }
  }
}

TEST(DetectKeypoints, ConstantImageHasNone) {
  const ScaleSpaceConfig config;
  EXPECT_TRUE(
      DetectKeypoints(BuildPyramid(Raster(96, 96, 1, 0.7f), config), config)
          .empty());
}

// Oracle: argmax over sigma of the scale-normalized Laplacian at the blob
// center, computed densely at full resolution.
TEST(DetectKeypoints, SingleBlobScaleMatchesLaplacianOracle) {
  const double blob_sigma = 4.0;
  const int size = 128;
  const Raster img = GaussianBlobImage(size, blob_sigma);
  const int c = size / 2;

  double best_sigma = 0;
  double best_response = -1;
  for (double sigma = 1.0; sigma <= 10.0; sigma += 0.05) {
    const Raster g = GaussianBlur(img, sigma);
    // Center of an even-sized grid sits between pixels; average the four.
    auto lap = [&](int y, int x) {
      return g.at(0, y, x + 1) + g.at(0, y, x - 1) + g.at(0, y + 1, x) +
             g.at(0, y - 1, x) - 4 * g.at(0, y, x);
    };
    const double response =
        -sigma * sigma *
        0.25 * (lap(c - 1, c - 1) + lap(c - 1, c) + lap(c, c - 1) + lap(c, c));
    if (response > best_response) {
      best_response = response;
      best_sigma = sigma;
    }
  }
  EXPECT_NEAR(best_sigma, blob_sigma, 0.5);

  const ScaleSpaceConfig config;
  const auto keypoints = DetectKeypoints(BuildPyramid(img, config), config);
  ASSERT_FALSE(keypoints.empty());
  const double center = 0.5 * (size - 1);
  for (const Keypoint& kp : keypoints) {
    EXPECT_LT(std::hypot(kp.x - center, kp.y - center), 1.5);
    EXPECT_NEAR(kp.sigma, best_sigma, 0.25 * best_sigma);
  }
}

TEST(DetectKeypoints, InvariantsHold) {
  const ScaleSpaceConfig config;
  const Raster img = GrayTexture(160, 3);
  const auto keypoints = DetectKeypoints(BuildPyramid(img, config), config);
  ASSERT_GT(keypoints.size(), 20u);
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const Keypoint& kp = keypoints[i];
    EXPECT_GE(std::abs(kp.response), config.contrast_threshold);
    EXPECT_GE(kp.x, 0);
    EXPECT_LT(kp.x, img.width());
    EXPECT_GE(kp.y, 0);
    EXPECT_LT(kp.y, img.height());
    EXPECT_GT(kp.sigma, 0);
    EXPECT_GE(kp.theta, 0);
    EXPECT_LT(kp.theta, kTwoPi);
    // Single refinement step keeps the level within the refined cell.
    const int s = static_cast<int>(std::lround(kp.level));
    EXPECT_LT(std::abs(kp.level - s), 1.0);
    if (i > 0) EXPECT_FALSE(CanonicalLess(kp, keypoints[i - 1]));
  }
}

TEST(DetectKeypoints, AdditiveOffsetLeavesKeypointsUnchanged) {
  // Samples on a 1/256 grid so that adding 0.25 is exact in float.
  Raster img = GrayTexture(128, 9);
  for (float& v : img.samples()) v = std::floor(v * 192.0f) / 256.0f;
  Raster brighter = img;
  for (float& v : brighter.samples()) v += 0.25f;

  const ScaleSpaceConfig config;
  const auto a = DetectKeypoints(BuildPyramid(img, config), config);
  const auto b = DetectKeypoints(BuildPyramid(brighter, config), config);
  ASSERT_FALSE(a.empty());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
    EXPECT_EQ(a[i].sigma, b[i].sigma);
    EXPECT_EQ(a[i].theta, b[i].theta);
  }
}

// 257 = 2^8 + 1 keeps every octave grid aligned under the exact rotation.
TEST(DetectKeypoints, QuarterTurnRotatesKeypoints) {
  const ScaleSpaceConfig config;
  const Raster img = GrayTexture(257, 17);
  const Raster rotated = testing::Rotate90(img);
  const auto original = DetectKeypoints(BuildPyramid(img, config), config);
  const auto turned = DetectKeypoints(BuildPyramid(rotated, config), config);

  int interior = 0;
  int matched = 0;
  for (const Keypoint& kp : original) {
    if (kp.x < 16 || kp.y < 16 || kp.x > 240 || kp.y > 240) continue;
    ++interior;
    // (x, y) -> (H - 1 - y, x), theta -> theta + pi / 2.
    const double ex = img.height() - 1 - kp.y;
    const double ey = kp.x;
    for (const Keypoint& other : turned) {
      if (other.octave == kp.octave &&
          std::hypot(other.x - ex, other.y - ey) < 0.1 &&
          AngleDistance(other.theta, kp.theta + std::numbers::pi / 2) < 0.1) {
        ++matched;
        break;
      }
    }
  }
  ASSERT_GT(interior, 20);
  EXPECT_GE(matched, 0.95 * interior) << matched << " / " << interior;
}

TEST(DetectKeypoints, OrientationFollowsArbitraryRotation) {
  const ScaleSpaceConfig config;
  const double phi = 0.5;
  const Raster img = GrayTexture(256, 23);
  const double c = 127.5;
  const Raster rotated = testing::RotateBicubic(img, phi, c, c);
  const auto original = DetectKeypoints(BuildPyramid(img, config), config);
  const auto turned = DetectKeypoints(BuildPyramid(rotated, config), config);

  std::vector<double> errors;
  for (const Keypoint& kp : original) {
    const double dx = kp.x - c;
    const double dy = kp.y - c;
    if (std::hypot(dx, dy) > 90) continue;
    const double ex = c + std::cos(phi) * dx - std::sin(phi) * dy;
    const double ey = c + std::sin(phi) * dx + std::cos(phi) * dy;
    double best = -1;
    for (const Keypoint& other : turned) {
      if (std::abs(std::log(other.sigma / kp.sigma)) > 0.2) continue;
      if (std::hypot(other.x - ex, other.y - ey) > 1.0) continue;
      const double err = AngleDistance(other.theta, kp.theta + phi);
      if (best < 0 || err < best) best = err;
    }
    if (best >= 0) errors.push_back(best);
  }
  ASSERT_GT(errors.size(), 40u);
  std::sort(errors.begin(), errors.end());
  EXPECT_LT(errors[errors.size() / 2], 0.1);
  const auto within = std::count_if(errors.begin(), errors.end(),
                                    [](double e) { return e < 0.2; });
  EXPECT_GE(within, 0.75 * errors.size()) << within << " / " << errors.size();
}

TEST(DetectKeypoints, UpsamplingAddsAFinerOctave) {
  ScaleSpaceConfig config;
  config.upsample = true;
  const Raster img = GrayTexture(192, 4);
  const Pyramid pyr = BuildPyramid(img, config);
  EXPECT_EQ(pyr.first_octave, -1);
  EXPECT_EQ(static_cast<int>(pyr.octaves.size()), OctaveCount(192, 192) + 1);
  EXPECT_EQ(pyr.octaves[0].gaussians[0].width(), 384);
  EXPECT_DOUBLE_EQ(pyr.octaves[0].delta, 0.5);
  const auto keypoints = DetectKeypoints(pyr, config);
  bool has_fine = false;
  for (const Keypoint& kp : keypoints) {
    EXPECT_LT(kp.x, 192);
    EXPECT_LT(kp.y, 192);
    if (kp.octave == -1) {
      has_fine = true;
      EXPECT_GE(kp.sigma, config.sigma_min * 0.79);
      EXPECT_LT(kp.sigma, 2 * config.sigma_min * 1.26);
    }
  }
  EXPECT_TRUE(has_fine);
}

}  // namespace
}  // namespace cmfd
