#include "cmfd/acontrario.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cmfd/errors.h"

namespace cmfd {
namespace {

void CheckDof(int dof) {
  if (dof != 1 && dof != 2) {
    throw std::invalid_argument("chi2: only 1 or 2 degrees of freedom");
  }
}

// Giles' single-precision erfinv, evaluated from both tails of x so that
// w = -log(1 - x^2) keeps its precision when x is close to 1. `one_minus_x`
// must equal 1 - x.
double ErfInvFromTails(double x, double one_minus_x) {
  double w = -std::log(one_minus_x * (1.0 + x));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * x;
}

}  // namespace

double ErfInvApprox(double x) {
  if (x <= -1.0 || x >= 1.0) {
    throw std::invalid_argument("erfinv: argument outside (-1, 1)");
  }
  return ErfInvFromTails(x, 1.0 - x);
}

Probability Chi2Cdf(double x, int dof) {
  CheckDof(dof);
  if (!(x >= 0)) throw std::invalid_argument("chi2: negative argument");
  if (dof == 1) {
    const double z = std::sqrt(0.5 * x);
    return Probability::FromTails(std::erf(z), std::erfc(z));
  }
  return Probability::FromTails(-std::expm1(-0.5 * x), std::exp(-0.5 * x));
}

double Chi2Pdf(double x, int dof) {
  CheckDof(dof);
  if (x < 0) return 0.0;
  if (dof == 1) {
    if (x == 0) return std::numeric_limits<double>::infinity();
    return std::exp(-0.5 * x) / std::sqrt(2.0 * std::numbers::pi * x);
  }
  return 0.5 * std::exp(-0.5 * x);
}

double Chi2Inv(Probability prob, int dof) {
  CheckDof(dof);
  const double p = prob.value();
  const double q = prob.complement();
  if (!(p >= 0)) throw std::invalid_argument("chi2inv: negative probability");
  if (!(q > 0)) {
    throw std::invalid_argument("chi2inv: probability must be below 1");
  }
  if (p == 0) return 0.0;

  const bool upper = p > 0.5;
  if (dof == 2) return upper ? -2.0 * std::log(q) : -2.0 * std::log1p(-p);

  // Starting point from the erfinv approximation, then Newton steps
  // safeguarded by a bisection bracket.
  const double z = ErfInvFromTails(p, q);
  double x = 2.0 * z * z;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    const Probability c = Chi2Cdf(x, 1);
    const double f = upper ? q - c.complement() : c.value() - p;
    if (f == 0) return x;
    if (f < 0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - f / Chi2Pdf(x, 1);
    if (!(next > lo && next < hi)) {
      next = std::isinf(hi) ? 2.0 * x + 1.0 : 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * x) {
      return next;
    }
    x = next;
  }
  return x;
}

int TestExponent(ThresholdMode mode, int n, int channels) {
  const int cells = n * n * channels;
  return mode == ThresholdMode::kPerScalar ? 2 * cells : cells;
}

int DegreesOfFreedom(ThresholdMode mode) {
  return mode == ThresholdMode::kPerCellChi2 ? 2 : 1;
}

void AContrarioParams::Validate() const {
  if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (!(n_tests >= 1)) throw ConfigError("n_tests must be at least 1");
  if (exponent < 1) throw ConfigError("exponent must be at least 1");
  if (!(epsilon / n_tests < 1)) {
    throw ConfigError("epsilon / n_tests must be below 1 (got " +
                      std::to_string(epsilon / n_tests) + ")");
  }
}

Threshold ComputeThreshold(const AContrarioParams& params) {
  params.Validate();
  const double log_p = std::log(params.epsilon / params.n_tests) /
                       static_cast<double>(params.exponent);
  const Probability per_element =
      Probability::FromTails(std::exp(log_p), -std::expm1(log_p));
  Threshold t;
  t.params = params;
  t.tau = 2.0 * params.sigma * params.sigma *
          Chi2Inv(per_element, DegreesOfFreedom(params.mode));
  return t;
}

double PredictedFalseMatchProbability(const Threshold& threshold) {
  const double s2 = threshold.params.sigma * threshold.params.sigma;
  const double per_element =
      Chi2Cdf(threshold.tau / (2.0 * s2),
              DegreesOfFreedom(threshold.params.mode))
          .value();
  return std::pow(per_element, threshold.params.exponent);
}

double PairTestBudget(double images_budget, long long keypoints,
                      bool count_flip_tests) {
  const double k = static_cast<double>(keypoints);
  const double pairs = std::max(1.0, 0.5 * k * (k - 1.0));
  return images_budget * pairs * (count_flip_tests ? 2.0 : 1.0);
}

}  // namespace cmfd
