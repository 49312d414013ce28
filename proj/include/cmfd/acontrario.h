#pragma once

namespace cmfd {

// A probability carried together with its complement, so that quantiles of
// values within a few ulps of 1 stay accurate.
class Probability {
 public:
  // Lower-tail value p; the complement is computed as 1 - p.
  Probability(double p) : p_(p), q_(1.0 - p) {}  // NOLINT: implicit by intent

  static Probability FromTails(double p, double q) { return {p, q}; }
  static Probability FromComplement(double q) { return {1.0 - q, q}; }

  double value() const { return p_; }
  double complement() const { return q_; }
  operator double() const { return p_; }  // NOLINT

 private:
  Probability(double p, double q) : p_(p), q_(q) {}
  double p_;
  double q_;
};

// Chi-squared CDF for 1 or 2 degrees of freedom. Throws
// std::invalid_argument for x < 0 or other dof.
Probability Chi2Cdf(double x, int dof);

double Chi2Pdf(double x, int dof);

// Quantile of the chi-squared law: the x with Chi2Cdf(x, dof) == p.
// Requires 0 <= p and a positive complement; throws std::invalid_argument
// otherwise.
double Chi2Inv(Probability p, int dof);

// Inverse error function, polynomial approximation (about 1e-7 relative).
// Used as the starting point for quantile refinement.
double ErfInvApprox(double x);

enum class ThresholdMode {
  // One test per descriptor cell (the cell's squared 2-vector difference).
  kPerCell,
  // One test per scalar component.
  kPerScalar,
  // One test per cell, with the cell's squared 2-vector difference
  // modeled as chi-squared with 2 degrees of freedom.
  kPerCellChi2,
};

// Number of independent per-element tests E for a descriptor geometry.
int TestExponent(ThresholdMode mode, int n, int channels);

// Degrees of freedom of the per-element chi-squared law.
int DegreesOfFreedom(ThresholdMode mode);

struct AContrarioParams {
  // Noise standard deviation on the [0,1] intensity scale.
  double sigma = 1.0 / 255.0;
  // Expected number of false alarms over n_tests tests.
  double epsilon = 1.0;
  double n_tests = 1.0;
  int exponent = 48;
  ThresholdMode mode = ThresholdMode::kPerCell;

  // Throws ConfigError naming the first violated constraint.
  void Validate() const;
};

struct Threshold {
  // Squared-difference bound on the [0,1] intensity scale.
  double tau = 0;
  AContrarioParams params;
};

// tau = 2 sigma^2 * chi2inv((epsilon / n_tests)^(1/E), dof).
Threshold ComputeThreshold(const AContrarioParams& params);

// Per-pair probability that two descriptors differing only by the noise
// model pass the test: chi2cdf(tau / (2 sigma^2), dof)^E.
double PredictedFalseMatchProbability(const Threshold& threshold);

// Pair tests for one image: images_budget * K(K-1)/2, doubled when flipped
// comparisons are counted. At least one pair is budgeted.
double PairTestBudget(double images_budget, long long keypoints,
                      bool count_flip_tests);

}  // namespace cmfd
