#pragma once

#include <cstddef>
#include <cstdint>

namespace penalise {

/// Mergeable one-pass accumulator of the mean and the second to fourth
/// central moment sums (Welford update, Chan/Pebay merge).
class Estimate {
 public:
  void add(double x);
  void merge(const Estimate& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }  // sum of squared deviations
  double m3() const { return m3_; }
  double m4() const { return m4_; }

  double variance() const;            // m2 / (n - 1)
  double stderr() const;              // sqrt(m2 / (n (n - 1)))
  double excess_kurtosis() const;     // n m4 / m2^2 - 3
  /// Standard error of the sample excess kurtosis under a Gaussian law.
  double kurtosis_stderr() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

/// Mergeable accumulator for a ratio of means mean(a)/mean(b) over shared
/// draws, with a delta-method standard error.
class RatioEstimate {
 public:
  void add(double a, double b);
  void merge(const RatioEstimate& other);

  std::uint64_t count() const { return n_; }
  double numerator_mean() const { return mean_a_; }
  double denominator_mean() const { return mean_b_; }
  double denominator_stderr() const;
  double ratio() const { return mean_a_ / mean_b_; }
  double stderr() const;

 private:
  std::uint64_t n_ = 0;
  double mean_a_ = 0.0;
  double mean_b_ = 0.0;
  double c_aa_ = 0.0;
  double c_bb_ = 0.0;
  double c_ab_ = 0.0;
};

}  // namespace penalise
