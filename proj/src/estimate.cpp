#include "penalise/estimate.hpp"

#include <cmath>
#include <limits>

namespace penalise {

void Estimate::add(double x) {
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
  m2_ += term1;
}

void Estimate::merge(const Estimate& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  const double d2 = delta * delta;
  const double d3 = d2 * delta;
  const double d4 = d2 * d2;

  const double m2 = m2_ + other.m2_ + d2 * na * nb / n;
  const double m3 = m3_ + other.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                    3.0 * delta * (na * other.m2_ - nb * m2_) / n;
  const double m4 = m4_ + other.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6.0 * d2 * (na * na * other.m2_ + nb * nb * m2_) / (n * n) +
                    4.0 * delta * (na * other.m3_ - nb * m3_) / n;
  mean_ += delta * nb / n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  n_ += other.n_;
}

double Estimate::variance() const {
  if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
  return m2_ / static_cast<double>(n_ - 1);
}

double Estimate::stderr() const {
  if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(n_);
  return std::sqrt(m2_ / (n * (n - 1.0)));
}

double Estimate::excess_kurtosis() const {
  if (n_ < 2 || m2_ == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(n_) * m4_ / (m2_ * m2_) - 3.0;
}

double Estimate::kurtosis_stderr() const {
  if (n_ < 4) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(n_);
  return std::sqrt(24.0 * n * (n - 1.0) * (n - 1.0) / ((n - 3.0) * (n - 2.0) * (n + 3.0) * (n + 5.0)));
}

void RatioEstimate::add(double a, double b) {
  ++n_;
  const double n = static_cast<double>(n_);
  const double da = a - mean_a_;
  const double db = b - mean_b_;
  mean_a_ += da / n;
  mean_b_ += db / n;
  c_aa_ += da * (a - mean_a_);
  c_bb_ += db * (b - mean_b_);
  c_ab_ += da * (b - mean_b_);
}

void RatioEstimate::merge(const RatioEstimate& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double da = other.mean_a_ - mean_a_;
  const double db = other.mean_b_ - mean_b_;
  c_aa_ += other.c_aa_ + da * da * na * nb / n;
  c_bb_ += other.c_bb_ + db * db * na * nb / n;
  c_ab_ += other.c_ab_ + da * db * na * nb / n;
  mean_a_ += da * nb / n;
  mean_b_ += db * nb / n;
  n_ += other.n_;
}

double RatioEstimate::denominator_stderr() const {
  if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(n_);
  return std::sqrt(c_bb_ / (n * (n - 1.0)));
}

double RatioEstimate::stderr() const {
  if (n_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(n_);
  const double r = ratio();
  const double s = (c_aa_ - 2.0 * r * c_ab_ + r * r * c_bb_) / (n * (n - 1.0));
  return std::sqrt(std::max(s, 0.0)) / std::abs(mean_b_);
}

}  // namespace penalise
