#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "penalise/numerics.hpp"

namespace penalise {

/// Finitely supported piecewise-constant function
///   f(t) = sum_k c_k 1_{[t_{k-1}, t_k)}(t),  0 = t_0 < t_1 < ... < t_n.
/// Stored as the right ends t_1..t_n and the levels c_1..c_n; f vanishes on
/// [t_n, inf). The empty function is zero everywhere.
class StepFunction {
 public:
  StepFunction() = default;
  /// Throws std::invalid_argument unless the right ends are finite, positive
  /// and strictly increasing and the sizes agree.
  StepFunction(std::vector<double> right_ends, std::vector<double> levels);

  static StepFunction indicator(double a, double b, double level = 1.0);
  static StepFunction constant(double level, double end) { return indicator(0.0, end, level); }

  std::size_t size() const { return levels_.size(); }
  bool empty() const { return levels_.empty(); }
  std::span<const double> right_ends() const { return right_ends_; }
  std::span<const double> levels() const { return levels_; }
  double left_end(std::size_t k) const { return k == 0 ? 0.0 : right_ends_[k - 1]; }
  double support_end() const { return empty() ? 0.0 : right_ends_.back(); }

  double operator()(double t) const;

  double integral() const;                 // int f ds
  double l2_norm_squared() const;          // int f^2 ds
  double sup_norm() const;
  double sqrt_weighted_integral() const;   // int f(s) ds / sqrt(s), exact
  /// int_0^t |f(s)|^2 ds, exact.
  double energy_until(double t) const;

  /// Merges equal neighbouring levels and drops the trailing zero cells.
  StepFunction normalized() const;

  numerics::Integrand1D as_integrand() const;

  StepFunction operator-() const;
  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b);
  friend StepFunction operator*(double c, const StepFunction& f);

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

  /// JSON array of [right_end, level] pairs, e.g. [[1.0, 1.0]] for 1_{[0,1)}.
  std::string to_json() const;
  /// Throws std::invalid_argument with the parser's byte position on
  /// malformed input.
  static StepFunction from_json(const std::string& text);

 private:
  std::vector<double> right_ends_;
  std::vector<double> levels_;
};

/// Dyadic conditional averages of f on cells of width 2^-level over
/// [0, 2^level), clipped to the support hint of f. Throws
/// std::invalid_argument("not approximable") unless f has finite L2 and
/// L1(ds/(1+sqrt s)) norms.
StepFunction approximate(const numerics::Integrand1D& f, int level);

/// (pi_u f)(s) = f(s) - (1/u) int_0^u f, restricted to [0, u).
StepFunction project_bridge(const StepFunction& f, double u);

/// s -> f(s + u).
StepFunction shift(const StepFunction& f, double u);

/// f 1_{[0, t)}; t becomes a right end when it falls inside the support.
StepFunction truncate(const StepFunction& f, double t);

/// M(t) = t + int_0^t |f|^2 ds.
double time_change_M(const StepFunction& f, double t);

/// Inverse of M. Throws std::invalid_argument unless 0 <= v <= M(horizon).
double time_change_L(const StepFunction& f, double v,
                     double horizon = std::numeric_limits<double>::infinity());

}  // namespace penalise
