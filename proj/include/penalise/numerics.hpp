#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace penalise::numerics {

/// Half-open interval [lo, hi) in time units.
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

/// A real function of one variable, together with optional hints that let
/// the quadrature split at discontinuities and stop at the end of the support.
struct Integrand1D {
  std::function<double(double)> eval;
  std::optional<Interval> support;
  std::vector<double> breaks;  // points of discontinuity, any order

  double operator()(double x) const { return eval(x); }

  /// Upper end of the support hint, or +inf.
  double support_end() const;
};

/// Integral value that may be flagged as divergent.
struct NormValue {
  double value = 0.0;
  bool infinite = false;

  bool finite() const { return !infinite; }
  static NormValue divergent() { return {std::numeric_limits<double>::infinity(), true}; }
};

/// Integrates g over (a, b). Flagged endpoints may carry an inverse square
/// root blow-up; the integrand is then transformed so that quadrature nodes
/// never land on them:
///   both ends   u = a + (b-a) sin^2(theta)
///   left only   u = a + (b-a) t^2
///   right only  u = b - (b-a) t^2
/// Throws std::invalid_argument if a >= b and std::domain_error if g is not
/// finite at a node.
double integrate_singular(const Integrand1D& g, double a, double b,
                          bool singular_left, bool singular_right);

/// Integral of g over (0, inf). [0,1] is integrated with the left flag set to
/// `singular_at_zero`; the rest is summed over dyadic blocks [2^k, 2^(k+1)).
/// Summation stops once a block is negligible (1e-12 relative) or once the
/// blocks decay geometrically and the geometric tail bound is negligible.
/// Otherwise the blocks are followed out to 2^1000 and classified by their
/// algebraic decay rate in k: exponents below 1.5 are reported as divergent,
/// larger ones receive an extrapolated tail.
NormValue integrate_half_line(const Integrand1D& g, bool singular_at_zero);

/// Tilting weight phi with its normalising constant C_phi = int phi(u) u^{-1/2} du.
struct TiltingConfig {
  Integrand1D phi;
  double c_phi = 0.0;
  double phi_at_zero = 0.0;  // phi(0+)
  // Bound M with phi(u) <= M e^{-u}; used by the rejection sampler.
  double envelope = 1.0;
  bool exponential = false;  // phi(u) = e^{-u}; sampled without rejection

  /// The default weight phi(u) = e^{-u}, for which C_phi = sqrt(pi).
  static TiltingConfig exponential_weight();

  /// A user-supplied weight. Checks non-negativity, monotonicity and the
  /// envelope bound on a probe grid and computes C_phi by quadrature.
  /// Throws std::invalid_argument when phi is inadmissible.
  static TiltingConfig custom(std::function<double(double)> phi, double envelope);
};

/// int_0^s phi(u) du / sqrt(u (s-u)).
double arcsine_kernel(const Integrand1D& phi, double s);

/// sqrt(t) * arcsine_kernel(phi, t); tends to C_phi as t -> inf for
/// non-increasing phi.
double limit_ratio(const Integrand1D& phi, double t);

struct IntegrandProfile {
  NormValue l2_norm;            // (int f^2 ds)^{1/2}
  NormValue l1_sqrt_norm;       // int |f| ds / sqrt(s)
  NormValue l1_one_plus_sqrt_norm;  // int |f| ds / (1 + sqrt(s))
  NormValue phi_norm;           // ||f||_phi
};

/// ||f||_phi = int_0^inf |f(s)| arcsine_kernel(phi, s) ds.
NormValue phi_norm(const Integrand1D& f, const TiltingConfig& tilt);

/// int_0^inf |f(s+u)| ds / sqrt(s).
NormValue tail_weight(const Integrand1D& f, double u);

IntegrandProfile profile_integrand(const Integrand1D& f, const TiltingConfig& tilt);

/// L2 norm and L1(ds/(1+sqrt s)) norm only; the admissibility test used
/// before step-function approximation.
IntegrandProfile admissibility_profile(const Integrand1D& f);

}  // namespace penalise::numerics
