#pragma once

#include <vector>

#include "penalise/estimate.hpp"
#include "penalise/measure.hpp"
#include "penalise/paths.hpp"
#include "penalise/step_function.hpp"

namespace penalise {

struct IntegralValue {
  double value = 0.0;
  double grid_dt = 0.0;  // step of the path grid, 0 for explicit grids
  bool aligned = true;   // every right end of f was a grid node
};

/// sum_k c_k (X_{t_k} - X_{t_{k-1}}), reading the path linearly between
/// nodes. Throws std::invalid_argument if f extends beyond the path.
IntegralValue stieltjes(const StepFunction& f, const SamplePath& path);

/// sum_k |c_k| (|X_{t_k}| + |X_{t_{k-1}}|); the size against which rounding
/// residuals of stieltjes are measured.
double stieltjes_scale(const StepFunction& f, const SamplePath& path);

struct BridgeIntegral {
  IntegralValue value;            // int_0^u f dX on the bridge
  bool identity_checked = false;  // false when no driver is attached
  double via_driver = 0.0;        // int_0^u (pi_u f) dB
  double residual = 0.0;          // |value - via_driver| / (1 + scale)
};

/// Integral of f over [0, u) against the bridge and, when the driving
/// Brownian motion is present, the same integral of pi_u f against it.
/// Throws std::logic_error if the two differ by more than 1e-10.
BridgeIntegral bridge_integral(const StepFunction& f, double u, const BridgeSample& bridge);

/// int f dX - sqrt(2/pi) int f(s) ds / sqrt(s) on a BES(3) path from 0.
IntegralValue bessel_integral_centered(const StepFunction& f, const SamplePath& bessel);

struct Decomposition {
  IntegralValue whole;  // int f dX on the full path
  IntegralValue j1;     // int_0^u f dX on the bridge
  IntegralValue j2;     // int f(s+u) d(theta_u X)_s on the tail
  double scale = 0.0;   // stieltjes_scale of f on the full path
};

Decomposition decompose_integral(const StepFunction& f, const TiltedSample& s);

/// I_t = j1 + j2 of f 1_{[0,t)} for each t of t_grid.
std::vector<IntegralValue> partial_integrals(const StepFunction& f, const TiltedSample& s,
                                             const TimeGrid& t_grid);

/// int f(s+u) d hat(X)_s on the unsigned BES(3) tail, centered by its mean.
double centered_tail_integral(const StepFunction& f, const TiltedSample& s);

struct HolderMoment {
  Estimate fourth;          // |J3(f_{L(v2)}) - J3(f_{L(v1)})|^4 under mu
  double t1 = 0.0;          // L(v1)
  double t2 = 0.0;          // L(v2)
  double energy = 0.0;      // int_{t1}^{t2} f^2 ds
  double bound_time = 0.0;  // 3 (v2 - v1)^2
  double bound_energy_squared = 0.0;  // 3 energy^2
  double bound_energy = 0.0;          // 3 energy
  double bound_max = 0.0;             // 3 max(energy, energy^2)
};

/// Fourth moment of the centered tail-integral increment between the
/// time-changed instants L(v1) and L(v2). Requires 0 <= v1 <= v2.
HolderMoment holder_increment_moment(const StepFunction& f, const numerics::TiltingConfig& tilt,
                                     double v1, double v2, const MonteCarloOptions& opts);

}  // namespace penalise
