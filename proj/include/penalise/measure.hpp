#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "penalise/estimate.hpp"
#include "penalise/numerics.hpp"
#include "penalise/paths.hpp"
#include "penalise/random.hpp"

namespace penalise {

/// One draw from the tilted measure mu_phi: a last-exit time u, a Brownian
/// bridge of length u, an independent BES(3) tail with a fair sign, and their
/// concatenation observed on [0, horizon].
struct TiltedSample {
  double u = 0.0;
  int sign = 1;
  BridgeSample bridge;  // on [0, u], with its driving Brownian motion
  SamplePath bessel;    // unsigned BES(3) on [0, horizon - u]
  SamplePath tail;      // sign * bessel, i.e. the shifted path s -> X_{u+s}
  SamplePath full;      // bridge followed by tail on [0, horizon]
  double horizon = 0.0;
};

/// P(u > horizon) under the tilted u-law phi(u) u^{-1/2} du / C_phi.
double truncation_mass(const numerics::TiltingConfig& tilt, double horizon);

/// Draws u from phi(u) u^{-1/2} du / C_phi conditioned on u <= horizon. The
/// default weight uses u = Z^2/2; other weights use rejection from that law.
double sample_last_exit(const numerics::TiltingConfig& tilt, double horizon, RandomStream& rng);

/// Samples the full tilted path. `nodes` is the observation grid on
/// [0, horizon] (it must end at the horizon); u is inserted as a node. The
/// tail is observed at t - u for every node t > u and additionally at the
/// optional `tail_times` (tail clock, clipped to the horizon).
TiltedSample sample_tilted(const numerics::TiltingConfig& tilt, double horizon,
                           const TimeGrid& nodes, RandomStream& rng,
                           std::span<const double> tail_times = {});
/// Uniform grid of step dt on [0, horizon].
TiltedSample sample_tilted(const numerics::TiltingConfig& tilt, double horizon, double dt,
                           SeedSpec seed);

using PathFunctional = std::function<double(const TiltedSample&)>;

struct MonteCarloOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;  // chunk c draws from stream stream_base + c
  double horizon = 16.0;
  double dt = 0x1.0p-10;
  TimeGrid nodes;  // overrides the uniform dt grid when non-empty
  std::vector<double> tail_times;
  unsigned workers = 1;

  TimeGrid grid() const;
};

/// E_mu[F] together with the factor turning it into W[F phi(g)].
struct WEstimate {
  Estimate estimate;
  std::uint64_t non_finite = 0;
  double truncation_mass = 0.0;
  double w_scale = 0.0;  // W[phi(g)] = C_phi / sqrt(2 pi)

  double w_value() const { return w_scale * estimate.mean(); }
  double w_stderr() const { return w_scale * estimate.stderr(); }
};

/// Monte Carlo estimate of E_mu[F]. Non-finite values of F are skipped and
/// counted; more than 0.1% of them raises std::runtime_error.
WEstimate w_expectation(const PathFunctional& F, const numerics::TiltingConfig& tilt,
                        const MonteCarloOptions& opts);

struct WGEstimate {
  RatioEstimate ratio;
  double value() const { return ratio.ratio(); }
  double stderr() const { return ratio.stderr(); }
};

/// W^G(A) = W[1_A G] / W[G], estimated from mu_phi draws with importance
/// weight G / phi(u) shared between numerator and denominator. Throws
/// std::runtime_error("weight degenerate") when the denominator is within
/// three standard errors of 0.
WGEstimate wG_probability(const std::function<bool(const TiltedSample&)>& event,
                          const PathFunctional& G, const numerics::TiltingConfig& tilt,
                          const MonteCarloOptions& opts);

/// Lambda_T(X) = |X_T| e^{-g_T} + e^{-T} e^{-sqrt(2) |X_T|} / sqrt(2), where
/// g_T is the last zero before T. T must be a grid node.
double lambda_T(const SamplePath& path, double T);
/// Same with g_T and X_T supplied directly.
double lambda_T(double x_T, double g_T, double T);

/// int_0^inf e^{-(T+u)} e^{-x^2/(2u)} du / sqrt(2 pi u) by quadrature.
double lambda_tail_quadrature(double x, double T);
/// e^{-T} e^{-sqrt(2)|x|} / sqrt(2).
double lambda_tail_closed(double x, double T);

}  // namespace penalise
