#include "penalise/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace penalise::numerics {

namespace {

constexpr int kOrder = 20;
constexpr double kRelTol = 1e-12;
constexpr std::size_t kMaxPanels = 20000;

struct GaussRule {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_rule() {
  GaussRule rule;
  const int n = kOrder;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

template <class F>
double gauss(const F& f, double lo, double hi) {
  const auto& rule = gauss_rule();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (int i = 0; i < kOrder; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

struct Panel {
  double lo;
  double hi;
  double left;   // rule on [lo, mid]
  double right;  // rule on [mid, hi]
  double error;

  double value() const { return left + right; }
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel make_panel(const F& f, double lo, double hi, double whole) {
  const double mid = 0.5 * (lo + hi);
  const double left = gauss(f, lo, mid);
  const double right = gauss(f, mid, hi);
  return {lo, hi, left, right, std::abs(whole - (left + right))};
}

// Globally adaptive composite Gauss-Legendre over the given initial cuts.
template <class F>
double adaptive_gauss(const F& f, const std::vector<double>& cuts) {
  std::priority_queue<Panel> queue;
  double total = 0.0;
  double error = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    Panel p = make_panel(f, cuts[i], cuts[i + 1], gauss(f, cuts[i], cuts[i + 1]));
    total += p.value();
    error += p.error;
    magnitude += std::abs(p.left) + std::abs(p.right);
    queue.push(p);
  }
  while (!queue.empty() && queue.size() < kMaxPanels &&
         error > std::max(kRelTol * std::abs(total), 1e-15 * magnitude)) {
    const Panel worst = queue.top();
    if (worst.error == 0.0) break;
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // interval exhausted
    Panel a = make_panel(f, worst.lo, mid, worst.left);
    Panel b = make_panel(f, mid, worst.hi, worst.right);
    total += a.value() + b.value() - worst.value();
    error += a.error + b.error - worst.error;
    magnitude += std::abs(a.left) + std::abs(a.right) + std::abs(b.left) + std::abs(b.right) -
                 std::abs(worst.left) - std::abs(worst.right);
    queue.push(a);
    queue.push(b);
  }
  // Re-sum to shed the drift accumulated by incremental updates.
  double sum = 0.0;
  while (!queue.empty()) {
    sum += queue.top().value();
    queue.pop();
  }
  return sum;
}

double local_exponent_fit(const std::vector<double>& blocks, std::size_t count) {
  // Least-squares slope of ln|b_k| against ln(k + 1) over the last `count` blocks.
  const std::size_t n = blocks.size();
  const std::size_t first = n - count;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t k = first; k < n; ++k) {
    if (blocks[k] <= 0.0) continue;
    const double x = std::log(static_cast<double>(k + 1));
    const double y = std::log(blocks[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::infinity();
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return -slope;
}

}  // namespace

double Integrand1D::support_end() const {
  return support ? support->hi : std::numeric_limits<double>::infinity();
}

double integrate_singular(const Integrand1D& g, double a, double b,
                          bool singular_left, bool singular_right) {
  if (!(a < b)) throw std::invalid_argument("integrate_singular: requires a < b");
  const double width = b - a;

  auto checked = [&](double u, double jacobian) {
    if (jacobian == 0.0) return 0.0;
    // Rounding can push a node onto a flagged endpoint; the transformed
    // integrand is bounded there, so the lost contribution is O(eps).
    if ((singular_left && u <= a) || (singular_right && u >= b)) return 0.0;
    const double v = g(u);
    if (!std::isfinite(v)) throw std::domain_error("integrand not finite");
    return v * jacobian;
  };

  std::vector<double> cuts;
  std::vector<double> interior;
  for (double x : g.breaks)
    if (x > a && x < b) interior.push_back(x);
  std::sort(interior.begin(), interior.end());

  if (singular_left && singular_right) {
    auto f = [&](double theta) {
      const double s = std::sin(theta);
      return checked(a + width * s * s, width * std::sin(2.0 * theta));
    };
    cuts.push_back(0.0);
    for (double x : interior) cuts.push_back(std::asin(std::sqrt((x - a) / width)));
    cuts.push_back(0.5 * std::numbers::pi);
    return adaptive_gauss(f, cuts);
  }
  if (singular_left) {
    auto f = [&](double t) { return checked(a + width * t * t, 2.0 * width * t); };
    cuts.push_back(0.0);
    for (double x : interior) cuts.push_back(std::sqrt((x - a) / width));
    cuts.push_back(1.0);
    return adaptive_gauss(f, cuts);
  }
  if (singular_right) {
    // t runs from 0 at b to 1 at a; orientation is absorbed in the sign.
    auto f = [&](double t) { return checked(b - width * t * t, 2.0 * width * t); };
    cuts.push_back(0.0);
    for (auto it = interior.rbegin(); it != interior.rend(); ++it)
      cuts.push_back(std::sqrt((b - *it) / width));
    cuts.push_back(1.0);
    return adaptive_gauss(f, cuts);
  }
  auto f = [&](double u) { return checked(u, 1.0); };
  cuts.push_back(a);
  for (double x : interior) cuts.push_back(x);
  cuts.push_back(b);
  return adaptive_gauss(f, cuts);
}

NormValue integrate_half_line(const Integrand1D& g, bool singular_at_zero) {
  constexpr int kMaxBlocks = 1000;
  constexpr double kNegligible = 1e-12;
  constexpr double kGeometricRatio = 0.93;
  constexpr int kRun = 8;

  const double end = g.support_end();
  double last_break = 0.0;
  for (double x : g.breaks)
    if (std::isfinite(x)) last_break = std::max(last_break, x);

  double total = integrate_singular(g, 0.0, std::min(1.0, end), singular_at_zero, false);
  if (end <= 1.0) return {total, false};

  std::vector<double> blocks;
  int negligible_run = 0;
  for (int k = 0; k < kMaxBlocks; ++k) {
    const double lo = std::ldexp(1.0, k);
    const double hi = std::min(std::ldexp(1.0, k + 1), end);
    const double block = integrate_singular(g, lo, hi, false, false);
    total += block;
    blocks.push_back(std::abs(block));
    if (hi >= end) return {total, false};
    if (lo < last_break) continue;

    if (std::abs(block) <= kNegligible * std::abs(total)) {
      if (++negligible_run >= 2) return {total, false};
    } else {
      negligible_run = 0;
    }

    if (blocks.size() > kRun) {
      const std::size_t n = blocks.size();
      bool geometric = true;
      bool growing = true;
      double worst_ratio = 0.0;
      for (std::size_t i = n - kRun; i < n; ++i) {
        if (blocks[i - 1] == 0.0) {
          geometric = growing = false;
          break;
        }
        const double r = blocks[i] / blocks[i - 1];
        worst_ratio = std::max(worst_ratio, r);
        geometric = geometric && r < kGeometricRatio;
        growing = growing && r >= 1.0;
      }
      if (geometric) {
        const double r = blocks[n - 1] / blocks[n - 2];
        const double tail = blocks[n - 1] * worst_ratio / (1.0 - worst_ratio);
        if (tail <= kNegligible * std::abs(total)) {
          return {total + std::copysign(blocks[n - 1] * r / (1.0 - r), block), false};
        }
      }
      if (growing) return NormValue::divergent();
    }
  }

  // Slow algebraic decay in the block index: b_k ~ A k^{-p}.
  const double p = local_exponent_fit(blocks, 64);
  if (!(p >= 1.5)) return NormValue::divergent();
  const double k_last = static_cast<double>(blocks.size());
  const double b_last = blocks.back();
  if (!std::isfinite(p) || b_last == 0.0) return {total, false};
  const double tail =
      b_last * std::pow(k_last, p) * std::pow(k_last + 0.5, 1.0 - p) / (p - 1.0);
  return {total + std::copysign(tail, total), false};
}

TiltingConfig TiltingConfig::exponential_weight() {
  TiltingConfig cfg;
  cfg.phi.eval = [](double u) { return std::exp(-u); };
  cfg.c_phi = std::sqrt(std::numbers::pi);
  cfg.phi_at_zero = 1.0;
  cfg.envelope = 1.0;
  cfg.exponential = true;
  return cfg;
}

TiltingConfig TiltingConfig::custom(std::function<double(double)> phi, double envelope) {
  if (!phi) throw std::invalid_argument("tilt: phi is empty");
  if (!(envelope > 0.0) || !std::isfinite(envelope))
    throw std::invalid_argument("tilt: envelope bound must be positive and finite");
  TiltingConfig cfg;
  cfg.phi.eval = phi;
  cfg.envelope = envelope;
  cfg.phi_at_zero = phi(1e-300);
  if (!std::isfinite(cfg.phi_at_zero) || cfg.phi_at_zero < 0.0)
    throw std::invalid_argument("tilt: phi(0+) must be finite");

  double previous = cfg.phi_at_zero;
  for (int j = -160; j <= 40; ++j) {
    const double u = std::exp2(j / 4.0);
    const double v = phi(u);
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("tilt: phi must be non-negative");
    if (v > previous * (1.0 + 1e-12)) throw std::invalid_argument("tilt: phi must be non-increasing");
    if (v > envelope * std::exp(-u) * (1.0 + 1e-12))
      throw std::invalid_argument("tilt: phi exceeds the envelope M e^{-u}");
    previous = v;
  }

  Integrand1D weighted{[phi](double u) { return phi(u) / std::sqrt(u); }, std::nullopt, {}};
  const NormValue c = integrate_half_line(weighted, true);
  if (c.infinite || !(c.value > 0.0)) throw std::invalid_argument("tilt: C_phi must be finite and positive");
  cfg.c_phi = c.value;
  return cfg;
}

double arcsine_kernel(const Integrand1D& phi, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("arcsine_kernel: requires s > 0");
  Integrand1D g{[&phi, s](double u) { return phi(u) / std::sqrt(u * (s - u)); },
                std::nullopt, phi.breaks};

  if (s <= 2.0) return integrate_singular(g, 0.0, s, true, true);

  // The mass of a non-increasing phi sits near u = 0: sum dyadic pieces of
  // (0, s/2] outward and stop once phi(U) * pi bounds the remainder.
  const double half = 0.5 * s;
  double sum = integrate_singular(g, 0.0, 1.0, true, false);
  double lo = 1.0;
  while (lo < half) {
    if (phi(lo) * std::numbers::pi <= 1e-15 * sum) return sum;
    const double hi = std::min(2.0 * lo, half);
    sum += integrate_singular(g, lo, hi, false, false);
    lo = hi;
  }
  if (phi(half) * std::numbers::pi <= 1e-15 * sum) return sum;
  return sum + integrate_singular(g, half, s, false, true);
}

double limit_ratio(const Integrand1D& phi, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("limit_ratio: requires t > 0");
  return std::sqrt(t) * arcsine_kernel(phi, t);
}

namespace {

Integrand1D weighted(const Integrand1D& f, std::function<double(double, double)> combine) {
  return {[&f, combine](double s) { return combine(f(s), s); }, f.support, f.breaks};
}

}  // namespace

NormValue phi_norm(const Integrand1D& f, const TiltingConfig& tilt) {
  const Integrand1D& phi = tilt.phi;
  // For phi <= M e^{-u}, |sqrt(s) K(s) - C_phi| <= M Gamma(3/2) / s, so past
  // 2^40 the asymptote is exact to working precision.
  const double far = std::ldexp(1.0, 40);
  const double c_phi = tilt.c_phi;
  auto g = weighted(f, [&phi, far, c_phi](double v, double s) {
    if (v == 0.0) return 0.0;
    return std::abs(v) * (s >= far ? c_phi / std::sqrt(s) : arcsine_kernel(phi, s));
  });
  return integrate_half_line(g, true);
}

NormValue tail_weight(const Integrand1D& f, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("tail_weight: requires u >= 0");
  Integrand1D g;
  g.eval = [&f, u](double s) { return std::abs(f(s + u)) / std::sqrt(s); };
  if (f.support) g.support = Interval{0.0, std::max(f.support->hi - u, 0.0)};
  for (double b : f.breaks)
    if (b > u) g.breaks.push_back(b - u);
  if (g.support && g.support->hi <= 0.0) return {0.0, false};
  return integrate_half_line(g, true);
}

IntegrandProfile admissibility_profile(const Integrand1D& f) {
  IntegrandProfile p;
  NormValue sq = integrate_half_line(weighted(f, [](double v, double) { return v * v; }), true);
  p.l2_norm = sq.infinite ? sq : NormValue{std::sqrt(sq.value), false};
  p.l1_one_plus_sqrt_norm = integrate_half_line(
      weighted(f, [](double v, double s) { return std::abs(v) / (1.0 + std::sqrt(s)); }), true);
  return p;
}

IntegrandProfile profile_integrand(const Integrand1D& f, const TiltingConfig& tilt) {
  IntegrandProfile p = admissibility_profile(f);
  p.l1_sqrt_norm = integrate_half_line(
      weighted(f, [](double v, double s) { return std::abs(v) / std::sqrt(s); }), true);
  p.phi_norm = phi_norm(f, tilt);
  return p;
}

}  // namespace penalise::numerics
