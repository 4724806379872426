#include "penalise/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace penalise {

StepFunction::StepFunction(std::vector<double> right_ends, std::vector<double> levels)
    : right_ends_(std::move(right_ends)), levels_(std::move(levels)) {
  if (right_ends_.size() != levels_.size())
    throw std::invalid_argument("StepFunction: breakpoints and levels differ in length");
  double previous = 0.0;
  for (double t : right_ends_) {
    if (!std::isfinite(t) || !(t > previous))
      throw std::invalid_argument("StepFunction: breakpoints must be finite and strictly increasing from 0");
    previous = t;
  }
  for (double c : levels_)
    if (!std::isfinite(c)) throw std::invalid_argument("StepFunction: levels must be finite");
}

StepFunction StepFunction::indicator(double a, double b, double level) {
  if (!(a >= 0.0) || !(b > a)) throw std::invalid_argument("indicator: requires 0 <= a < b");
  if (a == 0.0) return StepFunction({b}, {level});
  return StepFunction({a, b}, {0.0, level});
}

double StepFunction::operator()(double t) const {
  if (t < 0.0) return 0.0;
  const auto it = std::upper_bound(right_ends_.begin(), right_ends_.end(), t);
  if (it == right_ends_.end()) return 0.0;
  return levels_[static_cast<std::size_t>(it - right_ends_.begin())];
}

double StepFunction::integral() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < size(); ++k) sum += levels_[k] * (right_ends_[k] - left_end(k));
  return sum;
}

double StepFunction::l2_norm_squared() const { return energy_until(support_end()); }

double StepFunction::sup_norm() const {
  double m = 0.0;
  for (double c : levels_) m = std::max(m, std::abs(c));
  return m;
}

double StepFunction::sqrt_weighted_integral() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    sum += levels_[k] * 2.0 * (std::sqrt(right_ends_[k]) - std::sqrt(left_end(k)));
  return sum;
}

double StepFunction::energy_until(double t) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const double lo = left_end(k);
    if (lo >= t) break;
    const double hi = std::min(right_ends_[k], t);
    sum += levels_[k] * levels_[k] * (hi - lo);
  }
  return sum;
}

StepFunction StepFunction::normalized() const {
  std::vector<double> ends;
  std::vector<double> lv;
  for (std::size_t k = 0; k < size(); ++k) {
    if (!lv.empty() && lv.back() == levels_[k]) {
      ends.back() = right_ends_[k];
    } else {
      ends.push_back(right_ends_[k]);
      lv.push_back(levels_[k]);
    }
  }
  while (!lv.empty() && lv.back() == 0.0) {
    lv.pop_back();
    ends.pop_back();
  }
  return StepFunction(std::move(ends), std::move(lv));
}

numerics::Integrand1D StepFunction::as_integrand() const {
  numerics::Integrand1D g;
  g.eval = [f = *this](double t) { return f(t); };
  g.support = numerics::Interval{0.0, support_end()};
  g.breaks = right_ends_;
  return g;
}

StepFunction StepFunction::operator-() const { return -1.0 * *this; }

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  std::vector<double> ends;
  std::merge(a.right_ends_.begin(), a.right_ends_.end(), b.right_ends_.begin(),
             b.right_ends_.end(), std::back_inserter(ends));
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  std::vector<double> lv;
  lv.reserve(ends.size());
  std::size_t ia = 0, ib = 0;
  for (double t : ends) {
    while (ia < a.size() && a.right_ends_[ia] < t) ++ia;
    while (ib < b.size() && b.right_ends_[ib] < t) ++ib;
    const double ca = ia < a.size() ? a.levels_[ia] : 0.0;
    const double cb = ib < b.size() ? b.levels_[ib] : 0.0;
    lv.push_back(ca + cb);
  }
  return StepFunction(std::move(ends), std::move(lv));
}

StepFunction operator-(const StepFunction& a, const StepFunction& b) { return a + (-b); }

StepFunction operator*(double c, const StepFunction& f) {
  std::vector<double> lv(f.levels_);
  for (double& x : lv) x *= c;
  return StepFunction(f.right_ends_, std::move(lv));
}

std::string StepFunction::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t k = 0; k < size(); ++k) j.push_back({right_ends_[k], levels_[k]});
  return j.dump();
}

StepFunction StepFunction::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("step function JSON parse error at byte " +
                                std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("step function JSON: expected an array of [breakpoint, level] pairs");
  std::vector<double> ends;
  std::vector<double> lv;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& pair = j[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw std::invalid_argument("step function JSON: element " + std::to_string(i) +
                                  " is not a [breakpoint, level] pair");
    ends.push_back(pair[0].get<double>());
    lv.push_back(pair[1].get<double>());
  }
  return StepFunction(std::move(ends), std::move(lv));
}

StepFunction approximate(const numerics::Integrand1D& f, int level) {
  if (level < 0 || level > 12) throw std::invalid_argument("approximate: level must lie in [0, 12]");
  const auto profile = numerics::admissibility_profile(f);
  if (profile.l2_norm.infinite || profile.l1_one_plus_sqrt_norm.infinite)
    throw std::invalid_argument("not approximable: f must lie in L2(ds) and L1(ds/(1+sqrt s))");

  const double width = std::ldexp(1.0, -level);
  const double span = std::min(std::ldexp(1.0, level), f.support_end());
  const auto cells = static_cast<std::size_t>(std::ceil(span / width));
  std::vector<double> ends;
  std::vector<double> lv;
  ends.reserve(cells);
  lv.reserve(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double lo = static_cast<double>(k) * width;
    const double hi = static_cast<double>(k + 1) * width;
    const double mass = numerics::integrate_singular(f, lo, hi, k == 0, false);
    ends.push_back(hi);
    lv.push_back(mass / width);
  }
  return StepFunction(std::move(ends), std::move(lv));
}

StepFunction project_bridge(const StepFunction& f, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("project_bridge: requires u > 0");
  std::vector<double> ends;
  std::vector<double> lv;
  for (std::size_t k = 0; k < f.size() && f.left_end(k) < u; ++k) {
    ends.push_back(std::min(f.right_ends()[k], u));
    lv.push_back(f.levels()[k]);
  }
  if (ends.empty() || ends.back() < u) {
    ends.push_back(u);
    lv.push_back(0.0);
  }
  StepFunction restricted(ends, lv);
  const double mean = restricted.integral() / u;
  for (double& c : lv) c -= mean;
  return StepFunction(std::move(ends), std::move(lv));
}

StepFunction shift(const StepFunction& f, double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("shift: requires u >= 0");
  if (u == 0.0) return f;
  std::vector<double> ends;
  std::vector<double> lv;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f.right_ends()[k] <= u) continue;
    ends.push_back(f.right_ends()[k] - u);
    lv.push_back(f.levels()[k]);
  }
  return StepFunction(std::move(ends), std::move(lv));
}

StepFunction truncate(const StepFunction& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("truncate: requires t >= 0");
  std::vector<double> ends;
  std::vector<double> lv;
  for (std::size_t k = 0; k < f.size() && f.left_end(k) < t; ++k) {
    ends.push_back(std::min(f.right_ends()[k], t));
    lv.push_back(f.levels()[k]);
  }
  return StepFunction(std::move(ends), std::move(lv));
}

double time_change_M(const StepFunction& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time_change_M: requires t >= 0");
  return t + f.energy_until(t);
}

double time_change_L(const StepFunction& f, double v, double horizon) {
  if (!(v >= 0.0)) throw std::invalid_argument("time_change_L: requires v >= 0");
  if (std::isfinite(horizon) && v > time_change_M(f, horizon))
    throw std::invalid_argument("time_change_L: v exceeds M(horizon)");
  double m = 0.0;  // M at the left end of the current cell
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double lo = f.left_end(k);
    const double hi = f.right_ends()[k];
    const double slope = 1.0 + f.levels()[k] * f.levels()[k];
    const double m_hi = m + slope * (hi - lo);
    if (v <= m_hi) return v == m_hi ? hi : lo + (v - m) / slope;
    m = m_hi;
  }
  return f.support_end() + (v - m);
}

}  // namespace penalise
