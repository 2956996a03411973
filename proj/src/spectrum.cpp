#include "lqwidth/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lqwidth {

namespace {

void check_ifs_data(std::span<const double> weights, std::span<const double> ratios) {
  if (weights.empty() || weights.size() != ratios.size()) {
    throw std::invalid_argument("self-similar data: weights and ratios must match and be non-empty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("self-similar data: weights must be positive");
    if (!(ratios[i] > 0.0 && ratios[i] < 1.0)) {
      throw std::invalid_argument("self-similar data: ratios must lie in (0,1)");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("self-similar data: weights must sum to 1");
  }
}

// Root of a decreasing function on the whole real line, bracket found by doubling.
double solve_decreasing_unbounded(const std::function<double(double)>& f) {
  double lo = -1.0;
  double hi = 1.0;
  while (f(lo) < 0.0) lo *= 2.0;
  while (f(hi) > 0.0) hi *= 2.0;
  return bisect_decreasing(f, lo, hi, 1e-15).x;
}

}  // namespace

LevelSpectrum::LevelSpectrum(const MeasureSpec& spec, unsigned level) : level_(level) {
  if (level < 1) throw std::invalid_argument("LevelSpectrum: level must be >= 1");
  require_valid(spec);
  for (const auto& wc : support(spec, level)) log_masses_.push_back(std::log(wc.mass));
}

double LevelSpectrum::beta(double s) const {
  std::vector<double> terms(log_masses_.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = s * log_masses_[i];
  return log_sum_exp(terms) / (static_cast<double>(level_) * std::log(2.0));
}

Root LevelSpectrum::fixed_point(double b) const {
  if (!(b > 0.0)) throw std::invalid_argument("fixed_point: b must be positive");
  auto g = [&](double s) { return beta(s) - b * s; };
  Root r = bisect_decreasing(g, 0.0, 1.0, kFixedPointTolerance / 4);
  return r;
}

double beta_n(const MeasureSpec& spec, unsigned level, double s) {
  return LevelSpectrum(spec, level).beta(s);
}

SpectrumCurve spectrum_curve(const MeasureSpec& spec, unsigned level, std::span<const double> s_grid) {
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > s_grid[i - 1])) throw std::invalid_argument("spectrum_curve: s-grid must increase");
  }
  const LevelSpectrum ls(spec, level);
  SpectrumCurve curve;
  curve.level = level;
  curve.s.assign(s_grid.begin(), s_grid.end());
  for (double s : s_grid) curve.beta.push_back(ls.beta(s));
  return curve;
}

double s_nb(const MeasureSpec& spec, unsigned level, double b) {
  return LevelSpectrum(spec, level).fixed_point(b).x;
}

FixedPoint s_b_estimate(const MeasureSpec& spec, double b, std::span<const unsigned> levels) {
  if (levels.empty()) throw std::invalid_argument("s_b_estimate: levels must be non-empty");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw std::invalid_argument("s_b_estimate: levels must increase");
  }
  FixedPoint fp;
  fp.b = b;
  for (unsigned n : levels) {
    const Root r = LevelSpectrum(spec, n).fixed_point(b);
    fp.levels.push_back(n);
    fp.roots.push_back(r.x);
    fp.residuals.push_back(r.residual);
  }
  const std::size_t tail = (fp.roots.size() + 1) / 2;
  fp.estimate = *std::max_element(fp.roots.end() - static_cast<std::ptrdiff_t>(tail), fp.roots.end());
  return fp;
}

double selfsimilar_beta(std::span<const double> weights, std::span<const double> ratios, double s) {
  check_ifs_data(weights, ratios);
  if (!(s >= 0.0)) throw std::invalid_argument("selfsimilar_beta: s must be >= 0");
  std::vector<double> terms(weights.size());
  auto f = [&](double beta) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      terms[i] = s * std::log(weights[i]) + beta * std::log(ratios[i]);
    }
    return log_sum_exp(terms);
  };
  return solve_decreasing_unbounded(f);
}

double selfsimilar_s_rho(std::span<const double> weights, std::span<const double> ratios,
                         double rho) {
  check_ifs_data(weights, ratios);
  if (!(rho > 0.0)) throw std::invalid_argument("selfsimilar_s_rho: rho must be positive");
  std::vector<double> terms(weights.size());
  auto f = [&](double s) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      terms[i] = s * (std::log(weights[i]) + rho * std::log(ratios[i]));
    }
    return log_sum_exp(terms);
  };
  return bisect_decreasing(f, 0.0, 1.0, 1e-15).x;
}

double similarity_dimension(std::span<const double> ratios) {
  if (ratios.empty()) throw std::invalid_argument("similarity_dimension: no ratios");
  std::vector<double> terms(ratios.size());
  auto f = [&](double d) {
    for (std::size_t i = 0; i < ratios.size(); ++i) terms[i] = d * std::log(ratios[i]);
    return log_sum_exp(terms);
  };
  return solve_decreasing_unbounded(f);
}

void OrderParams::validate() const {
  std::ostringstream os;
  if (!(p > 1.0)) {
    os << "p > 1 fails (p = " << p << ")";
  } else if (!(q >= p)) {
    os << "q >= p fails (q = " << q << ", p = " << p << ")";
  } else if (!(ell >= 1.0 && m >= 1.0)) {
    os << "l >= 1 and m >= 1 required";
  } else if (!(rho() > 0.0)) {
    os << "rho = q(l - m/p) > 0 fails (rho = " << rho() << ")";
  } else if (!(ell * p / m > 1.0)) {
    os << "l*p/m > 1 fails (l*p/m = " << ell * p / m << ")";
  } else {
    return;
  }
  throw std::invalid_argument("standing assumption violated: " + os.str());
}

OrderBound order_bound(const OrderParams& params, double s_rho) {
  params.validate();
  if (!(s_rho > 0.0 && s_rho <= 1.0)) throw std::invalid_argument("order_bound: s_rho must be in (0,1]");
  OrderBound ob{-1.0 / (params.q * s_rho), params.classical_order(), params.rho()};
  if (ob.bound > ob.classical + 1e-12) {
    std::ostringstream os;
    os << "order_bound: -1/(q s_rho) = " << ob.bound << " exceeds the classical bound "
       << ob.classical << "; s_rho = " << s_rho << " is larger than m/(m+rho) allows";
    throw std::logic_error(os.str());
  }
  return ob;
}

}  // namespace lqwidth
