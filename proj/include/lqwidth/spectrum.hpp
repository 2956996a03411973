#pragma once

#include <span>
#include <vector>

#include "lqwidth/measure.hpp"
#include "lqwidth/numeric.hpp"

namespace lqwidth {

/// Absolute tolerance for the per-level fixed points s_{n,b}.
inline constexpr double kFixedPointTolerance = 1e-10;

/// Finite-level L^q-spectrum of one measure at one level. Holds the log-masses
/// of the positive-mass cubes so many s values can be evaluated cheaply.
class LevelSpectrum {
 public:
  LevelSpectrum(const MeasureSpec& spec, unsigned level);

  unsigned level() const { return level_; }
  std::size_t cardinality() const { return log_masses_.size(); }

  /// log(sum nu(C)^s) / log(2^n), summed over positive-mass cubes only.
  double beta(double s) const;
  /// Unique root of beta(s) = b * s in [0,1]; 0 when beta(0) <= 0.
  Root fixed_point(double b) const;

 private:
  unsigned level_;
  std::vector<double> log_masses_;
};

struct SpectrumCurve {
  unsigned level = 0;
  std::vector<double> s;
  std::vector<double> beta;
};

struct FixedPoint {
  double b = 0.0;
  std::vector<unsigned> levels;
  std::vector<double> roots;
  std::vector<double> residuals;
  /// Max over the tail half of the levels; a finite-level surrogate for the limsup.
  double estimate = 0.0;
};

double beta_n(const MeasureSpec& spec, unsigned level, double s);
SpectrumCurve spectrum_curve(const MeasureSpec& spec, unsigned level, std::span<const double> s_grid);

double s_nb(const MeasureSpec& spec, unsigned level, double b);
FixedPoint s_b_estimate(const MeasureSpec& spec, double b, std::span<const unsigned> levels);

/// beta solving sum_i p_i^s r_i^beta = 1 for a self-similar measure under OSC.
double selfsimilar_beta(std::span<const double> weights, std::span<const double> ratios, double s);

/// Root of sum_i (p_i r_i^rho)^s = 1 in (0,1).
double selfsimilar_s_rho(std::span<const double> weights, std::span<const double> ratios,
                         double rho);

/// Similarity dimension: root of sum_i r_i^delta = 1.
double similarity_dimension(std::span<const double> ratios);

/// Smoothness/integrability parameters of W_p^l -> L^q_nu on an m-cube.
struct OrderParams {
  double p = 2.0;
  double q = 2.0;
  double ell = 1.0;
  double m = 1.0;

  double rho() const { return q * (ell - m / p); }
  /// -l/m + 1/p - 1/q, the bound valid for every measure.
  double classical_order() const { return -ell / m + 1.0 / p - 1.0 / q; }
  /// Throws std::invalid_argument naming the first violated inequality.
  void validate() const;
};

struct OrderBound {
  double bound = 0.0;
  double classical = 0.0;
  double rho = 0.0;
};

/// -1/(q s_rho) together with the classical order for comparison.
OrderBound order_bound(const OrderParams& params, double s_rho);

}  // namespace lqwidth
