#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace lqwidth {

inline constexpr int kMaxBisectionIterations = 200;

struct Root {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Root of a strictly decreasing function on [lo, hi] with f(lo) >= 0 >= f(hi).
/// Stops when the bracket is narrower than `tol` or after the iteration cap.
Root bisect_decreasing(const std::function<double(double)>& f, double lo, double hi,
                       double tol);

/// Ordinary least squares y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// log(sum_i exp(v_i)) with a max shift.
double log_sum_exp(std::span<const double> v);

}  // namespace lqwidth
