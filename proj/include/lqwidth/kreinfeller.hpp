#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lqwidth/measure.hpp"
#include "lqwidth/numeric.hpp"

namespace lqwidth {

/// Finite atomic measure on (0,1) fed to the string solver.
struct AtomicApprox {
  std::vector<double> points;  ///< strictly increasing, inside (0,1)
  std::vector<double> weights;
  std::string source;
  std::optional<unsigned> level;  ///< discretization level, empty for atomic pass-through
};

inline constexpr double kAtomWeightTolerance = 1e-10;

/// Empty when valid.
std::vector<std::string> validate(const AtomicApprox& atoms);

/// One atom per positive-mass level-n cube at its midpoint; atomic specs pass through.
AtomicApprox discretize(const MeasureSpec& spec, unsigned level);

struct EigenSystem {
  /// Descending, all positive.
  std::vector<double> eigenvalues;
  /// eigenvectors[k][j]: value of the k-th eigenfunction at atom j, K-normalized.
  std::vector<std::vector<double>> eigenvectors;
  /// ||W u - lambda K u|| / ||W u|| per pair (empty if vectors were skipped).
  std::vector<double> residuals;
  double max_residual = 0.0;

  std::size_t size() const { return eigenvalues.size(); }
};

inline constexpr double kEigenResidualTolerance = 1e-8;

/// W u = lambda K u for the Stieltjes string on [0,1] with Dirichlet ends.
EigenSystem solve_eigen(const AtomicApprox& atoms, bool with_vectors = true);

/// Same problem on [lo, hi] with Dirichlet ends there; every point must lie inside.
/// Weights need not sum to 1.
EigenSystem solve_eigen_on(std::span<const double> points, std::span<const double> weights,
                           double lo, double hi, bool with_vectors = true);

/// card{n : lambda_n >= x}.
std::size_t counting_function(const EigenSystem& eigs, double x);

/// sqrt(lambda_{n+1}); 0 once n reaches the rank.
double width_from_eigen(const EigenSystem& eigs, std::size_t n);

struct IndexWindow {
  std::size_t first = 5;
  /// 0 means N/3 at each level.
  std::size_t last = 0;
};

struct LevelOrderFit {
  unsigned level = 0;
  std::size_t atoms = 0;
  std::size_t first = 0;
  std::size_t last = 0;
  LineFit fit;
};

struct OrderFit {
  std::vector<LevelOrderFit> levels;
  double slope = 0.0;  ///< at the finest level
  double slope_stderr = 0.0;
  /// max |slope_level - slope_finest| over the other levels.
  double drift = 0.0;
  double s1_hat = 0.0;
  double target = 0.0;  ///< -1/s1_hat
};

inline constexpr std::size_t kMinFitPoints = 10;

/// Slope of log lambda_n against log n over the window, per level.
OrderFit order_fit(const MeasureSpec& spec, std::span<const unsigned> levels,
                   IndexWindow window = {});

struct SandwichRow {
  double x = 0.0;
  std::size_t full = 0;
  std::size_t split_sum = 0;
  long gap = 0;  ///< full - split_sum
  bool ok = false;
};

struct SandwichReport {
  std::vector<double> cuts;
  std::vector<std::size_t> pieces;  ///< atoms per subinterval
  std::vector<SandwichRow> rows;
  bool ok = true;
};

/// Checks sum_k N(x, T_k) <= N(x, T) <= sum_k N(x, T_k) + cuts at every x.
SandwichReport split_counting_check(const AtomicApprox& atoms, std::span<const double> cuts,
                                    std::span<const double> x_grid);

}  // namespace lqwidth
