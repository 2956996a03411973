#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqwidth/measure.hpp"
#include "lqwidth/numeric.hpp"

namespace lqwidth {

/// Default recursion guard for adaptive subdivision.
inline constexpr unsigned kDefaultMaxDepth = 48;

/// Lambda(C)^a * nu(C).
double j_weight(const MeasureSpec& spec, const DyadicCube& cube, double a);
double j_weight_from_mass(const DyadicCube& cube, double mass, double a);

struct PartitionCell {
  DyadicCube cube;
  double mass = 0.0;
  double j = 0.0;
};

/// Finite set of disjoint dyadic cubes covering (0,1]^m, each carrying its J_a weight.
struct Partition {
  std::size_t dim = 1;
  double a = 1.0;
  std::vector<PartitionCell> cells;

  std::size_t cardinality() const { return cells.size(); }
  double max_j() const;
  unsigned max_level() const;
  std::map<unsigned, std::size_t> level_histogram() const;

  /// Violations of disjointness, coverage or stored-weight consistency.
  std::vector<std::string> check(const MeasureSpec& spec) const;
};

/// The 2^{nm} cubes of level n, with masses and weights.
Partition uniform_partition(const MeasureSpec& spec, unsigned level, double a = 1.0);

class PartitionDepthError : public std::runtime_error {
 public:
  PartitionDepthError(const DyadicCube& cube, double j, double t);
  const DyadicCube& cube() const { return cube_; }

 private:
  DyadicCube cube_;
};

/// P_{a,t}: split every cube with J_a >= t, keep cubes with J_a < t.
Partition adaptive_partition(const MeasureSpec& spec, double a, double t,
                             unsigned max_depth = kDefaultMaxDepth);

/// Cardinality of P_{a,1/t}.
std::size_t counting_N(const MeasureSpec& spec, double a, double t,
                       unsigned max_depth = kDefaultMaxDepth);

/// Tree dynamic program over dyadic partitions of depth <= max_depth:
/// entry k-1 is the least achievable max J_a using at most k cells.
/// Entries are non-increasing; the vector has length max_cells.
std::vector<double> dyadic_gamma_profile(const MeasureSpec& spec, double a, std::size_t max_cells,
                                         unsigned max_depth);

double gamma_dyadic_oracle(const MeasureSpec& spec, double a, std::size_t n_cells,
                           unsigned max_depth);

/// Fewest cells (depth <= max_depth) reaching max J_a < t, if any budget up to
/// max_cells suffices.
std::optional<std::size_t> min_dyadic_cardinality(const MeasureSpec& spec, double a, double t,
                                                  unsigned max_depth, std::size_t max_cells);

/// Dyadic gamma with no depth limit, by repeatedly splitting a heaviest cube.
/// Agrees with the DP oracle whenever the oracle's depth limit does not bind.
Partition greedy_gamma_partition(const MeasureSpec& spec, double a, std::size_t n_cells);
double gamma_dyadic(const MeasureSpec& spec, double a, std::size_t n_cells);

struct EntropySample {
  double t = 0.0;  ///< 1 / threshold
  std::size_t cardinality = 0;
  double max_j = 0.0;
  unsigned depth = 0;
};

struct EntropyFit {
  double a = 0.0;
  std::vector<EntropySample> samples;
  /// log card against log t over the tail half of the samples.
  LineFit fit;
  double slope() const { return fit.slope; }
};

/// `thresholds` must be strictly decreasing (t = 1/threshold increasing).
EntropyFit entropy_estimate(const MeasureSpec& spec, double a, std::span<const double> thresholds,
                            unsigned max_depth = kDefaultMaxDepth);

/// start, start*factor, ..., count values.
std::vector<double> geometric_grid(double start, double factor, std::size_t count);

nlohmann::json partition_to_json(const Partition& partition);

}  // namespace lqwidth
