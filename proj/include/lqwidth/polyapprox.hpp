#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "lqwidth/measure.hpp"
#include "lqwidth/numeric.hpp"
#include "lqwidth/partition.hpp"
#include "lqwidth/spectrum.hpp"

namespace lqwidth {

using FunctionHandle = std::function<double(std::span<const double>)>;
using MultiIndex = std::array<unsigned, kMaxDim>;

/// binom(m + l - 1, m): dimension of m-variate polynomials of total degree <= l - 1.
std::size_t kappa(std::size_t m, unsigned ell);

/// Polynomials of total degree <= order-1 in `dim` variables, represented on each
/// cube in the tensor basis of orthonormal shifted Legendre polynomials.
class PolySpace {
 public:
  PolySpace(std::size_t dim, unsigned order);

  std::size_t dim() const { return dim_; }
  unsigned order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& multi_indices() const { return indices_; }

  /// Basis function j on `cube`, L^2(cube)-normalized.
  double basis(std::size_t j, const DyadicCube& cube, std::span<const double> x) const;
  double evaluate(const DyadicCube& cube, std::span<const double> coefficients,
                  std::span<const double> x) const;

 private:
  std::size_t dim_;
  unsigned order_;
  std::vector<MultiIndex> indices_;
};

struct CubeProjection {
  std::vector<double> coefficients;
  /// max_k |int_Q x^k (u - P_Q u)|, measured with a rule of doubled order.
  double max_moment_residual = 0.0;
};

/// Default extra Gauss nodes per axis beyond the order.
inline constexpr unsigned kExtraQuadratureNodes = 4;

/// L^2(cube)-orthogonal projection onto polynomials of degree <= ell - 1.
CubeProjection project_poly(const FunctionHandle& u, const DyadicCube& cube, unsigned ell,
                            unsigned extra_nodes = kExtraQuadratureNodes);

/// |int_Q x^k (u - p)| for every |k| <= ell - 1 with `nodes_per_axis` Gauss points.
std::vector<double> moment_residuals(const FunctionHandle& u, const DyadicCube& cube,
                                     const PolySpace& space, std::span<const double> coefficients,
                                     std::size_t nodes_per_axis);

/// Piecewise polynomial over a partition, one coefficient vector per cell.
class PiecewisePoly {
 public:
  PiecewisePoly(PolySpace space, Partition partition, std::vector<std::vector<double>> coefficients);

  const PolySpace& space() const { return space_; }
  const Partition& partition() const { return partition_; }
  const std::vector<std::vector<double>>& coefficients() const { return coefficients_; }

  /// Index of the cell whose half-open cube contains x.
  std::size_t locate(std::span<const double> x) const;
  double operator()(std::span<const double> x) const;

 private:
  PolySpace space_;
  Partition partition_;
  std::vector<std::vector<double>> coefficients_;
  std::unordered_map<DyadicCube, std::size_t, DyadicCubeHash> lookup_;
};

PiecewisePoly piecewise_project(const FunctionHandle& u, const Partition& partition, unsigned ell);

struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
  std::size_t samples = 0;
};

inline constexpr std::size_t kDefaultMonteCarloSamples = 100000;

/// ||u - approx||_{L^q_nu}: exact for atomic measures, Monte Carlo otherwise.
ErrorEstimate error_Lq(const FunctionHandle& u, const PiecewisePoly& approx, const MeasureSpec& spec,
                       double q, std::size_t samples = kDefaultMonteCarloSamples,
                       std::uint64_t seed = 0);

struct WidthBoundPoint {
  std::size_t cells = 0;          ///< budget handed to the greedy partition
  std::size_t support_cells = 0;  ///< cells of positive mass
  std::size_t dimension = 0;      ///< kappa * support_cells
  double gamma = 0.0;
  double bound = 0.0;  ///< gamma^(1/q)
};

struct WidthUpperSequence {
  double a = 0.0;  ///< rho / m
  std::vector<WidthBoundPoint> points;
  /// log bound against log dimension.
  LineFit fit;
};

/// Order-only upper bounds for d_{kappa n}(S W_p^l, L^q_nu) from dyadic gamma.
/// Null cells carry no polynomial, so only cells with nu(Q) > 0 count towards n.
WidthUpperSequence width_upper_sequence(const MeasureSpec& spec, const OrderParams& params,
                                        std::span<const std::size_t> cells);

inline constexpr const char* kBasisConvention = "legendre-tensor-orthonormal-v1";

nlohmann::json piecewise_to_json(const PiecewisePoly& approx);

}  // namespace lqwidth
