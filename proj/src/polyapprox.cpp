#include "lqwidth/polyapprox.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lqwidth/quadrature.hpp"

namespace lqwidth {

namespace {

// Calls f(point, weight) for every node of the tensor rule on `cube`; weights
// already include the cube volume.
template <typename F>
void for_each_node(const DyadicCube& cube, const QuadratureRule& rule, F&& f) {
  const std::size_t dim = cube.dim();
  const std::size_t n = rule.nodes.size();
  std::array<std::size_t, kMaxDim> it{};
  std::vector<double> x(dim);
  const double h = cube.side();
  const double vol = cube.volume();
  while (true) {
    double w = vol;
    for (std::size_t k = 0; k < dim; ++k) {
      x[k] = cube.lower(k) + h * rule.nodes[it[k]];
      w *= rule.weights[it[k]];
    }
    f(std::span<const double>(x), w);
    std::size_t k = 0;
    while (k < dim && ++it[k] == n) it[k++] = 0;
    if (k == dim) break;
  }
}

double monomial(const MultiIndex& k, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) v *= std::pow(x[i], static_cast<double>(k[i]));
  return v;
}

}  // namespace

std::size_t kappa(std::size_t m, unsigned ell) {
  if (m < 1 || ell < 1) throw std::invalid_argument("kappa: m and l must be >= 1");
  // binom(m + ell - 1, m)
  std::size_t r = 1;
  for (std::size_t i = 1; i <= m; ++i) r = r * (ell - 1 + i) / i;
  return r;
}

PolySpace::PolySpace(std::size_t dim, unsigned order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("PolySpace: bad dimension");
  if (order < 1) throw std::invalid_argument("PolySpace: order must be >= 1");
  // Graded order: total degree, then lexicographic from the last axis.
  for (unsigned total = 0; total < order; ++total) {
    MultiIndex k{};
    std::function<void(std::size_t, unsigned)> rec = [&](std::size_t axis, unsigned left) {
      if (axis + 1 == dim) {
        k[axis] = left;
        indices_.push_back(k);
        return;
      }
      for (unsigned v = left + 1; v-- > 0;) {
        k[axis] = v;
        rec(axis + 1, left - v);
      }
    };
    rec(0, total);
  }
}

double PolySpace::basis(std::size_t j, const DyadicCube& cube, std::span<const double> x) const {
  const MultiIndex& k = indices_[j];
  const double h = cube.side();
  double v = 1.0 / std::sqrt(cube.volume());
  for (std::size_t i = 0; i < dim_; ++i) {
    v *= legendre_orthonormal(k[i], (x[i] - cube.lower(i)) / h);
  }
  return v;
}

double PolySpace::evaluate(const DyadicCube& cube, std::span<const double> coefficients,
                           std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t j = 0; j < indices_.size(); ++j) v += coefficients[j] * basis(j, cube, x);
  return v;
}

std::vector<double> moment_residuals(const FunctionHandle& u, const DyadicCube& cube,
                                     const PolySpace& space, std::span<const double> coefficients,
                                     std::size_t nodes_per_axis) {
  const QuadratureRule rule = gauss_legendre(nodes_per_axis);
  std::vector<double> res(space.size(), 0.0);
  for_each_node(cube, rule, [&](std::span<const double> x, double w) {
    const double diff = u(x) - space.evaluate(cube, coefficients, x);
    for (std::size_t j = 0; j < space.size(); ++j) {
      res[j] += w * monomial(space.multi_indices()[j], x) * diff;
    }
  });
  for (auto& r : res) r = std::abs(r);
  return res;
}

CubeProjection project_poly(const FunctionHandle& u, const DyadicCube& cube, unsigned ell,
                            unsigned extra_nodes) {
  const PolySpace space(cube.dim(), ell);
  const QuadratureRule rule = gauss_legendre(ell + extra_nodes);
  CubeProjection out;
  out.coefficients.assign(space.size(), 0.0);
  for_each_node(cube, rule, [&](std::span<const double> x, double w) {
    const double ux = u(x);
    if (!std::isfinite(ux)) throw std::domain_error("project_poly: function value is not finite");
    for (std::size_t j = 0; j < space.size(); ++j) out.coefficients[j] += w * ux * space.basis(j, cube, x);
  });
  // Checked with a rule of twice the order, independent of the one above.
  const auto res = moment_residuals(u, cube, space, out.coefficients, 2 * (ell + extra_nodes));
  out.max_moment_residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
  return out;
}

PiecewisePoly::PiecewisePoly(PolySpace space, Partition partition,
                             std::vector<std::vector<double>> coefficients)
    : space_(std::move(space)), partition_(std::move(partition)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != partition_.cells.size()) {
    throw std::invalid_argument("PiecewisePoly: one coefficient vector per cell required");
  }
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    if (coefficients_[i].size() != space_.size()) {
      throw std::invalid_argument("PiecewisePoly: coefficient vector length must equal kappa");
    }
    lookup_.emplace(partition_.cells[i].cube, i);
  }
}

std::size_t PiecewisePoly::locate(std::span<const double> x) const {
  const unsigned depth = partition_.max_level();
  for (unsigned lv = 0; lv <= depth; ++lv) {
    auto it = lookup_.find(DyadicCube::containing(x, lv));
    if (it != lookup_.end()) return it->second;
  }
  throw std::out_of_range("PiecewisePoly::locate: point not covered by the partition");
}

double PiecewisePoly::operator()(std::span<const double> x) const {
  const std::size_t i = locate(x);
  return space_.evaluate(partition_.cells[i].cube, coefficients_[i], x);
}

PiecewisePoly piecewise_project(const FunctionHandle& u, const Partition& partition, unsigned ell) {
  PolySpace space(partition.dim, ell);
  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(partition.cells.size());
  for (const auto& cell : partition.cells) coeffs.push_back(project_poly(u, cell.cube, ell).coefficients);
  return PiecewisePoly(std::move(space), partition, std::move(coeffs));
}

ErrorEstimate error_Lq(const FunctionHandle& u, const PiecewisePoly& approx, const MeasureSpec& spec,
                       double q, std::size_t samples, std::uint64_t seed) {
  if (!(q >= 1.0)) throw std::invalid_argument("error_Lq: q must be >= 1");
  ErrorEstimate est;
  if (const auto* atomic = std::get_if<Atomic>(&spec.value)) {
    double acc = 0.0;
    for (const auto& a : atomic->atoms) {
      acc += a.weight * std::pow(std::abs(u(a.point) - approx(a.point)), q);
    }
    est.value = std::pow(acc, 1.0 / q);
    est.exact = true;
    est.samples = atomic->atoms.size();
    return est;
  }
  if (samples < 2) throw std::invalid_argument("error_Lq: need at least two samples");
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto x = sample_point(spec, rng);
    const double v = std::pow(std::abs(u(x) - approx(x)), q);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  est.value = std::pow(mean, 1.0 / q);
  // Delta method for mean^(1/q).
  est.std_error = mean > 0.0 ? std::pow(mean, 1.0 / q - 1.0) / q * std::sqrt(var / n) : 0.0;
  est.samples = samples;
  return est;
}

WidthUpperSequence width_upper_sequence(const MeasureSpec& spec, const OrderParams& params,
                                        std::span<const std::size_t> cells) {
  params.validate();
  if (params.ell != std::floor(params.ell) || params.m != static_cast<double>(dimension(spec))) {
    throw std::invalid_argument("width_upper_sequence: l must be an integer and m the measure dimension");
  }
  if (cells.size() < 2) throw std::invalid_argument("width_upper_sequence: need at least two budgets");
  WidthUpperSequence seq;
  seq.a = params.rho() / params.m;
  const std::size_t k = kappa(dimension(spec), static_cast<unsigned>(params.ell));
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t n : cells) {
    WidthBoundPoint pt;
    pt.cells = n;
    const Partition part = greedy_gamma_partition(spec, seq.a, n);
    for (const auto& c : part.cells) pt.support_cells += c.mass > 0.0 ? 1 : 0;
    pt.dimension = k * pt.support_cells;
    pt.gamma = part.max_j();
    pt.bound = std::pow(pt.gamma, 1.0 / params.q);
    seq.points.push_back(pt);
    if (pt.bound > 0.0) {
      x.push_back(std::log(static_cast<double>(pt.dimension)));
      y.push_back(std::log(pt.bound));
    }
  }
  seq.fit = fit_line(x, y);
  return seq;
}

nlohmann::json piecewise_to_json(const PiecewisePoly& approx) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t i = 0; i < approx.partition().cells.size(); ++i) {
    const auto& cube = approx.partition().cells[i].cube;
    std::vector<std::uint64_t> idx(cube.indices().begin(), cube.indices().end());
    cells.push_back({{"cube", {{"level", cube.level()}, {"index", idx}}},
                     {"coefficients", approx.coefficients()[i]}});
  }
  return {{"basis", kBasisConvention},
          {"dimension", approx.space().dim()},
          {"order", approx.space().order()},
          {"cells", cells}};
}

}  // namespace lqwidth
