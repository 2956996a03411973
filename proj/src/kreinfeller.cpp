#include "lqwidth/kreinfeller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "lqwidth/parallel.hpp"
#include "lqwidth/spectrum.hpp"

namespace lqwidth {

std::vector<std::string> validate(const AtomicApprox& atoms) {
  std::vector<std::string> out;
  if (atoms.points.empty()) out.push_back("no atoms");
  if (atoms.points.size() != atoms.weights.size()) out.push_back("points and weights differ in length");
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.points.size(); ++j) {
    const double x = atoms.points[j];
    if (!(x > 0.0 && x < 1.0)) out.push_back("atom " + std::to_string(j) + " outside (0,1)");
    if (j > 0 && !(x > atoms.points[j - 1])) out.push_back("points not strictly increasing at " + std::to_string(j));
    if (j < atoms.weights.size()) {
      if (!(atoms.weights[j] > 0.0)) out.push_back("weight " + std::to_string(j) + " not positive");
      total += atoms.weights[j];
    }
  }
  if (std::abs(total - 1.0) > kAtomWeightTolerance) {
    std::ostringstream os;
    os << "weights sum to " << total << ", expected 1";
    out.push_back(os.str());
  }
  return out;
}

AtomicApprox discretize(const MeasureSpec& spec, unsigned level) {
  if (dimension(spec) != 1) throw std::invalid_argument("discretize: the string solver needs a 1D measure");
  AtomicApprox out;
  out.source = type_name(spec);
  if (const auto* atomic = std::get_if<Atomic>(&spec.value)) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& a : atomic->atoms) pts.emplace_back(a.point[0], a.weight);
    std::sort(pts.begin(), pts.end());
    for (const auto& [x, w] : pts) {
      out.points.push_back(x);
      out.weights.push_back(w);
    }
  } else {
    out.level = level;
    for (const auto& wc : support(spec, level)) {
      out.points.push_back(wc.cube.center()[0]);
      out.weights.push_back(wc.mass);
    }
  }
  if (auto v = validate(out); !v.empty()) throw std::invalid_argument("discretize: " + v.front());
  return out;
}

EigenSystem solve_eigen_on(std::span<const double> points, std::span<const double> weights, double lo,
                           double hi, bool with_vectors) {
  const auto n = static_cast<Eigen::Index>(points.size());
  EigenSystem sys;
  if (n == 0) return sys;
  if (weights.size() != points.size()) throw std::invalid_argument("solve_eigen: size mismatch");

  // Gaps h_0..h_N with x_{-1} = lo and x_N = hi.
  Eigen::VectorXd gap(n + 1);
  double prev = lo;
  for (Eigen::Index j = 0; j < n; ++j) {
    gap[j] = points[j] - prev;
    prev = points[j];
  }
  gap[n] = hi - prev;
  if ((gap.array() <= 0.0).any()) throw std::invalid_argument("solve_eigen: points must lie strictly inside and increase");

  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index j = 0; j < n; ++j) diag[j] = 1.0 / gap[j] + 1.0 / gap[j + 1];
  for (Eigen::Index j = 0; j + 1 < n; ++j) off[j] = -1.0 / gap[j + 1];

  // K = L L^T with L lower bidiagonal.
  Eigen::VectorXd ld(n);
  Eigen::VectorXd ls(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = diag[j];
    if (j > 0) d -= ls[j - 1] * ls[j - 1];
    if (!(d > 0.0)) throw std::runtime_error("solve_eigen: stiffness matrix is not positive definite");
    ld[j] = std::sqrt(d);
    if (j + 1 < n) ls[j] = off[j] / ld[j];
  }

  // M = L^{-1} W^{1/2}, column by column (lower triangular).
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    double v = std::sqrt(weights[c]) / ld[c];
    m(c, c) = v;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      v = -ls[r - 1] * v / ld[r];
      m(r, c) = v;
      if (v == 0.0) break;
    }
  }
  Eigen::MatrixXd c(n, n);
  c.triangularView<Eigen::Lower>() = m.triangularView<Eigen::Lower>() * m.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      c, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("solve_eigen: eigensolver did not converge");

  // Eigen returns ascending order.
  sys.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) sys.eigenvalues[k] = es.eigenvalues()[n - 1 - k];
  for (double lam : sys.eigenvalues) {
    if (!(lam > 0.0)) throw std::runtime_error("solve_eigen: non-positive eigenvalue");
  }
  if (!with_vectors) return sys;

  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), n);
  sys.eigenvectors.resize(n);
  sys.residuals.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = sys.eigenvalues[k];
    Eigen::VectorXd v = es.eigenvectors().col(n - 1 - k);
    // u = L^{-T} v by back substitution.
    Eigen::VectorXd u(n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      double s = v[j];
      if (j + 1 < n) s -= ls[j] * u[j + 1];
      u[j] = s / ld[j];
    }
    Eigen::VectorXd ku = diag.cwiseProduct(u);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      ku[j] += off[j] * u[j + 1];
      ku[j + 1] += off[j] * u[j];
    }
    const Eigen::VectorXd wu = w.cwiseProduct(u);
    const double res = (wu - lam * ku).norm() / wu.norm();
    sys.residuals[k] = res;
    sys.max_residual = std::max(sys.max_residual, res);
    sys.eigenvectors[k].assign(u.data(), u.data() + n);
  }
  return sys;
}

EigenSystem solve_eigen(const AtomicApprox& atoms, bool with_vectors) {
  if (auto v = validate(atoms); !v.empty()) throw std::invalid_argument("solve_eigen: " + v.front());
  return solve_eigen_on(atoms.points, atoms.weights, 0.0, 1.0, with_vectors);
}

std::size_t counting_function(const EigenSystem& eigs, double x) {
  // Descending list: count the prefix with lambda >= x.
  auto it = std::partition_point(eigs.eigenvalues.begin(), eigs.eigenvalues.end(),
                                 [x](double lam) { return lam >= x; });
  return static_cast<std::size_t>(it - eigs.eigenvalues.begin());
}

double width_from_eigen(const EigenSystem& eigs, std::size_t n) {
  if (n >= eigs.size()) return 0.0;
  return std::sqrt(eigs.eigenvalues[n]);
}

OrderFit order_fit(const MeasureSpec& spec, std::span<const unsigned> levels, IndexWindow window) {
  if (dimension(spec) != 1) throw std::invalid_argument("order_fit: needs a 1D measure");
  if (levels.empty()) throw std::invalid_argument("order_fit: no levels");
  if (window.first < 1) throw std::invalid_argument("order_fit: window starts at index 1");

  auto fits = parallel_map<LevelOrderFit>(levels.size(), [&](std::size_t i) {
    LevelOrderFit lf;
    lf.level = levels[i];
    const auto eigs = solve_eigen(discretize(spec, levels[i]), false);
    lf.atoms = eigs.size();
    lf.first = window.first;
    lf.last = window.last == 0 ? eigs.size() / 3 : std::min(window.last, eigs.size());
    if (lf.last < lf.first || lf.last - lf.first + 1 < kMinFitPoints) {
      throw std::invalid_argument("order_fit: window [" + std::to_string(lf.first) + ", " +
                                  std::to_string(lf.last) + "] at level " + std::to_string(lf.level) +
                                  " has fewer than " + std::to_string(kMinFitPoints) + " points");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = lf.first; k <= lf.last; ++k) {
      x.push_back(std::log(static_cast<double>(k)));
      y.push_back(std::log(eigs.eigenvalues[k - 1]));
    }
    lf.fit = fit_line(x, y);
    return lf;
  });

  OrderFit out;
  out.levels = std::move(fits);
  std::size_t finest = 0;
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    if (out.levels[i].level > out.levels[finest].level) finest = i;
  }
  out.slope = out.levels[finest].fit.slope;
  out.slope_stderr = out.levels[finest].fit.slope_stderr;
  for (const auto& lf : out.levels) out.drift = std::max(out.drift, std::abs(lf.fit.slope - out.slope));

  std::vector<unsigned> spec_levels(levels.begin(), levels.end());
  out.s1_hat = s_b_estimate(spec, 1.0, spec_levels).estimate;
  out.target = out.s1_hat > 0.0 ? -1.0 / out.s1_hat : 0.0;
  return out;
}

SandwichReport split_counting_check(const AtomicApprox& atoms, std::span<const double> cuts,
                                    std::span<const double> x_grid) {
  if (auto v = validate(atoms); !v.empty()) throw std::invalid_argument("split_counting_check: " + v.front());
  SandwichReport rep;
  rep.cuts.assign(cuts.begin(), cuts.end());
  for (std::size_t k = 0; k < rep.cuts.size(); ++k) {
    const double d = rep.cuts[k];
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("split_counting_check: cut outside (0,1)");
    if (k > 0 && !(d > rep.cuts[k - 1])) throw std::invalid_argument("split_counting_check: cuts must increase");
    if (std::binary_search(atoms.points.begin(), atoms.points.end(), d)) {
      throw std::invalid_argument("split_counting_check: cut at " + std::to_string(d) + " hits an atom");
    }
  }

  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), rep.cuts.begin(), rep.cuts.end());
  bounds.push_back(1.0);
  const std::size_t pieces = bounds.size() - 1;

  // Task 0 is the full problem, tasks 1..pieces the subintervals.
  auto systems = parallel_map<EigenSystem>(pieces + 1, [&](std::size_t i) {
    if (i == 0) return solve_eigen(atoms, false);
    const double lo = bounds[i - 1];
    const double hi = bounds[i];
    auto first = std::upper_bound(atoms.points.begin(), atoms.points.end(), lo);
    auto last = std::lower_bound(atoms.points.begin(), atoms.points.end(), hi);
    const auto a = static_cast<std::size_t>(first - atoms.points.begin());
    const auto b = static_cast<std::size_t>(last - atoms.points.begin());
    return solve_eigen_on(std::span(atoms.points).subspan(a, b - a),
                          std::span(atoms.weights).subspan(a, b - a), lo, hi, false);
  });
  for (std::size_t i = 1; i <= pieces; ++i) rep.pieces.push_back(systems[i].size());

  for (double x : x_grid) {
    SandwichRow row;
    row.x = x;
    row.full = counting_function(systems[0], x);
    for (std::size_t i = 1; i <= pieces; ++i) row.split_sum += counting_function(systems[i], x);
    row.gap = static_cast<long>(row.full) - static_cast<long>(row.split_sum);
    row.ok = row.gap >= 0 && row.gap <= static_cast<long>(rep.cuts.size());
    rep.ok = rep.ok && row.ok;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace lqwidth
