#include "lqwidth/partition.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

namespace lqwidth {

namespace {

void sort_cells(std::vector<PartitionCell>& cells) {
  std::sort(cells.begin(), cells.end(),
            [](const PartitionCell& x, const PartitionCell& y) { return x.cube < y.cube; });
}

// Value of a non-increasing profile at budget k >= 1; entries past the end repeat the last one.
double at_budget(const std::vector<double>& f, std::size_t k) {
  return f[std::min(k, f.size()) - 1];
}

void trim_tail(std::vector<double>& f) {
  while (f.size() > 1 && f[f.size() - 1] == f[f.size() - 2]) f.pop_back();
}

// Min over k1 + k2 <= k (each >= 1) of max(f(k1), g(k2)).
std::vector<double> combine(const std::vector<double>& f, const std::vector<double>& g,
                            std::size_t cap) {
  const std::size_t len = std::min(cap, f.size() + g.size());
  std::vector<double> out(len, std::numeric_limits<double>::infinity());
  for (std::size_t k = 2; k <= len; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k1 = 1; k1 < k; ++k1) {
      best = std::min(best, std::max(at_budget(f, k1), at_budget(g, k - k1)));
    }
    out[k - 1] = best;
  }
  return out;  // out[0] is infeasible (two parts need two cells)
}

struct DpContext {
  const MeasureSpec& spec;
  double a;
  unsigned max_depth;
};

std::vector<double> dp_profile(const DpContext& ctx, const DyadicCube& cube, double mass,
                               std::size_t cap) {
  const double j = j_weight_from_mass(cube, mass, ctx.a);
  if (mass <= 0.0) return {0.0};
  const std::size_t nchild = cube.child_count();
  if (cube.level() >= ctx.max_depth || cap < nchild) return {j};

  std::vector<double> acc;
  std::size_t used_min = 0;
  for (unsigned sel = 0; sel < nchild; ++sel) {
    const DyadicCube c = cube.child(sel);
    // Every other child needs at least one cell.
    const std::size_t child_cap = cap - (nchild - 1);
    auto f = dp_profile(ctx, c, cube_mass(ctx.spec, c), child_cap);
    if (sel == 0) {
      acc = std::move(f);
    } else {
      acc = combine(acc, f, cap);
    }
    ++used_min;
  }
  // acc[k-1] is finite only for k >= nchild.
  std::vector<double> out(std::max<std::size_t>(acc.size(), 1), j);
  for (std::size_t k = nchild; k <= acc.size(); ++k) out[k - 1] = std::min(j, acc[k - 1]);
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = std::min(out[k], out[k - 1]);
  trim_tail(out);
  return out;
}

}  // namespace

double j_weight_from_mass(const DyadicCube& cube, double mass, double a) {
  return std::exp2(-static_cast<double>(cube.level() * cube.dim()) * a) * mass;
}

double j_weight(const MeasureSpec& spec, const DyadicCube& cube, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("j_weight: a must be positive");
  return j_weight_from_mass(cube, cube_mass(spec, cube), a);
}

double Partition::max_j() const {
  double m = 0.0;
  for (const auto& c : cells) m = std::max(m, c.j);
  return m;
}

unsigned Partition::max_level() const {
  unsigned m = 0;
  for (const auto& c : cells) m = std::max(m, c.cube.level());
  return m;
}

std::map<unsigned, std::size_t> Partition::level_histogram() const {
  std::map<unsigned, std::size_t> h;
  for (const auto& c : cells) ++h[c.cube.level()];
  return h;
}

std::vector<std::string> Partition::check(const MeasureSpec& spec) const {
  std::vector<std::string> out;
  std::unordered_set<DyadicCube, DyadicCubeHash> seen;
  for (const auto& c : cells) {
    if (c.cube.dim() != dim) out.push_back("cell " + c.cube.to_string() + " has wrong dimension");
    if (!seen.insert(c.cube).second) out.push_back("duplicate cell " + c.cube.to_string());
  }
  for (const auto& c : cells) {
    for (unsigned lv = 0; lv < c.cube.level(); ++lv) {
      if (seen.count(c.cube.ancestor(lv))) {
        out.push_back("cell " + c.cube.to_string() + " overlaps its ancestor");
        break;
      }
    }
    const double j = j_weight(spec, c.cube, a);
    if (std::abs(j - c.j) > 1e-15 + 1e-12 * std::abs(j)) {
      out.push_back("stored J of " + c.cube.to_string() + " does not match recomputation");
    }
  }
  // Disjoint dyadic cubes cover Q exactly when their volumes sum to 1.
  const unsigned depth = max_level();
  if (depth * dim <= 62) {
    std::uint64_t total = 0;
    for (const auto& c : cells) total += std::uint64_t{1} << ((depth - c.cube.level()) * dim);
    if (total != (std::uint64_t{1} << (depth * dim))) out.push_back("cells do not cover the unit cube");
  } else {
    long double total = 0.0L;
    for (const auto& c : cells) total += static_cast<long double>(c.cube.volume());
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-15) {
      out.push_back("cells do not cover the unit cube");
    }
  }
  return out;
}

Partition uniform_partition(const MeasureSpec& spec, unsigned level, double a) {
  Partition p;
  p.dim = dimension(spec);
  p.a = a;
  std::vector<DyadicCube> frontier{DyadicCube::unit(p.dim)};
  for (unsigned n = 0; n < level; ++n) {
    std::vector<DyadicCube> next;
    for (const auto& c : frontier) {
      for (auto& ch : c.children()) next.push_back(ch);
    }
    frontier = std::move(next);
  }
  for (const auto& c : frontier) {
    const double m = cube_mass(spec, c);
    p.cells.push_back({c, m, j_weight_from_mass(c, m, a)});
  }
  sort_cells(p.cells);
  return p;
}

PartitionDepthError::PartitionDepthError(const DyadicCube& cube, double j, double t)
    : std::runtime_error("adaptive_partition: cube " + cube.to_string() + " with J = " +
                         std::to_string(j) + " >= t = " + std::to_string(t) +
                         " reached the maximum depth"),
      cube_(cube) {}

Partition adaptive_partition(const MeasureSpec& spec, double a, double t, unsigned max_depth) {
  if (!(a > 0.0)) throw std::invalid_argument("adaptive_partition: a must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("adaptive_partition: t must be positive");
  Partition p;
  p.dim = dimension(spec);
  p.a = a;
  const DyadicCube root = DyadicCube::unit(p.dim);
  std::vector<PartitionCell> stack{{root, cube_mass(spec, root), 0.0}};
  stack.back().j = j_weight_from_mass(root, stack.back().mass, a);
  while (!stack.empty()) {
    PartitionCell cell = stack.back();
    stack.pop_back();
    if (cell.j < t) {
      p.cells.push_back(cell);
      continue;
    }
    if (cell.cube.level() >= max_depth) throw PartitionDepthError(cell.cube, cell.j, t);
    for (unsigned sel = 0; sel < cell.cube.child_count(); ++sel) {
      const DyadicCube c = cell.cube.child(sel);
      const double m = cube_mass(spec, c);
      stack.push_back({c, m, j_weight_from_mass(c, m, a)});
    }
  }
  sort_cells(p.cells);
  return p;
}

std::size_t counting_N(const MeasureSpec& spec, double a, double t, unsigned max_depth) {
  if (!(t > 0.0)) throw std::invalid_argument("counting_N: t must be positive");
  return adaptive_partition(spec, a, 1.0 / t, max_depth).cardinality();
}

std::vector<double> dyadic_gamma_profile(const MeasureSpec& spec, double a, std::size_t max_cells,
                                         unsigned max_depth) {
  if (max_cells < 1) throw std::invalid_argument("dyadic_gamma_profile: budget must be >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("dyadic_gamma_profile: a must be positive");
  const DpContext ctx{spec, a, max_depth};
  const DyadicCube root = DyadicCube::unit(dimension(spec));
  auto f = dp_profile(ctx, root, cube_mass(spec, root), max_cells);
  std::vector<double> out(max_cells);
  for (std::size_t k = 1; k <= max_cells; ++k) out[k - 1] = at_budget(f, k);
  return out;
}

double gamma_dyadic_oracle(const MeasureSpec& spec, double a, std::size_t n_cells,
                           unsigned max_depth) {
  return dyadic_gamma_profile(spec, a, n_cells, max_depth).back();
}

std::optional<std::size_t> min_dyadic_cardinality(const MeasureSpec& spec, double a, double t,
                                                  unsigned max_depth, std::size_t max_cells) {
  const auto f = dyadic_gamma_profile(spec, a, max_cells, max_depth);
  for (std::size_t k = 1; k <= f.size(); ++k) {
    if (f[k - 1] < t) return k;
  }
  return std::nullopt;
}

Partition greedy_gamma_partition(const MeasureSpec& spec, double a, std::size_t n_cells) {
  if (n_cells < 1) throw std::invalid_argument("greedy_gamma_partition: budget must be >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("greedy_gamma_partition: a must be positive");
  Partition p;
  p.dim = dimension(spec);
  p.a = a;
  auto heavier = [](const PartitionCell& x, const PartitionCell& y) {
    if (x.j != y.j) return x.j < y.j;
    return y.cube < x.cube;  // deterministic tie-break: coarser / lower index first
  };
  std::priority_queue<PartitionCell, std::vector<PartitionCell>, decltype(heavier)> heap(heavier);
  const DyadicCube root = DyadicCube::unit(p.dim);
  const double root_mass = cube_mass(spec, root);
  heap.push({root, root_mass, j_weight_from_mass(root, root_mass, a)});
  std::size_t count = 1;
  const std::size_t grow = root.child_count() - 1;
  while (heap.top().j > 0.0 && count + grow <= n_cells && heap.top().cube.level() < kMaxLevel) {
    const PartitionCell top = heap.top();
    heap.pop();
    for (unsigned sel = 0; sel < top.cube.child_count(); ++sel) {
      const DyadicCube c = top.cube.child(sel);
      const double m = cube_mass(spec, c);
      heap.push({c, m, j_weight_from_mass(c, m, a)});
    }
    count += grow;
  }
  while (!heap.empty()) {
    p.cells.push_back(heap.top());
    heap.pop();
  }
  sort_cells(p.cells);
  return p;
}

double gamma_dyadic(const MeasureSpec& spec, double a, std::size_t n_cells) {
  return greedy_gamma_partition(spec, a, n_cells).max_j();
}

EntropyFit entropy_estimate(const MeasureSpec& spec, double a, std::span<const double> thresholds,
                            unsigned max_depth) {
  if (thresholds.size() < 4) throw std::invalid_argument("entropy_estimate: need at least 4 thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0)) throw std::invalid_argument("entropy_estimate: thresholds must be positive");
    if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
      throw std::invalid_argument("entropy_estimate: thresholds must strictly decrease");
    }
  }
  EntropyFit fit;
  fit.a = a;
  for (double tau : thresholds) {
    const Partition p = adaptive_partition(spec, a, tau, max_depth);
    fit.samples.push_back({1.0 / tau, p.cardinality(), p.max_j(), p.max_level()});
  }
  const std::size_t start = fit.samples.size() / 2;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = start; i < fit.samples.size(); ++i) {
    x.push_back(std::log(fit.samples[i].t));
    y.push_back(std::log(static_cast<double>(fit.samples[i].cardinality)));
  }
  fit.fit = fit_line(x, y);
  return fit;
}

std::vector<double> geometric_grid(double start, double factor, std::size_t count) {
  if (!(start > 0.0) || !(factor > 0.0) || factor == 1.0) {
    throw std::invalid_argument("geometric_grid: need start > 0 and factor > 0, != 1");
  }
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = start * std::pow(factor, static_cast<double>(i));
  return g;
}

nlohmann::json partition_to_json(const Partition& partition) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : partition.cells) {
    std::vector<std::uint64_t> idx(c.cube.indices().begin(), c.cube.indices().end());
    cells.push_back({{"level", c.cube.level()}, {"index", idx}, {"mass", c.mass}, {"J", c.j}});
  }
  return cells;
}

}  // namespace lqwidth
