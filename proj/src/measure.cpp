#include "lqwidth/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace lqwidth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_weights(const std::vector<double>& w, const std::string& what,
                   std::vector<std::string>& out) {
  if (w.empty()) {
    out.push_back(what + " must be non-empty");
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      out.push_back(what + "[" + std::to_string(i) + "] = " + fmt_double(w[i]) +
                    " must be positive");
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    out.push_back(what + " sum to " + fmt_double(sum) + ", expected 1");
  }
}

void check_dim(std::size_t dim, std::vector<std::string>& out) {
  if (dim < 1 || dim > kMaxDim) {
    out.push_back("dimension " + std::to_string(dim) + " outside [1, " +
                  std::to_string(kMaxDim) + "]");
  }
}

// Image T(Q) of a dyadic map as a cube at level ratio_exp, or nothing if the
// offset is off-grid or out of range.
bool image_cube(const DyadicMap& map, std::size_t dim, DyadicCube& out) {
  if (map.offset.size() != dim || map.ratio_exp < 1 || map.ratio_exp > kMaxLevel) return false;
  std::array<std::uint64_t, kMaxDim> idx{};
  const std::uint64_t bound = std::uint64_t{1} << map.ratio_exp;
  for (std::size_t k = 0; k < dim; ++k) {
    const Dyadic d = map.offset[k].reduced();
    if (d.num < 0 || d.log2_den > static_cast<int>(map.ratio_exp)) return false;
    const auto shifted = static_cast<std::uint64_t>(d.num)
                         << (map.ratio_exp - static_cast<unsigned>(d.log2_den));
    if (shifted >= bound) return false;
    idx[k] = shifted;
  }
  out = DyadicCube(map.ratio_exp, std::span<const std::uint64_t>(idx.data(), dim));
  return true;
}

double dyadic_ifs_mass(const DyadicIFS& ifs, const std::vector<DyadicCube>& images,
                       const DyadicCube& cube) {
  if (cube.level() == 0) return 1.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const DyadicCube& img = images[i];
    if (cube.level() <= img.level()) {
      if (cube.contains(img)) mass += ifs.weights[i];
      continue;
    }
    if (!img.contains(cube)) continue;
    // Preimage T_i^-1(cube): strip the image prefix from the index.
    const unsigned rel = cube.level() - img.level();
    std::array<std::uint64_t, kMaxDim> idx{};
    for (std::size_t k = 0; k < cube.dim(); ++k) {
      idx[k] = cube.index(k) - (img.index(k) << rel);
    }
    const DyadicCube pre(rel, std::span<const std::uint64_t>(idx.data(), cube.dim()));
    mass += ifs.weights[i] * dyadic_ifs_mass(ifs, images, pre);
  }
  return mass;
}

// nu((lo, hi]) for the self-similar measure on [0,1]; branch_weight is the
// product of weights along the current cylinder.
double ifs1d_interval_mass(const GeneralIFS1D& ifs, double lo, double hi, double branch_weight) {
  if (hi <= 0.0 || lo >= 1.0 || hi <= lo) return 0.0;
  if (lo <= 0.0 && hi >= 1.0) return 1.0;
  // Unresolved partial cylinder: the midpoint guess is off by at most half its weight.
  if (branch_weight < ifs.tolerance) return 0.5;
  double mass = 0.0;
  for (std::size_t i = 0; i < ifs.maps.size(); ++i) {
    const auto& map = ifs.maps[i];
    const double a = (lo - map.offset) / map.ratio;
    const double b = (hi - map.offset) / map.ratio;
    if (b <= 0.0 || a >= 1.0) continue;
    mass += ifs.weights[i] *
            ifs1d_interval_mass(ifs, a, b, branch_weight * ifs.weights[i]);
  }
  return mass;
}

std::size_t density_flat_index(const DyadicCube& c, unsigned depth) {
  std::size_t flat = 0;
  for (std::size_t k = c.dim(); k-- > 0;) {
    flat = (flat << depth) + static_cast<std::size_t>(c.index(k));
  }
  return flat;
}

double density_mass(const DyadicDensity& d, const DyadicCube& cube) {
  if (cube.level() >= d.depth) {
    const DyadicCube anc = cube.ancestor(d.depth);
    return d.density[density_flat_index(anc, d.depth)] * cube.volume();
  }
  // Sum the level-depth cells inside the cube.
  const unsigned rel = d.depth - cube.level();
  const std::uint64_t span = std::uint64_t{1} << rel;
  const double cell_volume = std::ldexp(1.0, -static_cast<int>(d.depth * d.dim));
  std::array<std::uint64_t, kMaxDim> offset{};
  double mass = 0.0;
  while (true) {
    std::array<std::uint64_t, kMaxDim> idx{};
    for (std::size_t k = 0; k < d.dim; ++k) idx[k] = (cube.index(k) << rel) + offset[k];
    const DyadicCube cell(d.depth, std::span<const std::uint64_t>(idx.data(), d.dim));
    mass += d.density[density_flat_index(cell, d.depth)] * cell_volume;
    std::size_t k = 0;
    while (k < d.dim && ++offset[k] == span) offset[k++] = 0;
    if (k == d.dim) break;
  }
  return mass;
}

std::vector<DyadicCube> ifs_images(const DyadicIFS& ifs) {
  std::vector<DyadicCube> images(ifs.maps.size());
  for (std::size_t i = 0; i < ifs.maps.size(); ++i) {
    if (!image_cube(ifs.maps[i], ifs.dim, images[i])) {
      throw InvalidMeasure({"map " + std::to_string(i) + " has an out-of-range offset"});
    }
  }
  return images;
}

}  // namespace

InvalidMeasure::InvalidMeasure(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid measure spec:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::size_t dimension(const MeasureSpec& spec) {
  return std::visit(
      overloaded{
          [](const Lebesgue& s) { return s.dim; },
          [](const DyadicIFS& s) { return s.dim; },
          [](const GeneralIFS1D&) { return std::size_t{1}; },
          [](const Atomic& s) { return s.dim; },
          [](const DyadicDensity& s) { return s.dim; },
          [](const Mixture& s) {
            return s.components.empty() ? std::size_t{0} : dimension(s.components.front().spec);
          },
      },
      spec.value);
}

std::string type_name(const MeasureSpec& spec) {
  static const char* names[] = {"lebesgue", "dyadic_ifs", "ifs_1d",
                                "atomic", "dyadic_density", "mixture"};
  return names[spec.value.index()];
}

std::vector<std::string> validate(const MeasureSpec& spec) {
  std::vector<std::string> out;
  std::visit(
      overloaded{
          [&](const Lebesgue& s) { check_dim(s.dim, out); },
          [&](const DyadicIFS& s) {
            check_dim(s.dim, out);
            if (s.maps.empty()) out.push_back("dyadic_ifs needs at least one map");
            if (s.weights.size() != s.maps.size()) {
              out.push_back("weights has " + std::to_string(s.weights.size()) +
                            " entries for " + std::to_string(s.maps.size()) + " maps");
            }
            check_weights(s.weights, "weights", out);
            if (!out.empty() && (s.dim < 1 || s.dim > kMaxDim)) return;
            std::vector<DyadicCube> images;
            for (std::size_t i = 0; i < s.maps.size(); ++i) {
              DyadicCube img;
              if (s.maps[i].ratio_exp < 1 || s.maps[i].ratio_exp > kMaxLevel) {
                out.push_back("map " + std::to_string(i) + " ratio exponent must be in [1, " +
                              std::to_string(kMaxLevel) + "]");
              } else if (!image_cube(s.maps[i], s.dim, img)) {
                out.push_back("map " + std::to_string(i) +
                              " has an out-of-range offset (must lie on the 2^-e grid inside [0,1))");
              } else {
                images.push_back(img);
                continue;
              }
              images.emplace_back();
            }
            for (std::size_t i = 0; i < images.size(); ++i) {
              for (std::size_t j = i + 1; j < images.size(); ++j) {
                if (images[i].level() == 0 || images[j].level() == 0) continue;
                if (!images[i].disjoint(images[j])) {
                  out.push_back("images overlap: maps " + std::to_string(i) + " and " +
                                std::to_string(j));
                }
              }
            }
          },
          [&](const GeneralIFS1D& s) {
            if (s.maps.empty()) out.push_back("ifs_1d needs at least one map");
            if (s.weights.size() != s.maps.size()) {
              out.push_back("weights has " + std::to_string(s.weights.size()) +
                            " entries for " + std::to_string(s.maps.size()) + " maps");
            }
            check_weights(s.weights, "weights", out);
            if (!(s.tolerance > 0.0)) out.push_back("tolerance must be positive");
            std::vector<std::pair<double, double>> imgs;
            for (std::size_t i = 0; i < s.maps.size(); ++i) {
              const auto& m = s.maps[i];
              if (!(m.ratio > 0.0 && m.ratio < 1.0)) {
                out.push_back("map " + std::to_string(i) + " ratio must be in (0,1)");
              }
              if (!(m.offset >= 0.0 && m.offset + m.ratio <= 1.0)) {
                out.push_back("map " + std::to_string(i) + " image leaves [0,1]");
              }
              imgs.emplace_back(m.offset, m.offset + m.ratio);
            }
            std::sort(imgs.begin(), imgs.end());
            for (std::size_t i = 1; i < imgs.size(); ++i) {
              if (imgs[i].first < imgs[i - 1].second) out.push_back("images overlap");
            }
          },
          [&](const Atomic& s) {
            check_dim(s.dim, out);
            std::vector<double> w;
            for (std::size_t i = 0; i < s.atoms.size(); ++i) {
              const auto& a = s.atoms[i];
              w.push_back(a.weight);
              if (a.point.size() != s.dim) {
                out.push_back("atom " + std::to_string(i) + " has wrong dimension");
                continue;
              }
              for (double x : a.point) {
                if (!(x > 0.0 && x <= 1.0)) {
                  out.push_back("atom " + std::to_string(i) + " lies outside (0,1]^m");
                  break;
                }
              }
            }
            check_weights(w, "weights", out);
          },
          [&](const DyadicDensity& s) {
            check_dim(s.dim, out);
            if (!out.empty()) return;
            if (s.depth * s.dim > 40) {
              out.push_back("density grid too fine");
              return;
            }
            const std::size_t cells = std::size_t{1} << (s.depth * s.dim);
            if (s.density.size() != cells) {
              out.push_back("density has " + std::to_string(s.density.size()) +
                            " values, expected " + std::to_string(cells));
              return;
            }
            double sum = 0.0;
            for (double v : s.density) {
              if (!(v >= 0.0) || !std::isfinite(v)) {
                out.push_back("density values must be finite and non-negative");
                return;
              }
              sum += v;
            }
            const double total = sum / static_cast<double>(cells);
            if (std::abs(total - 1.0) > kNormalizationTolerance) {
              out.push_back("density integrates to " + fmt_double(total) + ", expected 1");
            }
          },
          [&](const Mixture& s) {
            if (s.components.empty()) {
              out.push_back("mixture needs at least one component");
              return;
            }
            double sum = 0.0;
            const std::size_t dim0 = dimension(s.components.front().spec);
            for (std::size_t i = 0; i < s.components.size(); ++i) {
              const auto& c = s.components[i];
              if (!(c.coefficient >= 0.0)) {
                out.push_back("component " + std::to_string(i) + " has negative coefficient");
              }
              sum += c.coefficient;
              if (dimension(c.spec) != dim0) {
                out.push_back("component " + std::to_string(i) + " dimension mismatch");
              }
              for (const auto& v : validate(c.spec)) {
                out.push_back("component " + std::to_string(i) + ": " + v);
              }
            }
            if (std::abs(sum - 1.0) > kNormalizationTolerance) {
              out.push_back("coefficients sum to " + fmt_double(sum) + ", expected 1");
            }
          },
      },
      spec.value);
  return out;
}

void require_valid(const MeasureSpec& spec) {
  auto v = validate(spec);
  if (!v.empty()) throw InvalidMeasure(std::move(v));
}

bool is_exact(const MeasureSpec& spec) {
  if (std::holds_alternative<GeneralIFS1D>(spec.value)) return false;
  if (const auto* mix = std::get_if<Mixture>(&spec.value)) {
    return std::all_of(mix->components.begin(), mix->components.end(),
                       [](const MixtureComponent& c) { return is_exact(c.spec); });
  }
  return true;
}

std::vector<DyadicCube> children(const DyadicCube& cube) { return cube.children(); }

double cube_mass(const MeasureSpec& spec, const DyadicCube& cube) {
  if (cube.dim() != dimension(spec)) {
    throw std::invalid_argument("cube_mass: cube dimension " + std::to_string(cube.dim()) +
                                " does not match measure dimension " +
                                std::to_string(dimension(spec)));
  }
  return std::visit(
      overloaded{
          [&](const Lebesgue&) { return cube.volume(); },
          [&](const DyadicIFS& s) { return dyadic_ifs_mass(s, ifs_images(s), cube); },
          [&](const GeneralIFS1D& s) {
            return ifs1d_interval_mass(s, cube.lower(0), cube.upper(0), 1.0);
          },
          [&](const Atomic& s) {
            double mass = 0.0;
            for (const auto& a : s.atoms) {
              if (cube.contains_point(a.point)) mass += a.weight;
            }
            return mass;
          },
          [&](const DyadicDensity& s) { return density_mass(s, cube); },
          [&](const Mixture& s) {
            double mass = 0.0;
            for (const auto& c : s.components) {
              if (c.coefficient > 0.0) mass += c.coefficient * cube_mass(c.spec, cube);
            }
            return mass;
          },
      },
      spec.value);
}

std::vector<WeightedCube> support(const MeasureSpec& spec, unsigned level) {
  const std::size_t dim = dimension(spec);
  if (level > kMaxLevel) throw std::invalid_argument("support: level too deep");

  if (const auto* atomic = std::get_if<Atomic>(&spec.value)) {
    std::unordered_map<DyadicCube, double, DyadicCubeHash> acc;
    for (const auto& a : atomic->atoms) acc[DyadicCube::containing(a.point, level)] += a.weight;
    std::vector<WeightedCube> out;
    out.reserve(acc.size());
    for (const auto& [c, m] : acc) {
      if (m > 0.0) out.push_back({c, m});
    }
    std::sort(out.begin(), out.end(),
              [](const WeightedCube& a, const WeightedCube& b) { return a.cube < b.cube; });
    return out;
  }

  std::vector<WeightedCube> frontier{{DyadicCube::unit(dim), cube_mass(spec, DyadicCube::unit(dim))}};
  if (frontier.front().mass <= 0.0) frontier.clear();
  for (unsigned n = 0; n < level; ++n) {
    std::vector<WeightedCube> next;
    next.reserve(frontier.size() * 2);
    for (const auto& wc : frontier) {
      for (unsigned sel = 0; sel < wc.cube.child_count(); ++sel) {
        DyadicCube c = wc.cube.child(sel);
        const double m = cube_mass(spec, c);
        if (m > 0.0) next.push_back({c, m});
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

std::vector<DyadicCube> support_cubes(const MeasureSpec& spec, unsigned level) {
  auto weighted = support(spec, level);
  std::vector<DyadicCube> out;
  out.reserve(weighted.size());
  for (auto& wc : weighted) out.push_back(wc.cube);
  return out;
}

Atomic exp_harmonic_atoms(unsigned cutoff) {
  if (cutoff < 1) throw std::invalid_argument("exp_harmonic_atoms: cutoff must be >= 1");
  Atomic out;
  out.dim = 1;
  double total = 0.0;
  for (unsigned k = 1; k <= cutoff; ++k) total += std::exp(-static_cast<double>(k));
  for (unsigned k = 1; k <= cutoff; ++k) {
    out.atoms.push_back({{1.0 / k}, std::exp(-static_cast<double>(k)) / total});
  }
  return out;
}

std::vector<double> sample_point(const MeasureSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Maps [0,1) onto (0,1].
  auto open_left = [&] { return 1.0 - unif(rng); };
  return std::visit(
      overloaded{
          [&](const Lebesgue& s) {
            std::vector<double> x(s.dim);
            for (auto& v : x) v = open_left();
            return x;
          },
          [&](const DyadicIFS& s) {
            std::discrete_distribution<std::size_t> pick(s.weights.begin(), s.weights.end());
            std::vector<double> x(s.dim, 0.0);
            double scale = 1.0;
            while (scale > 1e-17) {
              const auto& map = s.maps[pick(rng)];
              for (std::size_t k = 0; k < s.dim; ++k) x[k] += scale * map.offset[k].value();
              scale = std::ldexp(scale, -static_cast<int>(map.ratio_exp));
            }
            for (auto& v : x) v = std::clamp(v + scale * open_left(), 1e-300, 1.0);
            return x;
          },
          [&](const GeneralIFS1D& s) {
            std::discrete_distribution<std::size_t> pick(s.weights.begin(), s.weights.end());
            double x = 0.0;
            double scale = 1.0;
            while (scale > 1e-17) {
              const auto& map = s.maps[pick(rng)];
              x += scale * map.offset;
              scale *= map.ratio;
            }
            return std::vector<double>{std::clamp(x + scale * open_left(), 1e-300, 1.0)};
          },
          [&](const Atomic& s) {
            std::vector<double> w;
            for (const auto& a : s.atoms) w.push_back(a.weight);
            std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
            return s.atoms[pick(rng)].point;
          },
          [&](const DyadicDensity& s) {
            std::discrete_distribution<std::size_t> pick(s.density.begin(), s.density.end());
            std::size_t flat = pick(rng);
            const std::uint64_t mask = (std::uint64_t{1} << s.depth) - 1;
            std::vector<double> x(s.dim);
            for (std::size_t k = 0; k < s.dim; ++k) {
              const auto idx = static_cast<double>(flat & mask);
              flat >>= s.depth;
              x[k] = std::ldexp(idx + open_left(), -static_cast<int>(s.depth));
            }
            return x;
          },
          [&](const Mixture& s) {
            std::vector<double> w;
            for (const auto& c : s.components) w.push_back(c.coefficient);
            std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
            return sample_point(s.components[pick(rng)].spec, rng);
          },
      },
      spec.value);
}

}  // namespace lqwidth
