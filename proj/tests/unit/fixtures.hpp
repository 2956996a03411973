#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lqwidth/measure.hpp"

namespace fixtures {

using namespace lqwidth;

inline Dyadic half(int k) { return Dyadic{k, 1}; }

inline MeasureSpec binomial(double p = 0.7) {
  return DyadicIFS{1, {DyadicMap{1, {half(0)}}, DyadicMap{1, {half(1)}}}, {p, 1.0 - p}};
}

inline DyadicIFS tetraeder(std::vector<double> weights) {
  return DyadicIFS{3,
                   {DyadicMap{1, {half(0), half(0), half(0)}}, DyadicMap{1, {half(1), half(1), half(0)}},
                    DyadicMap{1, {half(1), half(0), half(1)}}, DyadicMap{1, {half(0), half(1), half(1)}}},
                   std::move(weights)};
}

inline MeasureSpec fig1() { return tetraeder({0.659, 0.28, 0.001, 0.06}); }
inline MeasureSpec tetraeder_geometric() { return tetraeder({0.25, 0.25, 0.25, 0.25}); }

inline MeasureSpec cantor() {
  return GeneralIFS1D{{AffineMap1D{1.0 / 3.0, 0.0}, AffineMap1D{1.0 / 3.0, 2.0 / 3.0}}, {0.5, 0.5}};
}

inline MeasureSpec dirac_half() { return Atomic{1, {Atom{{0.5}, 1.0}}}; }

inline MeasureSpec atoms_1d(const std::vector<double>& points, const std::vector<double>& weights) {
  Atomic a{1, {}};
  for (std::size_t i = 0; i < points.size(); ++i) a.atoms.push_back(Atom{{points[i]}, weights[i]});
  return a;
}

/// Random normalized weights, each at least `floor` before normalization.
inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double floor = 0.02) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) s += (x = u(rng));
  for (auto& x : w) x /= s;
  return w;
}

/// Up to `max_atoms` distinct atoms on dyadic points of depth <= 8 in (0,1).
inline MeasureSpec random_atomic_1d(std::mt19937_64& rng, std::size_t max_atoms) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::uniform_int_distribution<int> idx(1, 255);
  const std::size_t n = count(rng);
  std::vector<double> pts;
  while (pts.size() < n) {
    const double x = idx(rng) / 256.0;
    if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.push_back(x);
  }
  return atoms_1d(pts, random_weights(rng, n));
}

/// Binomial-type DyadicIFS with random weights in dimension m (2^m corner maps).
inline MeasureSpec random_corner_ifs(std::mt19937_64& rng, std::size_t m) {
  DyadicIFS ifs{m, {}, random_weights(rng, std::size_t{1} << m)};
  for (std::size_t s = 0; s < (std::size_t{1} << m); ++s) {
    DyadicMap map{1, {}};
    for (std::size_t k = 0; k < m; ++k) map.offset.push_back(half(static_cast<int>((s >> k) & 1)));
    ifs.maps.push_back(map);
  }
  return ifs;
}

/// Cantor distribution function: independent oracle for the ratio-1/3 measure.
inline double cantor_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double value = 0.0;
  double scale = 0.5;
  for (int i = 0; i < 60; ++i) {
    x *= 3.0;
    const int digit = static_cast<int>(std::floor(x));
    x -= digit;
    if (digit == 1) return value + scale;
    if (digit == 2) value += scale;
    scale *= 0.5;
  }
  return value;
}

/// Root of 0.7^s + 0.3^s = 2^s by plain bisection.
inline double binomial_s1(double p = 0.7) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::pow(p, mid) + std::pow(1.0 - p, mid) > std::pow(2.0, mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace fixtures
