#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "lqwidth/measure.hpp"

using namespace lqwidth;
using namespace fixtures;

namespace {

DyadicCube cube(unsigned level, std::vector<std::uint64_t> idx) { return DyadicCube(level, idx); }

// Every level-n cube in dimension m, by brute enumeration.
std::vector<DyadicCube> all_cubes(std::size_t m, unsigned level) {
  std::vector<DyadicCube> out;
  const std::uint64_t side = std::uint64_t{1} << level;
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < m; ++k) total *= side;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<std::uint64_t> idx(m);
    std::uint64_t c = code;
    for (auto& i : idx) {
      i = c % side;
      c /= side;
    }
    out.emplace_back(level, idx);
  }
  return out;
}

std::vector<MeasureSpec> exact_specs(std::mt19937_64& rng) {
  std::vector<MeasureSpec> specs{Lebesgue{1}, Lebesgue{2}, binomial(), fig1(), dirac_half()};
  for (int i = 0; i < 3; ++i) specs.push_back(random_corner_ifs(rng, 1 + rng() % 3));
  for (int i = 0; i < 3; ++i) specs.push_back(random_atomic_1d(rng, 6));
  DyadicDensity dens{2, 2, {}};
  const auto w = random_weights(rng, 16);
  for (double x : w) dens.density.push_back(x * 16.0);
  specs.push_back(dens);
  specs.push_back(Mixture{{MixtureComponent{0.25, Lebesgue{1}}, MixtureComponent{0.75, binomial(0.6)}}});
  return specs;
}

}  // namespace

TEST_SUITE("measure") {
  TEST_CASE("cube masses of the reference measures") {
    CHECK(cube_mass(Lebesgue{1}, cube(3, {5})) == 0.125);
    CHECK(cube_mass(binomial(), cube(2, {3})) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(cube_mass(fig1(), cube(1, {0, 0, 0})) == doctest::Approx(0.659).epsilon(1e-15));
    CHECK(cube_mass(fig1(), cube(1, {1, 1, 1})) == 0.0);
  }

  TEST_CASE("support cubes") {
    CHECK(support_cubes(Lebesgue{1}, 2).size() == 4);
    CHECK(support_cubes(fig1(), 2).size() == 16);
    for (unsigned n : {1u, 4u, 9u}) {
      const auto s = support_cubes(dirac_half(), n);
      REQUIRE(s.size() == 1);
      const double half[] = {0.5};
      CHECK(s[0].contains_point(half));
    }
  }

  TEST_CASE("validation messages") {
    CHECK(validate(binomial()).empty());
    const MeasureSpec twins = DyadicIFS{1, {DyadicMap{1, {half(0)}}, DyadicMap{1, {half(0)}}}, {0.5, 0.5}};
    const auto v = validate(twins);
    REQUIRE_FALSE(v.empty());
    CHECK(v.front().find("images overlap") != std::string::npos);
    const MeasureSpec heavy = DyadicIFS{1, {DyadicMap{1, {half(0)}}, DyadicMap{1, {half(1)}}}, {0.5, 0.6}};
    bool named = false;
    for (const auto& s : validate(heavy)) named = named || s.find("weights sum to 1.1") != std::string::npos;
    CHECK(named);
    CHECK_THROWS_AS(require_valid(heavy), InvalidMeasure);
    const MeasureSpec off = DyadicIFS{1, {DyadicMap{1, {Dyadic{3, 1}}}}, {1.0}};
    CHECK_FALSE(validate(off).empty());
    const MeasureSpec cantor_overlap = GeneralIFS1D{{AffineMap1D{0.6, 0.0}, AffineMap1D{0.6, 0.4}}, {0.5, 0.5}};
    CHECK_FALSE(validate(cantor_overlap).empty());
    CHECK(validate(cantor()).empty());
  }

  TEST_CASE("additivity and total mass on exact specs") {
    std::mt19937_64 rng(3);
    for (const auto& spec : exact_specs(rng)) {
      REQUIRE(validate(spec).empty());
      const std::size_t m = dimension(spec);
      CHECK(cube_mass(spec, DyadicCube::unit(m)) == doctest::Approx(1.0).epsilon(1e-12));
      for (int trial = 0; trial < 60; ++trial) {
        const unsigned level = static_cast<unsigned>(rng() % 7);
        std::vector<std::uint64_t> idx(m);
        for (auto& i : idx) i = rng() % (std::uint64_t{1} << level);
        const DyadicCube c(level, idx);
        double sum = 0.0;
        for (const auto& k : c.children()) sum += cube_mass(spec, k);
        CHECK(std::abs(sum - cube_mass(spec, c)) <= 1e-12);
      }
    }
  }

  TEST_CASE("support matches brute-force enumeration") {
    std::mt19937_64 rng(5);
    for (const auto& spec : exact_specs(rng)) {
      const std::size_t m = dimension(spec);
      for (unsigned level : {1u, 3u}) {
        if (m == 3 && level == 3) continue;
        std::set<DyadicCube> expected;
        for (const auto& c : all_cubes(m, level)) {
          if (cube_mass(spec, c) > 0.0) expected.insert(c);
        }
        const auto got = support(spec, level);
        std::set<DyadicCube> got_set;
        for (const auto& wc : got) {
          CHECK(wc.mass > 0.0);
          CHECK(wc.mass == cube_mass(spec, wc.cube));
          got_set.insert(wc.cube);
        }
        CHECK(got_set == expected);
        CHECK(got.size() == got_set.size());
      }
    }
  }

  TEST_CASE("dyadic IFS self-similarity, binomial preimages") {
    const auto spec = binomial();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const unsigned n = static_cast<unsigned>(rng() % 10);
      const std::uint64_t l = rng() % (std::uint64_t{2} << n);
      const DyadicCube c(n + 1, std::vector<std::uint64_t>{l});
      const bool left = l < (std::uint64_t{1} << n);
      const DyadicCube pre(n, std::vector<std::uint64_t>{left ? l : l - (std::uint64_t{1} << n)});
      CHECK(cube_mass(spec, c) == doctest::Approx((left ? 0.7 : 0.3) * cube_mass(spec, pre)).epsilon(1e-14));
    }
  }

  TEST_CASE("ratio-1/3 Cantor masses follow the Cantor function") {
    const auto spec = cantor();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      const unsigned n = static_cast<unsigned>(rng() % 12);
      const std::uint64_t l = rng() % (std::uint64_t{1} << n);
      const DyadicCube c(n, std::vector<std::uint64_t>{l});
      const double expected = cantor_cdf(c.upper(0)) - cantor_cdf(c.lower(0));
      // 1/3 and 2/3 are rounded to double, which shifts the measure by the
      // Cantor modulus of ~1e-16, about 1e-10 in mass.
      CHECK(std::abs(cube_mass(spec, c) - expected) <= 2e-10);
      double sum = 0.0;
      for (const auto& k : c.children()) sum += cube_mass(spec, k);
      CHECK(std::abs(sum - cube_mass(spec, c)) <= 2e-12);
    }
    CHECK(is_exact(binomial()));
    CHECK_FALSE(is_exact(spec));
  }

  TEST_CASE("general 1D IFS within tolerance of an exact dyadic twin") {
    // Ratio 1/4 maps are exact in binary, so the DyadicIFS masses are an oracle.
    const MeasureSpec general = GeneralIFS1D{{AffineMap1D{0.25, 0.0}, AffineMap1D{0.25, 0.75}}, {0.6, 0.4}};
    const MeasureSpec exact = DyadicIFS{1, {DyadicMap{2, {Dyadic{0, 0}}}, DyadicMap{2, {Dyadic{3, 2}}}}, {0.6, 0.4}};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const unsigned n = static_cast<unsigned>(rng() % 16);
      const DyadicCube c(n, std::vector<std::uint64_t>{rng() % (std::uint64_t{1} << n)});
      CHECK(std::abs(cube_mass(general, c) - cube_mass(exact, c)) <= 2e-12);
    }
  }

  TEST_CASE("exp-harmonic generator") {
    const auto a = exp_harmonic_atoms(30);
    REQUIRE(a.atoms.size() == 30);
    double total = 0.0;
    for (const auto& at : a.atoms) total += at.weight;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.atoms[0].point[0] == 1.0);
    CHECK(a.atoms[1].weight / a.atoms[0].weight == doctest::Approx(std::exp(-1.0)));
    CHECK(validate(MeasureSpec(a)).empty());
  }

  TEST_CASE("sampling follows the cube masses") {
    std::mt19937_64 rng(13);
    const std::vector<MeasureSpec> specs{binomial(), fig1(), cantor(), dirac_half()};
    for (const auto& spec : specs) {
      const std::size_t m = dimension(spec);
      std::map<DyadicCube, int> hits;
      const int n = 40000;
      for (int i = 0; i < n; ++i) {
        const auto x = sample_point(spec, rng);
        REQUIRE(x.size() == m);
        hits[DyadicCube::containing(x, 2)]++;
      }
      for (const auto& wc : support(spec, 2)) {
        const double p = wc.mass;
        const double se = std::sqrt(p * (1 - p) / n);
        CHECK(std::abs(hits[wc.cube] / double(n) - p) <= 5 * se + 1e-12);
      }
    }
  }
}
