#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lqwidth/spectrum.hpp"

using namespace lqwidth;
using namespace fixtures;

namespace {

// Direct sum over brute-force cubes, no log-space tricks.
double beta_direct(const MeasureSpec& spec, unsigned level, double s) {
  double sum = 0.0;
  for (const auto& wc : support(spec, level)) sum += std::pow(wc.mass, s);
  return std::log2(sum) / level;
}

// Root of sum (p_i r_i^rho)^s = 1 by a fine scan and then bisection.
double s_rho_scan(const std::vector<double>& p, const std::vector<double>& r, double rho) {
  auto g = [&](double s) {
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) v += std::pow(p[i] * std::pow(r[i], rho), s);
    return v - 1.0;
  };
  double lo = 0.0;
  for (int i = 1; i <= 10000; ++i) {
    if (g(i / 10000.0) <= 0.0) break;
    lo = i / 10000.0;
  }
  double hi = lo + 1e-4;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("spectrum") {
  TEST_CASE("finite-level spectra of reference measures") {
    for (unsigned n : {1u, 3u, 7u}) {
      for (double s : {0.0, 0.5, 1.3, 2.0}) {
        CHECK(beta_n(Lebesgue{1}, n, s) == doctest::Approx(1.0 - s).epsilon(1e-14));
        CHECK(beta_n(binomial(), n, 2.0) == doctest::Approx(std::log2(0.58)).epsilon(1e-13));
        CHECK(beta_n(dirac_half(), n, s) == 0.0);
      }
    }
    CHECK(std::log2(0.58) == doctest::Approx(-0.7859).epsilon(1e-4));
  }

  TEST_CASE("log-space sum agrees with the direct sum") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const auto spec = trial % 2 ? random_corner_ifs(rng, 2) : random_atomic_1d(rng, 6);
      const unsigned n = 1 + static_cast<unsigned>(rng() % 5);
      const double s = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      CHECK(beta_n(spec, n, s) == doctest::Approx(beta_direct(spec, n, s)).epsilon(1e-12));
    }
  }

  TEST_CASE("no underflow for tiny masses") {
    // Every term 0.659^(6 s) and below underflows a naive sum at s = 400.
    const double b = beta_n(fig1(), 6, 400.0);
    CHECK(std::isfinite(b));
    std::vector<double> w{0.659, 0.28, 0.001, 0.06};
    std::vector<double> r(4, 0.5);
    CHECK(b == doctest::Approx(selfsimilar_beta(w, r, 400.0)).epsilon(1e-9));
  }

  TEST_CASE("fixed points s_nb") {
    CHECK(s_nb(Lebesgue{1}, 5, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s_nb(dirac_half(), 5, 1.0) == 0.0);
    std::vector<double> w{0.659, 0.28, 0.001, 0.06};
    std::vector<double> r(4, 0.5);
    CHECK(std::abs(s_nb(fig1(), 8, 2.0) - selfsimilar_s_rho(w, r, 2.0)) < 1e-9);
  }

  TEST_CASE("tail estimates") {
    const unsigned levels[] = {1, 2, 3, 4, 5, 6};
    const auto leb = s_b_estimate(Lebesgue{3}, 2.0, levels);
    for (double root : leb.roots) CHECK(std::abs(root - 0.6) < 1e-10);
    CHECK(std::abs(leb.estimate - 0.6) < 1e-10);

    const auto bin = s_b_estimate(binomial(), 1.0, levels);
    CHECK(std::abs(bin.estimate - binomial_s1()) < 1e-9);
    CHECK(bin.estimate == doctest::Approx(0.485).epsilon(0.002));
    for (double res : bin.residuals) CHECK(std::abs(res) < 1e-9);

    // Remark-type measure: estimates drift towards 0 as the level grows.
    const unsigned deep[] = {4, 8, 12, 16, 20};
    const auto eh = s_b_estimate(exp_harmonic_atoms(30), 1.0, deep);
    for (std::size_t i = 1; i < eh.roots.size(); ++i) CHECK(eh.roots[i] < eh.roots[i - 1]);
    CHECK(eh.roots.back() < 0.2);
  }

  TEST_CASE("self-similar spectra") {
    std::vector<double> w{0.659, 0.28, 0.001, 0.06};
    std::vector<double> r(4, 0.5);
    CHECK(selfsimilar_beta(w, r, 0.0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(std::abs(selfsimilar_beta(w, r, 1.0)) < 1e-12);
    std::vector<double> bw{0.7, 0.3}, br{0.5, 0.5};
    // 0.58 * 2^-beta = 1.
    CHECK(selfsimilar_beta(bw, br, 2.0) == doctest::Approx(std::log2(0.58)).epsilon(1e-12));

    std::vector<double> quarter(4, 0.25);
    CHECK(selfsimilar_s_rho(quarter, r, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    std::vector<double> halves{0.5, 0.5};
    CHECK(selfsimilar_s_rho(halves, br, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(selfsimilar_s_rho(w, r, 2.0) == doctest::Approx(s_rho_scan(w, r, 2.0)).epsilon(1e-12));

    std::vector<double> third{1.0 / 3, 1.0 / 3};
    const double delta = similarity_dimension(third);
    CHECK(delta == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-12));
    CHECK(selfsimilar_s_rho(halves, third, 1.0) == doctest::Approx(delta / (1 + delta)).epsilon(1e-12));
  }

  TEST_CASE("geometric weights give delta/(rho+delta)") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng() % 4;
      std::vector<double> r(n);
      for (auto& x : r) x = std::uniform_real_distribution<double>(0.05, 1.0 / n)(rng);
      const double delta = similarity_dimension(r);
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = std::pow(r[i], delta);
      const double rho = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
      CHECK(selfsimilar_s_rho(p, r, rho) == doctest::Approx(delta / (rho + delta)).epsilon(1e-9));
    }
  }

  TEST_CASE("order bounds") {
    const auto leb = order_bound({2, 2, 1, 1}, 0.5);
    CHECK(leb.bound == doctest::Approx(-1.0));
    CHECK(leb.classical == doctest::Approx(-1.0));
    const auto tet = order_bound({2, 2, 2, 3}, 2.0 / 3.0);
    CHECK(OrderParams{2, 2, 2, 3}.rho() == doctest::Approx(1.0));
    CHECK(tet.bound == doctest::Approx(-0.75));
    CHECK(tet.classical == doctest::Approx(-2.0 / 3.0));
    CHECK(tet.bound < tet.classical);
    try {
      order_bound({2, 2, 1, 3}, 0.5);
      FAIL("expected the standing assumption to fail");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("rho") != std::string::npos);
    }
    CHECK_THROWS_AS(OrderParams({1.0, 2, 1, 1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(OrderParams({3, 2, 1, 1}).validate(), std::invalid_argument);
  }

  TEST_CASE("invariants on random measures") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
      MeasureSpec spec;
      switch (trial % 3) {
        case 0: spec = random_corner_ifs(rng, 1 + rng() % 2); break;
        case 1: spec = random_atomic_1d(rng, 6); break;
        default: spec = Mixture{{MixtureComponent{0.5, Lebesgue{1}}, MixtureComponent{0.5, random_atomic_1d(rng, 3)}}};
      }
      const unsigned n = 1 + static_cast<unsigned>(rng() % 6);
      const LevelSpectrum ls(spec, n);
      CHECK(std::abs(ls.beta(1.0)) < 1e-10);
      const double b0 = ls.beta(0.0);
      const double h = 0.05;
      for (int i = 0; i <= 40; ++i) {
        const double s = i * h;
        if (i >= 1 && i < 40) {
          CHECK(ls.beta(s - h) - 2 * ls.beta(s) + ls.beta(s + h) >= -1e-9);
        }
        if (s <= 1.0) CHECK(ls.beta(s) <= b0 * (1 - s) + 1e-9);
        if (i >= 1) CHECK(ls.beta(s) <= ls.beta(s - h) + 1e-12);
      }
      double prev = 1.0;
      for (double b = 0.1; b <= 5.0; b += 0.1) {
        const double root = ls.fixed_point(b).x;
        CHECK(root >= 0.0);
        CHECK(root <= prev + 1e-12);
        CHECK(std::abs(ls.beta(root) - b * root) < 1e-8);
        prev = root;
      }
    }
  }

  TEST_CASE("dyadic IFS spectra are level-independent") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t m = 1 + rng() % 3;
      const auto spec = random_corner_ifs(rng, m);
      const auto& ifs = std::get<DyadicIFS>(spec.value);
      std::vector<double> r(ifs.weights.size(), 0.5);
      for (double s : {0.0, 0.3, 1.7, 3.0}) {
        const double ref = selfsimilar_beta(ifs.weights, r, s);
        for (unsigned n = 1; n <= (m == 3 ? 4u : 6u); ++n) CHECK(std::abs(beta_n(spec, n, s) - ref) < 1e-9);
      }
    }
  }

  TEST_CASE("order bound never exceeds the classical order") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 200) {
      OrderParams prm{1.01 + 3 * u(rng), 0, static_cast<double>(1 + rng() % 3), static_cast<double>(1 + rng() % 3)};
      prm.q = prm.p + 3 * u(rng);
      try {
        prm.validate();
      } catch (const std::invalid_argument&) {
        continue;
      }
      // Any admissible s_rho lies in (0, m/(m+rho)] since beta(0) <= m.
      const double s = prm.m / (prm.m + prm.rho()) * (0.05 + 0.95 * u(rng));
      const auto ob = order_bound(prm, s);
      CHECK(ob.bound <= ob.classical + 1e-12);
      ++checked;
    }
  }
}
