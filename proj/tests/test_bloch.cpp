#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ccband/bloch.hpp"

using namespace ccband;

namespace {

std::vector<double> sorted_folded_energies(double q, double kb, int n) {
  std::vector<double> e;
  for (int m = -n; m <= n; ++m) e.push_back(std::pow(q + m * kb, 2));
  std::sort(e.begin(), e.end());
  return e;
}

} // namespace

TEST_CASE("build_hq hand-evaluated 3x3 at q=0") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto m = build_hq(f, 0.0, 1);
  double kb2 = 4.0 * M_PI * M_PI;
  CHECK(std::abs(m.entries(0, 0) - kb2) < 1e-12);
  CHECK(std::abs(m.entries(1, 1)) < 1e-12);
  CHECK(std::abs(m.entries(2, 2) - kb2) < 1e-12);
  CHECK(std::abs(m.entries(1, 0) - 0.2) < 1e-15); // H_{0,-1}
  CHECK(std::abs(m.entries(2, 1) - 0.2) < 1e-15); // H_{1,0}
  // everything else zero
  double off = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && !(i == j + 1)) off += std::abs(m.entries(i, j));
  CHECK(off == 0.0);
}

TEST_CASE("free particle matrix is diagonal") {
  PotentialFamily free(1.0, {}, {}, 0.0);
  auto m = build_hq(free, 0.7, 2);
  double kb = 2.0 * M_PI;
  for (int i = 0; i < 5; ++i) {
    int n = i - 2;
    CHECK(std::abs(m.entries(i, i) - std::pow(0.7 + n * kb, 2)) < 1e-12);
  }
  CHECK(m.entries.cwiseAbs().sum() ==
        Catch::Approx(m.entries.diagonal().cwiseAbs().sum()));
}

TEST_CASE("build_hq input validation") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  CHECK_THROWS_AS(build_hq(f, 4.0, 8), std::invalid_argument);  // outside zone
  CHECK_THROWS_AS(build_hq(f, 0.0, 0), std::invalid_argument);  // N < support
}

TEST_CASE("lambda=1 eigenvalues equal the matrix diagonal") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  double kb = 2.0 * M_PI;
  double q = 0.2 * kb;
  auto s = band_solve(build_hq(f, q, 8));
  auto expect = sorted_folded_energies(q, kb, 8);
  for (int i = 0; i < (int)expect.size(); ++i) {
    CHECK(std::abs(s.eigenvalues[i].real() - expect[i]) < 1e-8);
    CHECK(std::abs(s.eigenvalues[i].imag()) < 1e-8);
  }
}

TEST_CASE("hermitian lattice: real spectrum, kappa = 1") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 0.0);
  auto s = band_solve(build_hq(f, 0.3, 8));
  for (auto e : s.eigenvalues) CHECK(std::abs(e.imag()) < 1e-10);
  for (double k : s.kappa) CHECK(k > 0.99);
}

TEST_CASE("defective 3x3 pair: algebraic 2, geometric 1, kappa collapse") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto m = build_hq(f, 0.0, 1);
  double kb2 = 4.0 * M_PI * M_PI;

  // independent rank oracle: nullity of (H - kb2 I) by SVD
  Eigen::MatrixXcd shifted = m.entries - kb2 * Eigen::MatrixXcd::Identity(3, 3);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
  int nullity = 0;
  for (int i = 0; i < 3; ++i)
    if (svd.singularValues()(i) < 1e-10 * svd.singularValues()(0)) ++nullity;
  REQUIRE(nullity == 1);

  auto s = band_solve(m);
  // algebraic multiplicity 2 at E = kb^2
  int count = 0;
  double kappa_pair = 1.0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(s.eigenvalues[i] - kb2) < 1e-6) {
      ++count;
      kappa_pair = std::min(kappa_pair, s.kappa[i]);
    }
  CHECK(count == 2);
  CHECK(kappa_pair < 1e-6);
}

TEST_CASE("band structure: folded parabolas at and below threshold") {
  double kb = 2.0 * M_PI;
  auto grid = zone_grid(1.0, 101);

  SECTION("lambda=1 matches folded free dispersion") {
    auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
    auto table = band_structure(f, 24, grid, 2);
    for (auto const& p : table) {
      auto expect = sorted_folded_energies(p.q, kb, 24);
      if (p.band < 10)
        CHECK(std::abs(p.energy.real() - expect[p.band]) < 1e-6);
    }
  }

  SECTION("V=0 gives the identical folded parabolas") {
    PotentialFamily free(1.0, {}, {}, 0.0);
    auto table = band_structure(free, 8, grid);
    for (auto const& p : table) {
      auto expect = sorted_folded_energies(p.q, kb, 8);
      CHECK(std::abs(p.energy.real() - expect[p.band]) < 1e-8);
    }
  }

  SECTION("lambda=0.9 spectrum is real below threshold") {
    auto f = PotentialFamily::pt_lattice(0.2, 1.0, 0.9);
    double max_im = 0.0;
    for (auto const& p : band_structure(f, 16, grid, 2))
      max_im = std::max(max_im, std::abs(p.energy.imag()));
    CHECK(max_im < 1e-8);
  }
}

TEST_CASE("band structure is deterministic under threading") {
  auto f = PotentialFamily::pt_lattice(0.3, 1.0, 0.8);
  auto grid = zone_grid(1.0, 21);
  auto t1 = band_structure(f, 8, grid, 1);
  auto t4 = band_structure(f, 8, grid, 4);
  REQUIRE(t1.size() == t4.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].energy == t4[i].energy);
    CHECK(t1[i].kappa == t4[i].kappa);
  }
}

TEST_CASE("truncation convergence of the lowest bands") {
  auto f = PotentialFamily::pt_lattice(0.5, 1.0, 0.9);
  for (double q : {0.3, -1.1, 2.0}) {
    auto s16 = band_solve(build_hq(f, q, 16));
    auto s32 = band_solve(build_hq(f, q, 32));
    for (int b = 0; b < 10; ++b) // lowest 5 bands span <= 10 eigenvalues
      CHECK(std::abs(s16.eigenvalues[b] - s32.eigenvalues[b]) < 1e-8);
  }
}

TEST_CASE("spectral symmetry E(-q) = E(q) as multisets") {
  auto f = PotentialFamily::pt_lattice(0.4, 1.0, 0.7);
  for (double q : {0.5, 1.7, 2.9}) {
    auto sp = band_solve(build_hq(f, q, 12));
    auto sm = band_solve(build_hq(f, -q, 12));
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
      CHECK(std::abs(sp.eigenvalues[i] - sm.eigenvalues[i]) < 1e-8);
  }
}

TEST_CASE("eigenvalue multiset invariant under transposition") {
  auto f = PotentialFamily::pt_lattice(0.3, 1.0, 1.2);
  auto m = build_hq(f, 0.9, 8);
  auto s = band_solve(m);
  BlochMatrix mt = m;
  mt.entries = m.entries.transpose().eval();
  auto st = band_solve(mt);
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    CHECK(std::abs(s.eigenvalues[i] - st.eigenvalues[i]) < 1e-8);
}

TEST_CASE("interior q of the lambda=1 lattice has distinct eigenvalues") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> qs(-M_PI + 0.05, M_PI - 0.05);
  for (int trial = 0; trial < 10; ++trial) {
    double q = qs(rng);
    if (std::abs(q) < 0.05) continue;
    auto s = band_solve(build_hq(f, q, 10));
    double min_gap = 1e300;
    for (std::size_t i = 0; i + 1 < s.eigenvalues.size(); ++i)
      min_gap = std::min(min_gap,
                         std::abs(s.eigenvalues[i + 1] - s.eigenvalues[i]));
    CHECK(min_gap > 1e-6);
  }
}
