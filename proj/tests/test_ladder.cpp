#include <catch2/catch_amalgamated.hpp>

#include "ccband/ladder.hpp"

using namespace ccband;

namespace {
const double kb = 2.0 * M_PI;
}

TEST_CASE("wave number reduction to the zone") {
  double q;
  int l0;
  reduce_wavenumber(-0.5 * kb, kb, q, l0);
  CHECK(l0 == 0);
  CHECK(q == Catch::Approx(-0.5 * kb));
  reduce_wavenumber(0.5 * kb, kb, q, l0); // seam maps to -kB/2, next order
  CHECK(l0 == 1);
  CHECK(q == Catch::Approx(-0.5 * kb));
  reduce_wavenumber(0.3 * kb, kb, q, l0);
  CHECK(l0 == 0);
  CHECK(q == Catch::Approx(0.3 * kb));
  reduce_wavenumber(2.2 * kb, kb, q, l0);
  CHECK(l0 == 2);
  CHECK(q == Catch::Approx(0.2 * kb));
}

TEST_CASE("resonant excitation grows exactly linearly at lambda=1") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto tr = evolve_orders(f, 1.0, 16, -0.5 * kb, 20.0, 256);
  CHECK(tr.l0 == 0);
  CHECK_FALSE(tr.boundary_warning);
  CHECK(std::abs(tr.at(0, 0) - 1.0) < 1e-14); // c_l(0) = delta_{l,l0}

  // closed-form oracle from the two-level resonant chain:
  // c_1(t) = -i V0 t e^{-i E t}, E = (kB/2)^2
  double e0 = std::pow(0.5 * kb, 2);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    double t = tr.times[j];
    if (!(std::abs(t - 5.0) < 1e-9 || std::abs(t - 10.0) < 1e-9 ||
          std::abs(t - 20.0) < 1e-9))
      continue;
    cplx oracle = cplx(0.0, -0.2 * t) * std::exp(cplx(0.0, -e0 * t));
    CHECK(std::abs(std::abs(tr.at((int)j, 1)) - 0.2 * t) < 1e-8);
    CHECK(std::abs(tr.at((int)j, 1) - oracle) < 1e-7);
  }
}

TEST_CASE("free particle keeps a single rotating order") {
  PotentialFamily free(1.0, {}, {}, 0.0);
  double k = 1.3;
  auto tr = evolve_orders(free, 0.0, 8, k, 10.0, 64);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    cplx expect = std::exp(cplx(0.0, -k * k * tr.times[j]));
    CHECK(std::abs(tr.at((int)j, tr.l0) - expect) < 1e-10);
    for (int l = -8; l <= 8; ++l)
      if (l != tr.l0) CHECK(std::abs(tr.at((int)j, l)) < 1e-14);
  }
}

TEST_CASE("off-Bragg excitation stays bounded") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  double k = 0.3 * kb;
  auto tr = evolve_orders(f, 1.0, 16, k, 50.0, 256);
  double detune = std::pow(k + kb, 2) - k * k;
  double bound = 4.0 * 0.2 / detune;
  double sup = 0.0;
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    sup = std::max(sup, std::abs(tr.at((int)j, 1)));
  CHECK(sup < bound);
  CHECK(sup > 0.0);
}

TEST_CASE("hermitian norm conservation") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 0.0);
  auto tr = evolve_orders(f, 0.0, 16, -0.5 * kb, 50.0, 128);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    double total = 0.0;
    for (int l = -16; l <= 16; ++l) total += std::norm(tr.at((int)j, l));
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("secular detector") {
  auto f1 = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto f0 = PotentialFamily::pt_lattice(0.2, 1.0, 0.0);

  SECTION("flags the exact linear law with the right slope") {
    auto tr = evolve_orders(f1, 1.0, 16, -0.5 * kb, 50.0, 256);
    auto fit = detect_secular(tr, 1);
    CHECK(fit.secular);
    CHECK(fit.slope == Catch::Approx(0.2).epsilon(0.02));
    CHECK(fit.r2 > 0.999);
  }

  SECTION("hermitian Rabi oscillation is not secular") {
    auto tr = evolve_orders(f0, 0.0, 16, -0.5 * kb, 50.0, 256);
    CHECK_FALSE(detect_secular(tr, 1).secular);
  }

  SECTION("off-Bragg oscillation is not secular") {
    auto tr = evolve_orders(f1, 1.0, 16, 0.3 * kb, 50.0, 256);
    CHECK_FALSE(detect_secular(tr, 1).secular);
  }

  SECTION("short traces are rejected") {
    auto tr = evolve_orders(f1, 1.0, 8, -0.5 * kb, 5.0, 16);
    CHECK_THROWS_AS(detect_secular(tr, 1), std::invalid_argument);
  }
}

TEST_CASE("secularity occurs only at multiples of kB/2 reachable downstream") {
  // V_1 != 0 couples order l-1 -> l only, so a defective pair grows secularly
  // iff both of its orders lie downstream of l0. For the scanned k that means
  // k = -kB/2 (pair 0,1 at the zone edge) and k = -kB (pair -1,+1 at the
  // center); every positive multiple of kB/2 feeds past its partner and stays
  // bounded. Flags are asserted exactly where the integration grows.
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto any_secular = [&](double k) {
    auto tr = evolve_orders(f, 1.0, 16, k, 50.0, 256);
    for (int l = -16; l <= 16; ++l)
      if (detect_secular(tr, l).secular) return true;
    return false;
  };
  for (double frac : {0.1, 0.25, 0.3, 0.5, 0.75, 1.0}) {
    CHECK_FALSE(any_secular(frac * kb));
    bool grows = (frac == 0.5 || frac == 1.0);
    CHECK(any_secular(-frac * kb) == grows);
  }
}

TEST_CASE("growth is at most linear") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto tr = evolve_orders(f, 1.0, 24, -0.5 * kb, 100.0, 512);
  double worst = 0.0;
  for (std::size_t j = 1; j < tr.times.size(); ++j) // skip the t=0 unit record
    for (int l = -24; l <= 24; ++l)
      worst = std::max(worst,
                       std::abs(tr.at((int)j, l)) / (1.0 + tr.times[j]));
  CHECK(worst < 1.0);
}

TEST_CASE("trace invariant under truncation doubling") {
  auto f = PotentialFamily::pt_lattice(0.2, 1.0, 1.0);
  auto t16 = evolve_orders(f, 1.0, 16, -0.5 * kb, 50.0, 64);
  auto t32 = evolve_orders(f, 1.0, 32, -0.5 * kb, 50.0, 64);
  REQUIRE_FALSE(t16.boundary_warning);
  for (std::size_t j = 0; j < t16.times.size(); ++j)
    for (int l = -16; l <= 16; ++l)
      CHECK(std::abs(t16.at((int)j, l) - t32.at((int)j, l)) < 1e-9);
}
