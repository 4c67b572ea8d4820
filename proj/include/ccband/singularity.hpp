#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccband/bloch.hpp"

namespace ccband {

enum class DegeneracyClass { defective, degenerate_diagonalizable, isolated };

inline const char* to_string(DegeneracyClass c) {
  switch (c) {
    case DegeneracyClass::defective: return "defective";
    case DegeneracyClass::degenerate_diagonalizable: return "degenerate-diagonalizable";
    default: return "isolated";
  }
}

struct DegeneracyRecord {
  double q;
  int alpha, beta;   // band indices of the pair
  double energy;     // Re E of the pair
  double gap;        // |E_alpha - E_beta|
  double kappa_min;
  DegeneracyClass cls;
};

struct SingularityDefaults {
  // gap_tol sits above the O(sqrt(eps)) eigenvalue smearing of a coalescing
  // pair; kappa_tol separates the defective overlap collapse from merely
  // close normal pairs.
  static double gap_tol(double kb) { return 1e-4 * kb * kb; }
  static constexpr double kappa_tol = 1e-3;
  static double im_tol(double kb) { return 1e-8 * kb * kb; }
  static constexpr int reality_grid_points = 65;
};

// Examine all adjacent eigenvalue pairs (sorted by Re E) at the zone center
// or edge; a pair closer than gap_tol is defective iff its smaller kappa is
// below kappa_tol.
inline std::vector<DegeneracyRecord>
classify_point(PotentialFamily const& f, double lambda, int n_trunc, double q,
               double gap_tol, double kappa_tol) {
  double zone = M_PI / f.period();
  if (!(std::abs(q) < 1e-12 || std::abs(q + zone) < 1e-12))
    throw std::invalid_argument("singularity: q must be 0 or -pi/a");

  BandSolution s = band_solve(build_hq(f.with_lambda(lambda), q, n_trunc));
  std::vector<DegeneracyRecord> out;
  int dim = (int)s.eigenvalues.size();
  for (int i = 0; i + 1 < dim; ++i) {
    double gap = std::abs(s.eigenvalues[i + 1] - s.eigenvalues[i]);
    if (gap >= gap_tol) continue;
    double kmin = std::min(s.kappa[i], s.kappa[i + 1]);
    DegeneracyRecord r;
    r.q = q;
    r.alpha = i;
    r.beta = i + 1;
    r.energy = 0.5 * (s.eigenvalues[i].real() + s.eigenvalues[i + 1].real());
    r.gap = gap;
    r.kappa_min = kmin;
    r.cls = (kmin < kappa_tol) ? DegeneracyClass::defective
                               : DegeneracyClass::degenerate_diagonalizable;
    out.push_back(r);
  }
  return out;
}

struct SingularEnergy {
  double energy;
  double q;          // where the defective pair was found (0 or -pi/a)
  double gap;
  double kappa_min;
};

// Defective energies at the zone center and edge, capped below the range the
// truncation resolves reliably.
inline std::vector<SingularEnergy>
singular_energies(PotentialFamily const& f, double lambda, int n_trunc,
                  double gap_tol = -1.0, double kappa_tol = SingularityDefaults::kappa_tol) {
  double kb = f.bragg_wavenumber();
  if (gap_tol < 0.0) gap_tol = SingularityDefaults::gap_tol(kb);
  double cap = 0.5 * std::pow(n_trunc * kb / 2.0, 2);

  std::vector<SingularEnergy> out;
  for (double q : {0.0, -M_PI / f.period()}) {
    for (auto const& r : classify_point(f, lambda, n_trunc, q, gap_tol, kappa_tol)) {
      if (r.cls != DegeneracyClass::defective) continue;
      if (r.energy >= cap) continue;
      out.push_back({r.energy, q, r.gap, r.kappa_min});
    }
  }
  std::sort(out.begin(), out.end(),
            [](auto const& a, auto const& b) { return a.energy < b.energy; });
  return out;
}

// Max |Im E| over the reality-scan q grid.
inline double max_imag_energy(PotentialFamily const& f, double lambda, int n_trunc,
                              int grid_points = SingularityDefaults::reality_grid_points,
                              int threads = 1) {
  auto grid = zone_grid(f.period(), grid_points);
  std::vector<double> per_q(grid.size(), 0.0);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    BandSolution s = band_solve(build_hq(f.with_lambda(lambda), grid[i], n_trunc));
    double m = 0.0;
    for (auto e : s.eigenvalues) m = std::max(m, std::abs(e.imag()));
    per_q[i] = m;
  });
  double m = 0.0;
  for (double v : per_q) m = std::max(m, v);
  return m;
}

// Bisection on the spectral-reality indicator. The bracket must straddle the
// transition; multiple breaking points are the caller's problem.
inline double find_lambda_c(PotentialFamily const& f, int n_trunc, double lambda_lo,
                            double lambda_hi, double tol_lambda, int threads = 1) {
  if (!(lambda_lo < lambda_hi) || !(tol_lambda > 0.0))
    throw std::invalid_argument("singularity: bad bisection bracket");
  double kb = f.bragg_wavenumber();
  double im_tol = SingularityDefaults::im_tol(kb);
  auto complex_spectrum = [&](double lam) {
    return max_imag_energy(f, lam, n_trunc,
                           SingularityDefaults::reality_grid_points, threads) > im_tol;
  };
  bool lo = complex_spectrum(lambda_lo), hi = complex_spectrum(lambda_hi);
  if (lo == hi)
    throw std::runtime_error(
        "singularity: reality indicator identical at both bracket ends; no transition");
  while (lambda_hi - lambda_lo > tol_lambda) {
    double mid = 0.5 * (lambda_lo + lambda_hi);
    if (complex_spectrum(mid) == lo)
      lambda_lo = mid;
    else
      lambda_hi = mid;
  }
  return 0.5 * (lambda_lo + lambda_hi);
}

struct ResolventProbe {
  int m0 = 0, n0 = 0;
  cplx z;
  cplx value;
  long n_perturbed = 0; // quadrature nodes moved off a singular system
};

// G_{chi,phi}(E + i eta) with constant spectral functions concentrated on
// plane-wave components m0, n0: a midpoint-rule quadrature of
// R_{m0,n0}(z, q) = [(z - H(q))^{-1}]_{m0,n0} over the zone. Midpoint nodes
// avoid q = 0 and q = -pi/a exactly.
inline ResolventProbe
projected_resolvent(PotentialFamily const& f, double lambda, int n_trunc, int m0,
                    int n0, double energy, double eta, long n_quad,
                    int threads = 1) {
  if (!(eta > 0.0)) throw std::invalid_argument("singularity: eta must be positive");
  if (n_quad < 64) throw std::invalid_argument("singularity: n_quad must be >= 64");
  if (std::abs(m0) > n_trunc || std::abs(n0) > n_trunc)
    throw std::invalid_argument("singularity: (m0, n0) outside truncation");

  PotentialFamily fam = f.with_lambda(lambda);
  double zone = M_PI / f.period();
  double h = 2.0 * zone / n_quad;
  cplx z(energy, eta);
  int dim = 2 * n_trunc + 1;

  std::vector<cplx> node_val(n_quad);
  std::vector<int> node_perturbed(n_quad, 0);
  parallel_for(n_quad, threads, [&](std::size_t j) {
    double q = -zone + (j + 0.5) * h;
    auto solve_at = [&](double qq) -> cplx {
      Eigen::MatrixXcd a = -build_hq(fam, qq, n_trunc).entries;
      a.diagonal().array() += z;
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
      e(n0 + n_trunc) = 1.0;
      Eigen::VectorXcd x = a.partialPivLu().solve(e);
      return x(m0 + n_trunc);
    };
    cplx v = solve_at(q);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      v = solve_at(q + 0.25 * h); // nudge off the singular node
      node_perturbed[j] = 1;
    }
    node_val[j] = v;
  });

  ResolventProbe p;
  p.m0 = m0;
  p.n0 = n0;
  p.z = z;
  cplx acc = 0.0;
  for (auto v : node_val) acc += v;
  p.value = acc * h;
  for (int c : node_perturbed) p.n_perturbed += c;
  return p;
}

struct SingularityReport {
  double lambda;
  std::vector<DegeneracyRecord> points;
  std::vector<SingularEnergy> energies;
  std::optional<double> lambda_c;
};

inline SingularityReport scan_singularities(PotentialFamily const& f, double lambda,
                                            int n_trunc) {
  double kb = f.bragg_wavenumber();
  SingularityReport rep;
  rep.lambda = lambda;
  for (double q : {0.0, -M_PI / f.period()}) {
    auto recs = classify_point(f, lambda, n_trunc, q,
                               SingularityDefaults::gap_tol(kb),
                               SingularityDefaults::kappa_tol);
    rep.points.insert(rep.points.end(), recs.begin(), recs.end());
  }
  rep.energies = singular_energies(f, lambda, n_trunc);
  return rep;
}

} // namespace ccband
