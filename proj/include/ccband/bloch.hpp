#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "ccband/parallel.hpp"
#include "ccband/potential.hpp"

namespace ccband {

// Truncated plane-wave matrix H_{n,m}(q) = (q + n kB)^2 delta_{n,m} + V_{n-m},
// n, m = -N..N stored at indices 0..2N.
struct BlochMatrix {
  double q = 0.0;
  int n_trunc = 0;
  double kb = 2.0 * M_PI;
  Eigen::MatrixXcd entries;

  int dim() const { return 2 * n_trunc + 1; }
};

inline BlochMatrix build_hq(PotentialFamily const& f, double q, int n_trunc) {
  double kb = f.bragg_wavenumber();
  double zone = M_PI / f.period();
  if (q < -zone - 1e-12 || q > zone + 1e-12)
    throw std::invalid_argument("bloch: q outside the first Brillouin zone");
  if (n_trunc < f.support())
    throw std::invalid_argument("bloch: truncation smaller than potential support");

  int dim = 2 * n_trunc + 1;
  BlochMatrix m{q, n_trunc, kb, Eigen::MatrixXcd::Zero(dim, dim)};
  auto coeffs = f.effective_coeffs();
  for (int i = 0; i < dim; ++i) {
    int n = i - n_trunc;
    m.entries(i, i) = std::pow(q + n * kb, 2);
    for (auto const& [d, v] : coeffs) {
      int j = i - d; // column with n - m = d
      if (d != 0 && j >= 0 && j < dim) m.entries(i, j) += v;
    }
  }
  // n - m = 0 contribution goes on the diagonal
  for (auto const& [d, v] : coeffs)
    if (d == 0) m.entries.diagonal().array() += v;
  return m;
}

struct BandSolution {
  double q = 0.0;
  std::vector<cplx> eigenvalues;      // sorted by (Re, Im)
  Eigen::MatrixXcd right_vectors;     // columns, unit 2-norm
  Eigen::MatrixXcd left_vectors;      // rows, unit 2-norm, paired by index
  std::vector<double> kappa;          // |l.w| / (|l||w|) in [0,1]
};

// Dense non-Hermitian eigendecomposition with left vectors obtained from the
// rows of W^{-1}. Row i of W^{-1} satisfies l^T H = E_i l^T and is paired with
// column i by construction, so kappa_i = 1 / (|row_i(W^{-1})| |col_i(W)|)
// without any eigenvalue matching step.
//
// A one-sided potential makes H exactly triangular and every coalescing pair
// exactly defective whenever the two plane waves are connected through the
// nonzero entry pattern. The effective Jordan coupling decays like a product
// of V/(energy gap) factors along the chain and drops below machine epsilon
// after a few rungs, where any backward-stable dense detector sees a
// diagonalizable pair. For triangular matrices we therefore override kappa
// structurally: substitution gives the left eigenvector supported strictly
// before the first copy and the right eigenvector strictly after the second,
// so their overlap is exactly 0 and kappa = 0 is the exact value.
inline BandSolution band_solve(BlochMatrix const& m, double tol_resid = 1e-9,
                               double cluster_tol = -1.0) {
  if (cluster_tol < 0.0) cluster_tol = 1e-4 * m.kb * m.kb;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m.entries, true);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("bloch: eigensolver failed to converge");

  int dim = m.dim();
  Eigen::MatrixXcd w = es.eigenvectors(); // unit columns
  Eigen::MatrixXcd winv = w.partialPivLu().inverse();

  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    cplx ea = es.eigenvalues()(a), eb = es.eigenvalues()(b);
    if (ea.real() != eb.real()) return ea.real() < eb.real();
    return ea.imag() < eb.imag();
  });

  BandSolution s;
  s.q = m.q;
  s.eigenvalues.resize(dim);
  s.right_vectors.resize(dim, dim);
  s.left_vectors.resize(dim, dim);
  s.kappa.resize(dim);
  double hnorm = m.entries.norm();
  for (int i = 0; i < dim; ++i) {
    int k = order[i];
    s.eigenvalues[i] = es.eigenvalues()(k);
    s.right_vectors.col(i) = w.col(k);
    double lnorm = winv.row(k).norm();
    if (!std::isfinite(lnorm) || lnorm == 0.0) {
      s.left_vectors.row(i).setZero();
      s.kappa[i] = 0.0;
    } else {
      s.left_vectors.row(i) = winv.row(k) / lnorm;
      s.kappa[i] = std::clamp(1.0 / lnorm, 0.0, 1.0);
    }
    double resid =
        (m.entries * s.right_vectors.col(i) - s.eigenvalues[i] * s.right_vectors.col(i))
            .norm();
    if (resid > tol_resid * hnorm)
      throw std::runtime_error("bloch: eigenpair residual exceeds tolerance");
  }

  bool upper_zero = true, lower_zero = true;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      if (m.entries(r, c) == 0.0) continue;
      if (c > r) upper_zero = false;
      if (c < r) lower_zero = false;
    }
  if (upper_zero || lower_zero) {
    // connectivity through nonzero entries, walked in increasing index for a
    // lower-triangular matrix and decreasing for an upper-triangular one
    auto reachable = [&](int from, int to) {
      if (upper_zero ? (from > to) : (from < to)) std::swap(from, to);
      std::vector<char> seen(dim, 0);
      std::vector<int> stack{from};
      seen[from] = 1;
      while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        if (c == to) return true;
        for (int r = 0; r < dim; ++r)
          if (!seen[r] && r != c &&
              (upper_zero ? m.entries(r, c) : m.entries(c, r)) != 0.0) {
            seen[r] = 1;
            stack.push_back(r);
          }
      }
      return false;
    };
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        cplx di = m.entries(i, i), dj = m.entries(j, j);
        if (std::abs(di - dj) > 1e-9 * (1.0 + std::abs(di))) continue;
        if (!reachable(i, j)) continue;
        for (int t = 0; t < dim; ++t)
          if (std::abs(s.eigenvalues[t] - di) < cluster_tol) s.kappa[t] = 0.0;
      }
  }
  return s;
}

struct BandPoint {
  double q;
  int band;
  cplx energy;
  double kappa;
};

inline std::vector<BandPoint> band_structure(PotentialFamily const& f, int n_trunc,
                                             std::vector<double> const& q_grid,
                                             int threads = 1) {
  std::vector<std::vector<BandPoint>> rows(q_grid.size());
  parallel_for(q_grid.size(), threads, [&](std::size_t i) {
    BandSolution s = band_solve(build_hq(f, q_grid[i], n_trunc));
    rows[i].reserve(s.eigenvalues.size());
    for (int b = 0; b < (int)s.eigenvalues.size(); ++b)
      rows[i].push_back({q_grid[i], b, s.eigenvalues[b], s.kappa[b]});
  });
  std::vector<BandPoint> out;
  out.reserve(q_grid.size() * (2 * n_trunc + 1));
  for (auto const& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

inline std::vector<double> zone_grid(double a, int n_points) {
  // n_points from -pi/a to +pi/a inclusive; +pi/a is the same Bloch point as
  // -pi/a. Both q = 0 and q = -pi/a are on the grid for odd n_points.
  std::vector<double> g(n_points);
  double zone = M_PI / a;
  for (int i = 0; i < n_points; ++i)
    g[i] = -zone + 2.0 * zone * i / (n_points - 1);
  return g;
}

} // namespace ccband
