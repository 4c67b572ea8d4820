#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include "ccband/bloch.hpp"

namespace ccband {

// Diffracted-order amplitudes c_l(t) for plane-wave excitation exp(ikx),
// k = q + l0 kB. amplitudes(l + N, j) is c_l at times[j].
struct DiffractionTrace {
  double k = 0.0;
  double q = 0.0;
  int l0 = 0;
  int n_trunc = 0;
  std::vector<double> times;
  Eigen::MatrixXcd amplitudes;
  bool boundary_warning = false; // cascade reached the truncation edge

  cplx at(int record, int l) const { return amplitudes(l + n_trunc, record); }
};

// k -> (q, l0) with q in [-kB/2, kB/2); the +kB/2 seam maps to -kB/2.
inline void reduce_wavenumber(double k, double kb, double& q, int& l0) {
  l0 = (int)std::lround(k / kb);
  q = k - l0 * kb;
  if (q >= 0.5 * kb - 1e-12 * kb) {
    q -= kb;
    ++l0;
  }
  if (q < -0.5 * kb) {
    q += kb;
    --l0;
  }
}

// Integrates i dc/dt = H(q) c, c_l(0) = delta_{l,l0}, by applying the exact
// propagator exp(-i dt H) of one record interval repeatedly. dt is the
// snapshot spacing, so the only error sources are the matrix exponential and
// the repeated multiplication, both far below the 1e-10 budget.
inline DiffractionTrace evolve_orders(PotentialFamily const& f, double lambda,
                                      int n_trunc, double k, double t_end,
                                      int n_records) {
  if (!(t_end > 0.0)) throw std::invalid_argument("ladder: t_end must be positive");
  if (n_records < 1) throw std::invalid_argument("ladder: need at least one record");

  DiffractionTrace tr;
  tr.k = k;
  tr.n_trunc = n_trunc;
  reduce_wavenumber(k, f.bragg_wavenumber(), tr.q, tr.l0);
  if (std::abs(tr.l0) > n_trunc)
    throw std::invalid_argument("ladder: excitation order outside truncation");

  BlochMatrix h = build_hq(f.with_lambda(lambda), tr.q, n_trunc);
  double dt = t_end / n_records;
  Eigen::MatrixXcd prop = (cplx(0.0, -dt) * h.entries).exp();

  int dim = h.dim();
  tr.times.resize(n_records + 1);
  tr.amplitudes.resize(dim, n_records + 1);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
  c(tr.l0 + n_trunc) = 1.0;
  tr.times[0] = 0.0;
  tr.amplitudes.col(0) = c;
  for (int j = 1; j <= n_records; ++j) {
    c = prop * c;
    if (!c.allFinite())
      throw std::runtime_error("ladder: amplitude overflow during evolution");
    tr.times[j] = j * dt;
    tr.amplitudes.col(j) = c;
    if (std::abs(c(0)) > 1e-6 || std::abs(c(dim - 1)) > 1e-6)
      tr.boundary_warning = true;
  }
  return tr;
}

struct SecularFit {
  bool secular = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least-squares line through |c_l(t)| on the window [t_end/2, t_end].
// Secular means the fitted growth over the full run dominates the mean level
// and the fit is actually a line.
inline SecularFit detect_secular(DiffractionTrace const& tr, int l,
                                 double score_threshold = 0.5,
                                 double r2_threshold = 0.99) {
  if ((int)tr.times.size() < 33)
    throw std::invalid_argument("ladder: trace too short for secular detection");
  double t_end = tr.times.back();
  std::vector<double> ts, ys;
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    if (tr.times[j] < 0.5 * t_end) continue;
    ts.push_back(tr.times[j]);
    ys.push_back(std::abs(tr.at((int)j, l)));
  }
  if (ts.size() < 16)
    throw std::invalid_argument("ladder: fit window too short");

  double n = (double)ts.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  SecularFit fit;
  double denom = n * stt - st * st;
  fit.slope = (n * sty - st * sy) / denom;
  fit.intercept = (sy - fit.slope * st) / n;
  double mean = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double pred = fit.intercept + fit.slope * ts[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  fit.r2 = (ss_tot > 1e-30) ? 1.0 - ss_res / ss_tot : 0.0;
  double score = (mean > 1e-30) ? fit.slope * t_end / mean : 0.0;
  fit.secular = score > score_threshold && fit.r2 > r2_threshold;
  return fit;
}

} // namespace ccband
