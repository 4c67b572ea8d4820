#pragma once

#include <fftw3.h>

#include <mutex>
#include <optional>
#include <vector>

#include "ccband/potential.hpp"

namespace ccband {

// Sampled complex field on the L-periodic grid x_j = -L/2 + j dx.
struct WaveField {
  double domain_length = 0.0;
  int points = 0;
  double time = 0.0;
  std::vector<cplx> values;

  double dx() const { return domain_length / points; }
  double x(int j) const { return -0.5 * domain_length + j * dx(); }
};

struct PeakTrace {
  std::vector<double> times;
  std::vector<double> values; // max_x |psi|
};

namespace detail {

inline bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

// FFTW plan pair for one size. Plan creation is not thread-safe; execution on
// distinct buffers is.
class Fft {
public:
  explicit Fft(int m) : m_(m), buf_(fftw_alloc_complex(m)) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fwd_ = fftw_plan_dft_1d(m, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(m, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  Fft(Fft const&) = delete;
  Fft& operator=(Fft const&) = delete;

  void forward(std::vector<cplx>& v) { run(fwd_, v, false); }
  void inverse(std::vector<cplx>& v) { run(inv_, v, true); }

private:
  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }
  void run(fftw_plan p, std::vector<cplx>& v, bool scale) {
    auto* b = reinterpret_cast<cplx*>(buf_);
    std::copy(v.begin(), v.end(), b);
    fftw_execute(p);
    if (scale) {
      double s = 1.0 / m_;
      for (int i = 0; i < m_; ++i) v[i] = b[i] * s;
    } else {
      std::copy(b, b + m_, v.begin());
    }
  }
  int m_;
  fftw_complex* buf_;
  fftw_plan fwd_, inv_;
};

inline double grid_k(int j, int m, double length) {
  int n = (j <= m / 2) ? j : j - m;
  return 2.0 * M_PI * n / length;
}

} // namespace detail

// Gaussian packet exp[-(x/w)^2 - i kB x / 2], unit peak at x = 0. The carrier
// -kB/2 puts the packet at normal-incidence Bragg resonance.
inline WaveField init_gaussian(double w, double domain_length, int points,
                               double period_a = 1.0) {
  if (!detail::is_pow2(points))
    throw std::invalid_argument("packet: grid size must be a power of two");
  WaveField f;
  f.domain_length = domain_length;
  f.points = points;
  if (w < 8.0 * f.dx())
    throw std::invalid_argument("packet: grid too coarse for packet width");
  if (w > domain_length / 16.0)
    throw std::invalid_argument("packet: domain too small for packet width");
  double kb = 2.0 * M_PI / period_a;
  f.values.resize(points);
  for (int j = 0; j < points; ++j) {
    double x = f.x(j);
    f.values[j] =
        std::exp(-(x / w) * (x / w)) * std::exp(cplx(0.0, -0.5 * kb * x));
  }
  return f;
}

inline double peak_amplitude(WaveField const& f) {
  double m = 0.0;
  for (auto const& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

// Sub-grid peak position: parabola through log|psi| around the grid maximum.
// Exact for Gaussian envelopes.
inline double peak_location(WaveField const& f) {
  int jm = 0;
  double best = -1.0;
  for (int j = 0; j < f.points; ++j) {
    double m = std::abs(f.values[j]);
    if (m > best) {
      best = m;
      jm = j;
    }
  }
  int jl = (jm + f.points - 1) % f.points, jr = (jm + 1) % f.points;
  double yl = std::log(std::abs(f.values[jl]) + 1e-300);
  double y0 = std::log(best + 1e-300);
  double yr = std::log(std::abs(f.values[jr]) + 1e-300);
  double denom = yl - 2.0 * y0 + yr;
  double shift = (std::abs(denom) > 1e-300) ? 0.5 * (yl - yr) / denom : 0.0;
  return f.x(jm) + shift * f.dx();
}

inline double l2_norm(WaveField const& f) {
  double s = 0.0;
  for (auto const& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.dx());
}

// Momentum-space bandpass keeping k in [l kB - kB, l kB), the band centered on
// the order-l carrier -kB/2 + l kB. Carrier phase is kept in the output.
inline WaveField order_filter(WaveField const& f, int l, double period_a = 1.0) {
  double kb = 2.0 * M_PI / period_a;
  double lo = l * kb - kb, hi = l * kb;
  detail::Fft fft(f.points);
  WaveField out = f;
  fft.forward(out.values);
  for (int j = 0; j < f.points; ++j) {
    double k = detail::grid_k(j, f.points, f.domain_length);
    if (!(k >= lo && k < hi)) out.values[j] = 0.0;
  }
  fft.inverse(out.values);
  return out;
}

struct PropagateOptions {
  int record_every = 50;
  std::optional<int> order_trace; // also record max |order-l component|
  double period_a = 1.0;          // kB for the order filter
  double overflow_limit = 1e12;
  double wrap_fraction_tol = 1e-6; // L2 fraction allowed in the outer 5%
};

struct PropagateResult {
  WaveField field;
  PeakTrace peaks;
  PeakTrace order_peaks; // empty unless options.order_trace is set
};

// Strang split-step for i dpsi/dt = -psi'' + V psi: half kinetic step in
// momentum space, full potential step in position space, half kinetic step.
// Interior half-steps are fused pairwise; records happen at integer steps.
// Unconditionally stable; non-unitary whenever Im V != 0.
inline PropagateResult propagate(WaveField field, PotentialFamily const& f,
                                 double lambda, double dt, int n_steps,
                                 PropagateOptions const& opts = {}) {
  if (!(dt > 0.0) || n_steps < 1)
    throw std::invalid_argument("packet: bad step parameters");
  int m = field.points;
  double length = field.domain_length;
  double k_max = M_PI / field.dx();
  if (dt * k_max * k_max >= 10.0)
    throw std::invalid_argument("packet: dt too large for the grid (accuracy guard)");

  PotentialFamily fam = f.with_lambda(lambda);
  std::vector<cplx> exp_v(m), kin_half(m), kin_full(m);
  for (int j = 0; j < m; ++j) {
    exp_v[j] = std::exp(cplx(0.0, -dt) * fam.sample(field.x(j)));
    double k = detail::grid_k(j, m, length);
    kin_half[j] = std::exp(cplx(0.0, -0.5 * dt * k * k));
    kin_full[j] = kin_half[j] * kin_half[j];
  }
  double kb = 2.0 * M_PI / opts.period_a;
  std::optional<std::pair<double, double>> order_band;
  if (opts.order_trace) {
    int l = *opts.order_trace;
    order_band = {l * kb - kb, (double)l * kb};
  }

  detail::Fft fft(m);
  PropagateResult res;
  res.field = std::move(field);
  auto& psi = res.field.values;

  auto check_field = [&](std::vector<cplx> const& pos, double t) {
    double peak = 0.0, total = 0.0, outer = 0.0;
    double edge = 0.45 * length;
    for (int j = 0; j < m; ++j) {
      double a2 = std::norm(pos[j]);
      peak = std::max(peak, a2);
      total += a2;
      if (std::abs(res.field.x(j)) > edge) outer += a2;
    }
    peak = std::sqrt(peak);
    if (!std::isfinite(peak) || peak > opts.overflow_limit)
      throw std::runtime_error("packet: field overflow at t = " + std::to_string(t));
    if (total > 0.0 && outer / total > opts.wrap_fraction_tol)
      throw std::runtime_error("packet: wave reached the domain boundary at t = " +
                               std::to_string(t));
    return peak;
  };

  double t0 = res.field.time;
  res.peaks.times.push_back(t0);
  res.peaks.values.push_back(check_field(psi, t0));
  std::vector<cplx> scratch(m);
  if (order_band) {
    WaveField of = order_filter(res.field, *opts.order_trace, opts.period_a);
    res.order_peaks.times.push_back(t0);
    res.order_peaks.values.push_back(peak_amplitude(of));
  }

  fft.forward(psi);
  for (int j = 0; j < m; ++j) psi[j] *= kin_half[j];
  for (int s = 1; s <= n_steps; ++s) {
    fft.inverse(psi);
    for (int j = 0; j < m; ++j) psi[j] *= exp_v[j];
    fft.forward(psi);
    bool record = (s % opts.record_every == 0) || s == n_steps;
    if (!record) {
      for (int j = 0; j < m; ++j) psi[j] *= kin_full[j];
      continue;
    }
    for (int j = 0; j < m; ++j) psi[j] *= kin_half[j];
    double t = t0 + s * dt;
    scratch = psi;
    fft.inverse(scratch);
    res.peaks.times.push_back(t);
    res.peaks.values.push_back(check_field(scratch, t));
    if (order_band) {
      std::vector<cplx> band = psi;
      for (int j = 0; j < m; ++j) {
        double k = detail::grid_k(j, m, length);
        if (!(k >= order_band->first && k < order_band->second)) band[j] = 0.0;
      }
      fft.inverse(band);
      double pk = 0.0;
      for (auto const& v : band) pk = std::max(pk, std::abs(v));
      res.order_peaks.times.push_back(t);
      res.order_peaks.values.push_back(pk);
    }
    if (s < n_steps)
      for (int j = 0; j < m; ++j) psi[j] *= kin_half[j];
  }
  psi = scratch; // position-space field from the final record
  res.field.time = t0 + n_steps * dt;
  return res;
}

// Gaussian angular spectrum centered on the Bragg carrier.
struct SpectrumProfile {
  double center = 0.0; // k0, normally -kB/2
  double width = 0.0;  // w

  double value(double k) const {
    double d = (k - center) * width;
    return width / (2.0 * std::sqrt(M_PI)) * std::exp(-0.25 * d * d);
  }
};

namespace detail {

// First-order amplitude for the single-harmonic lattice at lambda = 1:
// c_1(k, t) = -i e^{-i(k+kB)^2 t} (e^{i d t} - 1) / (i d), d = kB (2k + kB).
inline cplx born_c1(double k, double t, double kb) {
  double d = kb * (2.0 * k + kb);
  cplx phase = std::exp(cplx(0.0, -(k + kb) * (k + kb) * t));
  if (std::abs(d * t) < 1e-8)
    return cplx(0.0, -1.0) * phase * t * (1.0 + cplx(0.0, 0.5 * d * t));
  cplx ramp = (std::exp(cplx(0.0, d * t)) - 1.0) / cplx(0.0, d);
  return cplx(0.0, -1.0) * phase * ramp;
}

inline std::vector<cplx> born_quadrature(SpectrumProfile const& spec, double t,
                                         std::vector<double> const& x_grid,
                                         double kb, int n_panels) {
  // composite Simpson over the support of F
  double half = 40.0 / spec.width;
  double lo = spec.center - half, hi = spec.center + half;
  int n = 2 * n_panels; // even interval count
  double h = (hi - lo) / n;
  std::vector<cplx> fk(n + 1);
  std::vector<double> wt(n + 1);
  for (int i = 0; i <= n; ++i) {
    double k = lo + i * h;
    fk[i] = spec.value(k) * born_c1(k, t, kb);
    wt[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  }
  std::vector<cplx> out(x_grid.size(), 0.0);
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    cplx acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double k = lo + i * h;
      acc += wt[i] * fk[i] * std::exp(cplx(0.0, (k + kb) * x_grid[j]));
    }
    out[j] = acc * (h / 3.0);
  }
  return out;
}

} // namespace detail

// psi_1(x, t) = int dk F(k) c_1(k, t) e^{i(k + kB)x} by quadrature; the V0
// prefactor is not included. Valid for the lambda = 1 single-harmonic lattice.
inline std::vector<cplx> born_psi1(SpectrumProfile const& spec, double t,
                                   std::vector<double> const& x_grid,
                                   double period_a = 1.0) {
  if (!(t >= 0.0)) throw std::invalid_argument("packet: t must be non-negative");
  double kb = 2.0 * M_PI / period_a;
  auto fine = detail::born_quadrature(spec, t, x_grid, kb, 1024);
  auto coarse = detail::born_quadrature(spec, t, x_grid, kb, 512);
  double scale = 0.0, diff = 0.0;
  for (std::size_t j = 0; j < fine.size(); ++j) {
    scale = std::max(scale, std::abs(fine[j]));
    diff = std::max(diff, std::abs(fine[j] - coarse[j]));
  }
  if (scale > 0.0 && diff > 1e-7 * scale + 1e-12)
    throw std::runtime_error("packet: Born quadrature did not converge");
  return fine;
}

inline bool asymptotic_time_valid(SpectrumProfile const& spec, double t,
                                  double period_a = 1.0) {
  double kb = 2.0 * M_PI / period_a;
  return t >= 4.0 * M_PI * spec.width / (2.0 * kb);
}

// Long-time boxcar form of psi_1: a flat-top square pulse of height
// (pi/kB) |F(-kB/2)| filling |x| < kB t.
inline cplx asymptotic_psi1(SpectrumProfile const& spec, double t, double x,
                            double period_a = 1.0) {
  double kb = 2.0 * M_PI / period_a;
  if (std::abs(x) > kb * t) return 0.0;
  cplx phase = std::exp(cplx(0.0, 0.5 * kb * x - 0.25 * kb * kb * t));
  return cplx(0.0, -M_PI / kb) * spec.value(-0.5 * kb) * phase;
}

} // namespace ccband
