#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

namespace ccband {

using cplx = std::complex<double>;
using CoeffMap = std::map<int, cplx>;

// Complex periodic potential V(x) = V_R(x) + i*lambda*V_I(x), stored as the
// Fourier coefficients of the two real-valued component functions:
//   V_R(x) = sum_n R_n e^{i kB n x},  V_I(x) = sum_n I_n e^{i kB n x}.
// Immutable after construction.
class PotentialFamily {
public:
  PotentialFamily(double period_a, CoeffMap real_coeffs, CoeffMap imag_coeffs,
                  double lambda)
      : a_(period_a), r_(std::move(real_coeffs)), i_(std::move(imag_coeffs)),
        lambda_(lambda) {
    if (!(a_ > 0.0))
      throw std::invalid_argument("potential: period must be positive");
    if (lambda_ < 0.0)
      throw std::invalid_argument("potential: lambda must be non-negative");
    check_real_valued(r_, "V_R");
    check_real_valued(i_, "V_I");
  }

  // The PT crystal V_R = V0 cos(kB x), V_I = V0 sin(kB x).
  static PotentialFamily pt_lattice(double v0, double a, double lambda) {
    if (!(a > 0.0))
      throw std::invalid_argument("potential: period must be positive");
    CoeffMap r, im;
    if (v0 != 0.0) {
      r[1] = 0.5 * v0;
      r[-1] = 0.5 * v0;
      im[1] = cplx(0.0, -0.5 * v0); // sin = (e^{i} - e^{-i}) / 2i
      im[-1] = cplx(0.0, 0.5 * v0);
    }
    return PotentialFamily(a, std::move(r), std::move(im), lambda);
  }

  double period() const { return a_; }
  double lambda() const { return lambda_; }
  double bragg_wavenumber() const { return 2.0 * M_PI / a_; }

  PotentialFamily with_lambda(double lambda) const {
    return PotentialFamily(a_, r_, i_, lambda);
  }

  // Largest |n| with a nonzero coefficient.
  int support() const {
    int n_max = 0;
    for (auto const& [n, c] : r_)
      if (c != 0.0) n_max = std::max(n_max, std::abs(n));
    for (auto const& [n, c] : i_)
      if (c != 0.0) n_max = std::max(n_max, std::abs(n));
    return n_max;
  }

  // V_n = R_n + i*lambda*I_n; exact zeros are dropped.
  CoeffMap effective_coeffs() const {
    CoeffMap v;
    for (auto const& [n, c] : r_) v[n] += c;
    for (auto const& [n, c] : i_) v[n] += cplx(0.0, lambda_) * c;
    for (auto it = v.begin(); it != v.end();)
      it = (it->second == 0.0) ? v.erase(it) : std::next(it);
    return v;
  }

  cplx effective_coeff(int n) const {
    cplx v = 0.0;
    if (auto it = r_.find(n); it != r_.end()) v += it->second;
    if (auto it = i_.find(n); it != i_.end())
      v += cplx(0.0, lambda_) * it->second;
    return v;
  }

  cplx sample(double x) const {
    return eval(r_, x) + cplx(0.0, lambda_) * eval(i_, x);
  }

  // Component functions; both real-valued by the coefficient invariant.
  cplx sample_real_part(double x) const { return eval(r_, x); }
  cplx sample_imag_part(double x) const { return eval(i_, x); }

  // True iff all effective coefficients V_n are real to within tol, the
  // Fourier-space form of V(-x) = V*(x) about x = 0.
  bool is_pt_symmetric(double tol = 1e-10) const {
    for (auto const& [n, v] : effective_coeffs())
      if (std::abs(v.imag()) > tol) return false;
    return true;
  }

private:
  cplx eval(CoeffMap const& c, double x) const {
    double kb = bragg_wavenumber();
    cplx s = 0.0;
    for (auto const& [n, cn] : c)
      s += cn * std::exp(cplx(0.0, kb * n * x));
    return s;
  }

  static void check_real_valued(CoeffMap const& c, const char* which) {
    for (auto const& [n, cn] : c) {
      cplx mirror = 0.0;
      if (auto it = c.find(-n); it != c.end()) mirror = it->second;
      if (std::abs(cn - std::conj(mirror)) > 1e-12 * (1.0 + std::abs(cn)))
        throw std::invalid_argument(
            std::string("potential: ") + which +
            " coefficients violate c_{-n} = conj(c_n)");
    }
  }

  double a_;
  CoeffMap r_, i_;
  double lambda_;
};

} // namespace ccband
