#pragma once

#include <complex>
#include <functional>

#include "liber/errors.hpp"

namespace liber {

using Complex = std::complex<double>;

/// Traces of the two symmetries R = 2P-1 and S = 2Q-1.
/// The derived weights a = |alpha-beta|/2 and b = |alpha+beta|/2 are always
/// computed, never stored, so they cannot drift out of sync.
struct TraceParams {
  double alpha = 0.0;  ///< tau(R), in [-1,1]
  double beta = 0.0;   ///< tau(S), in [-1,1]

  TraceParams() = default;
  TraceParams(double alpha_, double beta_);

  double a() const { return std::abs(alpha - beta) / 2.0; }
  double b() const { return std::abs(alpha + beta) / 2.0; }
};

/// Herglotz transform of the t=infinity (freely independent) state.
/// Square-root branch is tracked along the radial segment [0,z] so that the
/// value is continuous on the disc with h_infinity(0) = 1.
Complex h_infinity(Complex z, const TraceParams& p);

/// The radicand of h_infinity, exact in the parameters (no branch choice).
Complex h_infinity_squared(Complex z, const TraceParams& p);

/// Weight a(1-z)/(1+z) + b(1+z)/(1-z). Terms with a zero coefficient are
/// skipped entirely, so e.g. z=-1 is fine when a=0. Throws PoleError at a
/// genuine pole.
Complex phi_weight(Complex z, const TraceParams& p);

/// d/dz of phi_weight, with the same degenerate-coefficient handling.
Complex phi_weight_deriv(Complex z, const TraceParams& p);

/// K^2 = hval^2 - phi_weight(z)^2, exact (no square root taken).
Complex k_squared(Complex hval, Complex z, const TraceParams& p);

/// K = sqrt(hval^2 - phi_weight(z)^2), normalized to Re K >= 0 so that
/// k_eval(1, 0, p) = sqrt(1-(a+b)^2) >= 0. Callers that need branch
/// continuity along a path should compare k_squared values instead.
Complex k_eval(Complex hval, Complex z, const TraceParams& p);

/// The constant 1-(a+b)^2; equals h_infinity(z)^2 - phi_weight(z)^2 for
/// every z (an algebraic identity, verified in the test suite).
double k_infinity_constant(const TraceParams& p);

/// The rational map w(z) = 4z/(1+z)^2 from the disc onto C \ [1, inf).
Complex quarter_map(Complex z);

/// Inverse of quarter_map: the root of 4z/(1+z)^2 = w with |z| < 1.
/// The two roots are reciprocal; throws BranchError when both sit on the
/// unit circle (w on the cut [1, inf)).
Complex quarter_map_inverse(Complex w);

/// H_mu(w) recovered from an H_nu evaluator through the mu<->nu relationship.
/// The relationship is implemented with an overall sign flip relative to a
/// verbatim transcription; the P=Q worked example (mu_0 = (1-p)d_0 + p d_1,
/// nu_0 = d_1) pins the sign and is kept as a regression test.
Complex nu_to_mu_herglotz(const std::function<Complex(Complex)>& h_nu,
                          const TraceParams& p, Complex w);

/// The same relationship in the other direction: H_nu(z) from an H_mu
/// evaluator.
Complex mu_to_nu_herglotz(const std::function<Complex(Complex)>& h_mu,
                          const TraceParams& p, Complex z);

}  // namespace liber
