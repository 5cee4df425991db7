#include "liber/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace liber {

namespace {
constexpr double kPoleTol = 1e-13;
}

TraceParams::TraceParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
  if (!(std::abs(alpha) <= 1.0) || !(std::abs(beta) <= 1.0))
    throw std::invalid_argument("TraceParams: traces must lie in [-1,1]");
}

Complex h_infinity_squared(Complex z, const TraceParams& p) {
  const double ab = p.alpha * p.beta;
  const double amb2 = (p.alpha - p.beta) * (p.alpha - p.beta);
  const Complex one_m_z2 = (1.0 - z) * (1.0 + z);
  return 1.0 + 4.0 * z * (ab * (1.0 + z) * (1.0 + z) + amb2 * z) / (one_m_z2 * one_m_z2);
}

Complex h_infinity(Complex z, const TraceParams& p) {
  if (std::abs(z) >= 1.0)
    throw DomainError("h_infinity: |z| must be < 1");
  // Track the branch along the radial segment from 0 (value 1) to z.
  const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(z) * 64.0)));
  Complex prev = 1.0;
  for (int k = 1; k <= steps; ++k) {
    const Complex zk = z * (static_cast<double>(k) / steps);
    Complex s = std::sqrt(h_infinity_squared(zk, p));
    if (std::abs(s - prev) > std::abs(s + prev)) s = -s;
    prev = s;
  }
  return prev;
}

Complex phi_weight(Complex z, const TraceParams& p) {
  const double a = p.a(), b = p.b();
  Complex out = 0.0;
  if (a != 0.0) {
    if (std::abs(1.0 + z) < kPoleTol)
      throw PoleError("phi_weight: pole at z = -1 (a != 0)");
    out += a * (1.0 - z) / (1.0 + z);
  }
  if (b != 0.0) {
    if (std::abs(1.0 - z) < kPoleTol)
      throw PoleError("phi_weight: pole at z = +1 (b != 0)");
    out += b * (1.0 + z) / (1.0 - z);
  }
  return out;
}

Complex phi_weight_deriv(Complex z, const TraceParams& p) {
  const double a = p.a(), b = p.b();
  Complex out = 0.0;
  if (a != 0.0) {
    const Complex d = 1.0 + z;
    if (std::abs(d) < kPoleTol) throw PoleError("phi_weight_deriv: pole at z = -1");
    out += -2.0 * a / (d * d);
  }
  if (b != 0.0) {
    const Complex d = 1.0 - z;
    if (std::abs(d) < kPoleTol) throw PoleError("phi_weight_deriv: pole at z = +1");
    out += 2.0 * b / (d * d);
  }
  return out;
}

Complex k_squared(Complex hval, Complex z, const TraceParams& p) {
  const Complex phi = phi_weight(z, p);
  return hval * hval - phi * phi;
}

Complex k_eval(Complex hval, Complex z, const TraceParams& p) {
  Complex s = std::sqrt(k_squared(hval, z, p));
  if (s.real() < 0.0 || (s.real() == 0.0 && s.imag() < 0.0)) s = -s;
  return s;
}

double k_infinity_constant(const TraceParams& p) {
  const double ab = p.a() + p.b();
  return 1.0 - ab * ab;
}

Complex quarter_map(Complex z) {
  const Complex d = 1.0 + z;
  return 4.0 * z / (d * d);
}

Complex quarter_map_inverse(Complex w) {
  if (w == Complex(0.0)) return 0.0;
  // Roots of w z^2 + (2w-4) z + w = 0 multiply to 1. The rationalized form
  // w / (2 - w + 2 sqrt(1-w)) is stable for small |w|.
  const Complex root = std::sqrt(1.0 - w);
  Complex z = w / (2.0 - w + 2.0 * root);
  if (std::abs(z) > 1.0) z = 1.0 / z;
  if (std::abs(z) >= 1.0 - 1e-14) {
    // Both roots on the circle: w lies on the cut [1, inf).
    if (std::abs(std::abs(1.0 / z) - 1.0) < 1e-12 && std::abs(std::abs(z) - 1.0) < 1e-12)
      throw BranchError("quarter_map_inverse: both roots on the unit circle");
  }
  return z;
}

Complex nu_to_mu_herglotz(const std::function<Complex(Complex)>& h_nu,
                          const TraceParams& p, Complex w) {
  const Complex z = quarter_map_inverse(w);
  const Complex corr = 2.0 * (p.alpha + p.beta) * z / (z * z - 1.0);
  return (1.0 + z) / (1.0 - z) * (h_nu(z) - corr);
}

Complex mu_to_nu_herglotz(const std::function<Complex(Complex)>& h_mu,
                          const TraceParams& p, Complex z) {
  const Complex corr = 2.0 * (p.alpha + p.beta) * z / (z * z - 1.0);
  return (1.0 - z) / (1.0 + z) * h_mu(quarter_map(z)) + corr;
}

}  // namespace liber
