#include "liber/closed_form.hpp"

#include <cmath>

namespace liber {

namespace {

Complex context_d(Complex c, Complex x, double a, double b, int inner_sign) {
  const Complex radicand = c - (c - a * a + b * b) * x + b * b * x * x;
  const Complex inner = static_cast<double>(inner_sign) * std::sqrt(radicand);
  const Complex diff = std::sqrt(c) - inner;
  return (b * b * x * x - diff * diff) / x;
}

struct Assembled {
  Complex a_rad, b_rad;  // the two radicands at a given t
};

Assembled radicands(Complex c, Complex e, double a, double b) {
  const double u = b * b - a * a;
  const Complex ta = u - c - e;
  const Complex tb = u + c - e;
  return {ta * ta - 4.0 * a * a * c, tb * tb - 4.0 * b * b * c};
}

}  // namespace

ClosedFormContext closed_form_context(double z, const InitialData& init) {
  if (!(z > -1.0 && z < 1.0)) throw DomainError("closed_form_context: z must be in (-1,1)");
  if (z == 0.0) throw PoleError("closed_form_context: z = 0 (x division)");
  const double a = init.params.a(), b = init.params.b();
  const Complex h0 = init.herglotz0(z);
  const Complex k0sq = k_squared(h0, z, init.params);
  ClosedFormContext ctx;
  ctx.c = k0sq + (a + b) * (a + b);
  ctx.x = -4.0 * z / ((1.0 - z) * (1.0 - z));
  ctx.d = context_d(ctx.c, ctx.x, a, b, +1);
  return ctx;
}

Complex phi_real(double t, double z, const InitialData& init, double dt) {
  if (!(z > -1.0 && z < 1.0)) throw DomainError("phi_real: z must be in (-1,1)");
  if (t < 0.0) throw std::invalid_argument("phi_real: t must be >= 0");
  if (z == 0.0) return 0.0;  // fixed point of the flow

  const double a = init.params.a(), b = init.params.b();
  const Complex h0 = init.herglotz0(z);
  const Complex c = k_squared(h0, z, init.params) + (a + b) * (a + b);
  const Complex x = -4.0 * z / ((1.0 - z) * (1.0 - z));
  const Complex sc = std::sqrt(c);

  // Calibrate the branch configuration at t=0: the inner square root of d
  // and the relative sign between the two numerator roots together must
  // reproduce phi_0(z) = z.
  int inner_sign = 0, rel_sign = 0;
  Complex d;
  for (int is : {+1, -1}) {
    const Complex dc = context_d(c, x, a, b, is);
    const auto r0 = radicands(c, dc, a, b);
    const Complex sa = std::sqrt(r0.a_rad);
    const Complex sb = std::sqrt(r0.b_rad);
    for (int rs : {-1, +1}) {
      const Complex num = sa + static_cast<double>(rs) * sb;
      const Complex val = num * num / (4.0 * c * dc);
      if (std::abs(val - z) < 1e-8 * (1.0 + std::abs(z))) {
        inner_sign = is;
        rel_sign = rs;
        d = dc;
        break;
      }
    }
    if (inner_sign != 0) break;
  }
  if (inner_sign == 0)
    throw BranchError("phi_real: no branch configuration reproduces z at t=0");
  if (t == 0.0) return z;

  // Continue both numerator roots from t=0, sign-matching each against a
  // linear prediction so passages through zero do not flip the branch.
  const int n = std::max(1, static_cast<int>(std::ceil(t / dt)));
  const auto r0 = radicands(c, d, a, b);
  Complex va_prev2 = std::sqrt(r0.a_rad), va_prev1 = va_prev2;
  // num = sa + rel*sb was calibrated; track vb = -rel*sb so num = va - vb.
  Complex vb_prev2 = -static_cast<double>(rel_sign) * std::sqrt(r0.b_rad);
  Complex vb_prev1 = vb_prev2;
  Complex phi = z;
  const double scale = 1.0 + std::abs(c);
  for (int k = 1; k <= n; ++k) {
    const double s = t * static_cast<double>(k) / n;
    if ((s * sc).real() > 300.0)
      throw OutOfDomainError("phi_real: exponential overflow (point left the domain)");
    const Complex e = d * std::exp(s * sc);
    const auto r = radicands(c, e, a, b);
    Complex va = std::sqrt(r.a_rad);
    Complex pa = 2.0 * va_prev1 - va_prev2;
    if (std::abs(va - pa) > std::abs(va + pa)) va = -va;
    Complex vb = std::sqrt(r.b_rad);
    Complex pb = 2.0 * vb_prev1 - vb_prev2;
    if (std::abs(vb - pb) > std::abs(vb + pb)) vb = -vb;
    const Complex num = va - vb;
    phi = num * num / (4.0 * c * e);
    if (std::abs(phi) > 1.0 + 1e-6 && k < n)
      throw OutOfDomainError("phi_real: |phi| exceeded 1 before t (z outside the interval)");
    if (k < n && (std::abs(va) < 1e-10 * scale || std::abs(vb) < 1e-10 * scale))
      throw OutOfDomainError("phi_real: radicand vanished before t (boundary reached)");
    va_prev2 = va_prev1;
    va_prev1 = va;
    vb_prev2 = vb_prev1;
    vb_prev1 = vb;
  }
  if (std::abs(phi.imag()) > 1e-9 * (1.0 + std::abs(phi)))
    throw OutOfDomainError("phi_real: non-real result (z outside the interval at t)");
  if (std::abs(phi) > 1.0 + 1e-9)
    throw OutOfDomainError("phi_real: |phi| > 1 (z outside the interval at t)");
  return phi;
}

}  // namespace liber
