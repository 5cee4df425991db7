#pragma once

#include "liber/measure.hpp"
#include "liber/transforms.hpp"

namespace liber {

/// Ingredients of the explicit real-axis flow formula:
///   c = K(0,z)^2 + (a+b)^2,   x = -4z/(1-z)^2,
///   d = [b^2 x^2 - (sqrt(c) - sqrt(c - (c-a^2+b^2)x + b^2 x^2))^2] / x.
struct ClosedFormContext {
  Complex c, d, x;
};

/// Context with principal square roots. Requires z real in (-1,1), z != 0.
ClosedFormContext closed_form_context(double z, const InitialData& init);

/// Explicit phi_t(z) for z on the real interval of the domain.
///
/// The square-root branches of the two radicands in the numerator are not
/// prescribed by the formula; they are fixed by requiring phi_0(z) = z and
/// then continued in t in increments dt (each inner root is sign-matched
/// against a linear prediction from the previous two nodes). The result
/// must come out real (residue below 1e-9) and inside the closed disc;
/// otherwise OutOfDomainError is thrown. Branch-calibration failure at t=0
/// throws BranchError. phi_real(t, 0) = 0 by the flow's fixed point.
Complex phi_real(double t, double z, const InitialData& init, double dt = 0.01);

}  // namespace liber
