#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "liber/measure.hpp"
#include "liber/transforms.hpp"

namespace liber {

/// One sample of the characteristic flow.
///   phi = phi_t(z0)              w = H(t, phi_t(z0))
///   v   = d/dz phi_t(z0)         u = d/dz [H(t, phi_t(z))]|_{z0}
struct FlowState {
  double t = 0.0;
  Complex phi, w, v, u;
};

struct FlowOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double eps_exit = 1e-9;        ///< stop when |phi| >= 1 - eps_exit
  double hmax = 0.1;
  double pole_guard = 1e-12;     ///< reject stages with |1 - phi^2| below this
  double exit_bisect_width = 1e-10;
  std::size_t max_steps = 200000;
};

/// Time-ordered trajectory of one seed. Alongside each state the integrator
/// accumulates int_0^t w ds and int_0^t s*Gtilde(phi_s) ds with the same
/// quadrature order as the stepper (they ride in the ODE state).
struct Trajectory {
  enum class Status { alive, exited, failed };

  Complex z0;
  Status status = Status::alive;
  std::optional<double> exit_time;  ///< set iff status == exited
  std::string failure;              ///< set iff status == failed
  std::vector<FlowState> states;
  std::vector<Complex> herglotz_integral;   ///< int_0^{t_k} w ds
  std::vector<Complex> weighted_g_integral; ///< int_0^{t_k} s Gtilde(phi_s) ds

  bool alive() const { return status == Status::alive; }
  const FlowState& back() const { return states.back(); }
};

/// Right-hand side of d/dt [H(t, phi_t)]: the rational function G(phi).
/// Identically zero when alpha = beta = 0. Throws PoleError within
/// pole distance 1e-12 of phi = +-1.
Complex g_rhs(Complex phi, const TraceParams& p);

/// Closed-form derivative of g_rhs (validated against a high-order stencil
/// in the tests).
Complex g_rhs_deriv(Complex phi, const TraceParams& p);

/// The same function written as 2 phi (b^2 (1+phi)/(1-phi)^3
/// - a^2 (1-phi)/(1+phi)^3); algebraically equal to g_rhs. The integrator
/// uses this form for the weighted integral so the identity is exercised,
/// not assumed.
Complex g_section4(Complex phi, const TraceParams& p);

/// Time derivative of (phi, w, v, u) at a state.
std::array<Complex, 4> flow_rhs(const FlowState& s, const TraceParams& p);

/// Integrates the characteristic system from phi_0 = z0 with an embedded
/// Dormand-Prince 5(4) pair. Steps are clamped to half the distance to the
/// unit circle and to +-1; the exit event |phi| = 1 - eps_exit is localized
/// by bisection on the dense output. Failures are reported in the returned
/// status, never silently.
Trajectory integrate(Complex z0, const InitialData& init, double horizon,
                     const FlowOptions& opts = {});

struct ResidualStats {
  double max = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  ///< samples within `guard` of +-1, excluded
};

/// max_k | w_k^2 - Hinf(phi_k)^2 - (H(0,z0)^2 - Hinf(z0)^2) |.
/// Squares are compared so square-root branches cannot pollute the test.
/// Samples within `guard` of +-1 are excluded: there Hinf^2 ~ 1/dist^2 and
/// the double-precision cancellation noise alone exceeds any meaningful
/// tolerance.
ResidualStats residual_char_eq(const Trajectory& traj, const InitialData& init,
                               double guard = 0.05);

/// max_k | (w_k^2 - Phi(phi_k)^2) - (H(0,z0)^2 - Phi(z0)^2) |, the
/// subordination identity in squared form.
ResidualStats residual_k_subordination(const Trajectory& traj,
                                       const InitialData& init,
                                       double guard = 0.05);

/// max_k | phi_k - z0 exp(int_0^{t_k} w ds) |.
ResidualStats residual_exp_form(const Trajectory& traj);

/// max_k | t_k w_k - int w ds - int s Gtilde ds | (integration by parts).
ResidualStats ibp_residual(const Trajectory& traj, const InitialData& init,
                           double guard = 0.05);

/// max_k ( |Im int_0^{t_k} w ds| - (-2 |phi_k| ln|z0|) / (1 - |phi_k|^2) ).
/// Nonpositive when the bound holds at every sample. Requires z0 != 0.
double imag_integral_bound_excess(const Trajectory& traj);

}  // namespace liber
