#pragma once

#include <utility>
#include <vector>

#include "liber/flow.hpp"

namespace liber {

/// Recovered density profile of nu_t (angles over (-pi, pi]) or mu_t
/// (abscissae in (0,1)).
struct DensityProfile {
  double t = 0.0;
  double epsilon = 0.0;                          ///< boundary offset used
  std::vector<double> grid;                      ///< angles or abscissae
  std::vector<double> values;                    ///< non-negative samples
  std::vector<std::pair<double, double>> atoms;  ///< (location, mass)
  double mass_defect = 0.0;   ///< |quadrature + atom masses - 1|
  Complex first_moment;       ///< de-smoothed int xi dnu (or int x dmu in .real())
  int interpolated = 0;       ///< grid points healed after evaluation failures
};

/// Inverts omega = phi_t(.) by damped Newton with the variational derivative
/// v as the exact Jacobian, seeded from a precomputed forward-flow grid.
/// One inverter owns the seed grid for a fixed (t, initial data) pair and is
/// safe to share read-only across threads.
class FlowInverter {
 public:
  FlowInverter(const InitialData& init, double t, const FlowOptions& opts = {},
               int seed_radii = 64, int seed_angles = 64, unsigned workers = 0);

  double time() const { return t_; }
  const InitialData& initial_data() const { return init_; }

  /// z0 with |phi_t(z0) - omega| < 1e-10. Requires |omega| <= 1 - 1e-8.
  Complex eta(Complex omega) const;

  /// H(t, z): the w-component at the endpoint of the trajectory through
  /// eta(z). Re > 0.
  Complex h_eval(Complex z) const;

 private:
  struct Inverse {
    Complex z;        // preimage eta(omega)
    FlowState state;  // endpoint of the trajectory through it
  };
  Inverse solve(Complex omega) const;

  InitialData init_;
  double t_;
  FlowOptions opts_;
  std::vector<std::pair<Complex, Complex>> seeds_;  // (z0, phi_t(z0)), alive only
};

/// One-off helpers (construct a throwaway inverter).
Complex eta(double t, Complex omega, const InitialData& init,
            const FlowOptions& opts = {});
Complex h_eval(double t, Complex z, const InitialData& init,
               const FlowOptions& opts = {});

/// Density of nu_t on a uniform angle grid via the Poisson boundary values
/// Re H(t, (1-eps) e^{i theta}) / (2 pi). Atoms are detected with a
/// grid-matched probe radius, located by golden-section refinement,
/// quantified by atom_mass, and their Poisson smears subtracted from the
/// reported density. The first moment is de-smoothed exactly (Fourier modes
/// of the Poisson extension scale by (1-eps)^|k|).
DensityProfile nu_density(double t, int n_theta, double epsilon,
                          const InitialData& init, const FlowOptions& opts = {},
                          unsigned workers = 0);

/// Richardson-extrapolated atom mass of nu_t at angle theta0:
/// lim (1-r)/(1+r) Re H(t, r e^{i theta0}) over r = 1 - eps 2^{-k}.
double atom_mass(double t, double theta0, const InitialData& init,
                 double eps = 1e-3, int levels = 6, const FlowOptions& opts = {});
double atom_mass(const FlowInverter& inv, double theta0, double eps = 1e-3,
                 int levels = 6);

/// Density of mu_t on (delta, 1-delta) through the mu<->nu relationship and
/// Stieltjes boundary values along zeta = x + i eps. Endpoint atoms at 0 and
/// 1 are extracted by Richardson extrapolation of eps * (-Im G) and their
/// Cauchy lobes subtracted from the interior density.
DensityProfile mu_density(double t, int n_x, double epsilon,
                          const InitialData& init, const FlowOptions& opts = {},
                          unsigned workers = 0, double delta = 1e-3);

}  // namespace liber
