#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liber/transforms.hpp"

namespace liber {

struct CircleAtom {
  double theta = 0.0;  ///< angle in (-pi, pi]
  double mass = 0.0;
};

/// Probability measure on the unit circle: point masses plus an absolutely
/// continuous part sampled on a uniform angle grid over (-pi, pi].
/// Immutable after construction; all evaluations are pure.
class CircleMeasure {
 public:
  static constexpr int kDefaultGridSize = 2048;

  CircleMeasure() = default;
  CircleMeasure(std::vector<CircleAtom> atoms, std::vector<double> density);

  /// delta measure at angle theta.
  static CircleMeasure dirac(double theta = 0.0);
  /// Normalized Haar (uniform) measure with an n-point density grid.
  static CircleMeasure haar(int n = kDefaultGridSize);
  /// (1/2) delta_{e^{i theta0}} + (1/2) delta_{e^{-i theta0}}.
  static CircleMeasure symmetric_pair(double theta0);

  const std::vector<CircleAtom>& atoms() const { return atoms_; }
  const std::vector<double>& density() const { return density_; }
  int grid_size() const { return static_cast<int>(density_.size()); }
  /// Angle of density node j; nodes are -pi + 2pi(j+1)/n, so the grid covers
  /// (-pi, pi] and theta(n-1) = pi.
  double grid_angle(int j) const;

  /// Atom masses plus the trapezoid quadrature of the density.
  double total_mass() const;

  /// Empty iff the measure satisfies all axioms: unit mass within 1e-9,
  /// conjugation symmetry of atoms and density, non-negativity, angles in
  /// range. Reports violations, never throws.
  std::vector<std::string> validate() const;

  /// Herglotz transform int (xi+z)/(xi-z) dnu(xi), |z| < 1.
  Complex herglotz(Complex z) const;
  /// d/dz of the Herglotz transform: int 2 xi/(xi-z)^2 dnu(xi).
  Complex herglotz_deriv(Complex z) const;
  /// int xi dnu(xi).
  Complex first_moment() const;

  /// Parse {"atoms":[{"theta":..,"mass":..}],"density":{"n":..,"values":[..]}}.
  /// alpha/beta keys, when present, are returned through the out parameters.
  static CircleMeasure from_json_text(const std::string& text,
                                      double* alpha = nullptr,
                                      double* beta = nullptr);
  static CircleMeasure from_json_file(const std::string& path,
                                      double* alpha = nullptr,
                                      double* beta = nullptr);
  std::string to_json_text(const TraceParams* params = nullptr) const;

 private:
  std::vector<CircleAtom> atoms_;
  std::vector<double> density_;  // samples of dnu/dtheta on the uniform grid
};

/// Initial data of the characteristic flow: evaluators for H(0,.) and its
/// z-derivative, the trace parameters, and (when available) the measure
/// nu_0 itself. The "free" preset is defined by closed-form evaluators and
/// carries no measure.
struct InitialData {
  std::string name;  ///< preset provenance for reports
  std::function<Complex(Complex)> herglotz0;
  std::function<Complex(Complex)> herglotz0_deriv;
  TraceParams params;
  std::optional<CircleMeasure> measure0;
};

/// nu_0 = delta_1 (the P=Q case, RS = 1); alpha = beta in [-1,1].
InitialData preset_equal(double alpha);
/// H(0,.) = h_infinity(., p): the freely-independent (stationary) state.
InitialData preset_free(double alpha, double beta);
/// User-supplied measure and traces. The measure must validate; the traces
/// are trusted (realizability by genuine projections is not checked).
InitialData preset_custom(CircleMeasure m, double alpha, double beta,
                          std::string name = "custom");
/// Haar measure with alpha = beta = 0; H(0,.) == 1.
InitialData preset_haar();
/// Two conjugate atoms at exp(+-i theta0), alpha = beta = 0.
InitialData preset_two_atom(double theta0);

/// Dispatch by name: "equal", "free", "haar", "two-atom".
InitialData make_preset(const std::string& name, double alpha, double beta);

}  // namespace liber
