#pragma once

#include <string>
#include <vector>

#include "liber/flow.hpp"

namespace liber {

enum class BoundaryKind { interior, circle };

struct BoundaryPoint {
  double theta = 0.0;  ///< angle of the seed ray
  double r = 0.0;      ///< located boundary radius in (0, 1]
  BoundaryKind kind = BoundaryKind::interior;
};

struct XEndpoints {
  double x_minus = -1.0, x_plus = 1.0;
  bool minus_touching = false;  ///< boundary reaches -1 (possible when a=b=0)
  bool plus_touching = false;
};

struct DomainSnapshot {
  double t = 0.0;
  std::vector<BoundaryPoint> boundary;  ///< ordered by theta
  XEndpoints x;
  std::vector<std::string> warnings;    ///< non-monotone rays etc., never silent
};

/// True iff the trajectory from z survives to time t (t < T_z).
bool contains(Complex z, double t, const InitialData& init,
              const FlowOptions& opts = {});

/// h_t(r, e^{i theta}) computed through the log-modulus identity as
/// ln|phi_t(r e^{i theta})| / ln r. Positive iff the point lies in the
/// domain. For points whose trajectory exits at T < t the returned value is
/// the (negative) censoring gap -(t - T): same sign, vanishing at the
/// boundary.
double h_t_value(double r, double theta, double t, const InitialData& init,
                 const FlowOptions& opts = {});

/// Per-ray exit-time bisection at angles clustered near 0 and pi. A located
/// radius above 1 - 10*tol is classified circle-boundary (theta outside
/// I_t); a few radii above the located one are probed to audit predicate
/// monotonicity.
DomainSnapshot trace_boundary(double t, int n_theta, double tol,
                              const InitialData& init, unsigned workers = 0,
                              const FlowOptions& opts = {});

/// Simple-closed-curve audit of the boundary polyline (no intersections
/// between non-adjacent segments) at the sampled resolution.
bool boundary_is_simple(const DomainSnapshot& snap);

/// Real-axis endpoints of the domain, located by exit-time bisection and
/// refined with the closed-form flow hitting +-1. When the boundary touches
/// +-1 itself (possible for a = b = 0) the touching flag is set.
XEndpoints x_endpoints(double t, const InitialData& init, double tol = 1e-9,
                       const FlowOptions& opts = {});

struct BoundaryLimit {
  double value = 0.0;
  bool diverged = false;  ///< theta in I_t: the limit is not in [0,2)
};

/// lim_{r->1^-} (1 - |phi_t(r e^{i theta})|^2) / (-ln r), evaluated by
/// Richardson extrapolation over r = 1 - eps 2^{-k}. Lies in [0,2) at
/// circle-boundary angles.
BoundaryLimit boundary_derivative_limit(double theta, double t,
                                        const InitialData& init,
                                        double eps = 1e-3, int levels = 5,
                                        const FlowOptions& opts = {});

/// Independent estimate of the same limit from the variational flow:
/// 2 Re[(e^{i theta} / phi) v] at radius r.
double boundary_derivative_variational(double theta, double t,
                                       const InitialData& init,
                                       double r = 1.0 - 1e-6,
                                       const FlowOptions& opts = {});

}  // namespace liber
