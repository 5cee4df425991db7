#include "liber/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "liber/closed_form.hpp"
#include "liber/extrapolation.hpp"
#include "liber/parallel.hpp"

namespace liber {

namespace {
constexpr double kPi = std::numbers::pi;

Trajectory run_or_throw(Complex z, double t, const InitialData& init,
                        const FlowOptions& opts) {
  Trajectory traj = integrate(z, init, t, opts);
  if (traj.status == Trajectory::Status::failed)
    throw ConvergenceError("flow integration failed at z=(" +
                           std::to_string(z.real()) + "," + std::to_string(z.imag()) +
                           "): " + traj.failure);
  return traj;
}

// Angles clustered near 0 and pi where the boundary meets the real axis.
std::vector<double> clustered_angles(int n) {
  std::vector<double> out(n);
  const double gamma = 0.8;
  for (int k = 0; k < n; ++k) {
    const double u = -1.0 + 2.0 * (k + 0.5) / n;  // symmetric under conjugation
    out[k] = kPi * (u - gamma * std::sin(2.0 * kPi * u) / (2.0 * kPi));
  }
  return out;
}

}  // namespace

bool contains(Complex z, double t, const InitialData& init, const FlowOptions& opts) {
  if (std::abs(z) >= 1.0) throw DomainError("contains: |z| must be < 1");
  return run_or_throw(z, t, init, opts).alive();
}

double h_t_value(double r, double theta, double t, const InitialData& init,
                 const FlowOptions& opts) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("h_t_value: r must be in (0,1)");
  const Complex z = std::polar(r, theta);
  Trajectory traj = run_or_throw(z, t, init, opts);
  if (traj.alive())
    return std::log(std::abs(traj.back().phi)) / std::log(r);
  return -(t - traj.exit_time.value_or(t));
}

DomainSnapshot trace_boundary(double t, int n_theta, double tol,
                              const InitialData& init, unsigned workers,
                              const FlowOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("trace_boundary: t must be > 0");
  DomainSnapshot snap;
  snap.t = t;
  const auto angles = clustered_angles(n_theta);
  snap.boundary.resize(n_theta);
  std::vector<std::string> ray_warnings(n_theta);

  parallel_for(n_theta, workers, [&](std::size_t k) {
    const double theta = angles[k];
    auto inside = [&](double r) { return contains(std::polar(r, theta), t, init, opts); };
    double lo = 0.02;
    while (lo > 1e-7 && !inside(lo)) lo *= 0.5;
    double hi = 1.0 - tol;
    BoundaryPoint pt;
    pt.theta = theta;
    if (inside(hi)) {
      pt.r = 1.0;
      pt.kind = BoundaryKind::circle;
    } else {
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
      pt.r = 0.5 * (lo + hi);
      pt.kind = pt.r > 1.0 - 10.0 * tol ? BoundaryKind::circle : BoundaryKind::interior;
      // Audit monotonicity of the predicate above the located radius.
      for (int j = 1; j <= 3; ++j) {
        const double rp = pt.r + j * (1.0 - tol - pt.r) / 4.0;
        if (rp <= pt.r || rp >= 1.0 - opts.eps_exit) break;
        if (inside(rp)) {
          ray_warnings[k] = "non-monotone exit predicate along theta=" + std::to_string(theta);
          break;
        }
      }
    }
    snap.boundary[k] = pt;
  });

  for (auto& w : ray_warnings)
    if (!w.empty()) snap.warnings.push_back(std::move(w));
  std::sort(snap.boundary.begin(), snap.boundary.end(),
            [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.theta < b.theta; });
  snap.x = x_endpoints(t, init, std::max(tol * 1e-3, 1e-12), opts);
  return snap;
}

bool boundary_is_simple(const DomainSnapshot& snap) {
  const auto& b = snap.boundary;
  const int n = static_cast<int>(b.size());
  if (n < 4) return true;
  auto pt = [&](int i) {
    const auto& p = b[(i % n + n) % n];
    return std::polar(p.r, p.theta);
  };
  auto seg_intersect = [](Complex p1, Complex p2, Complex q1, Complex q2) {
    auto cross = [](Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); };
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (seg_intersect(pt(i), pt(i + 1), pt(j), pt(j + 1))) return false;
    }
  return true;
}

XEndpoints x_endpoints(double t, const InitialData& init, double tol,
                       const FlowOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("x_endpoints: t must be > 0");
  XEndpoints out;
  auto locate = [&](int sign) {
    auto inside = [&](double x) { return contains(sign * x, t, init, opts); };
    const double probe = 1.0 - 1e-6;
    if (inside(probe)) {
      // Boundary reaches the circle on this side (a = b = 0 degeneracy).
      return std::pair<double, bool>{static_cast<double>(sign), true};
    }
    double lo = 1e-6, hi = probe;
    while (!inside(lo) && lo > 1e-12) lo *= 0.5;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) ? lo : hi) = mid;
    }
    // Refine with the closed form: phi_real is finite inside, out-of-domain
    // beyond the endpoint.
    auto formula_inside = [&](double x) {
      try {
        return std::abs(phi_real(t, sign * x, init)) < 1.0;
      } catch (const OutOfDomainError&) {
        return false;
      } catch (const BranchError&) {
        return false;
      }
    };
    double flo = std::max(lo - 1e-5, 1e-12), fhi = std::min(hi + 1e-5, probe);
    if (formula_inside(flo) && !formula_inside(fhi)) {
      while (fhi - flo > tol) {
        const double mid = 0.5 * (flo + fhi);
        (formula_inside(mid) ? flo : fhi) = mid;
      }
      return std::pair<double, bool>{sign * 0.5 * (flo + fhi), false};
    }
    return std::pair<double, bool>{sign * 0.5 * (lo + hi), false};
  };
  auto [xp, ptouch] = locate(+1);
  auto [xm, mtouch] = locate(-1);
  out.x_plus = xp;
  out.plus_touching = ptouch;
  out.x_minus = xm;
  out.minus_touching = mtouch;
  return out;
}

BoundaryLimit boundary_derivative_limit(double theta, double t, const InitialData& init,
                                        double eps, int levels, const FlowOptions& opts) {
  BoundaryLimit out;
  std::vector<double> hs(levels), vals(levels);
  for (int k = 0; k < levels; ++k) {
    const double h = eps * std::pow(2.0, -k);
    const double r = 1.0 - h;
    Trajectory traj = run_or_throw(std::polar(r, theta), t, init, opts);
    if (!traj.alive()) {
      out.diverged = true;  // theta in I_t: the ray leaves the domain
      return out;
    }
    const double mod = std::abs(traj.back().phi);
    hs[k] = h;
    vals[k] = (1.0 - mod * mod) / (-std::log(r));
  }
  out.value = neville_extrapolate(hs, vals);
  if (!(out.value >= -1e-6 && out.value < 2.0)) out.diverged = true;
  return out;
}

double boundary_derivative_variational(double theta, double t, const InitialData& init,
                                       double r, const FlowOptions& opts) {
  Trajectory traj = run_or_throw(std::polar(r, theta), t, init, opts);
  if (!traj.alive())
    throw OutOfDomainError("boundary_derivative_variational: ray exits before t");
  const Complex zeta = std::polar(1.0, theta);
  return 2.0 * (zeta * traj.back().v / traj.back().phi).real();
}

}  // namespace liber
