#include "liber/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "liber/extrapolation.hpp"
#include "liber/parallel.hpp"

namespace liber {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNewtonTol = 1e-10;
constexpr double kRimMargin = 1e-8;

struct Preimage {
  Complex z;
  FlowState state;
};
}  // namespace

FlowInverter::FlowInverter(const InitialData& init, double t, const FlowOptions& opts,
                           int seed_radii, int seed_angles, unsigned workers)
    : init_(init), t_(t), opts_(opts) {
  if (t < 0.0) throw std::invalid_argument("FlowInverter: t must be >= 0");
  seeds_.emplace_back(Complex(0.0), Complex(0.0));
  if (t == 0.0) return;  // eta is the identity; no grid needed
  std::vector<std::pair<Complex, Complex>> grid(
      static_cast<std::size_t>(seed_radii) * seed_angles,
      {Complex(0.0), Complex(std::numeric_limits<double>::quiet_NaN(), 0.0)});
  parallel_for(grid.size(), workers, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / seed_angles;
    const int j = static_cast<int>(idx) % seed_angles;
    const double r = (i + 1.0) / (seed_radii + 1.0);
    const double th = -kPi + 2.0 * kPi * (j + 0.5) / seed_angles;
    const Complex z0 = std::polar(r, th);
    Trajectory traj = integrate(z0, init_, t_, opts_);
    if (traj.alive()) grid[idx] = {z0, traj.back().phi};
  });
  seeds_.reserve(grid.size() + 1);
  for (const auto& g : grid)
    if (!std::isnan(g.second.real())) seeds_.push_back(g);
}

FlowInverter::Inverse FlowInverter::solve(Complex omega) const {
  if (std::abs(omega) > 1.0 - kRimMargin)
    throw DomainError("eta/h_eval: |omega| must be <= 1 - 1e-8");
  if (omega == Complex(0.0) || t_ == 0.0) {
    Trajectory traj = integrate(omega, init_, t_, opts_);
    return {omega, traj.back()};
  }
  // Nearest precomputed endpoint as the Newton starting point.
  Complex z = 0.0;
  double best = std::abs(omega);  // endpoint of the origin seed
  for (const auto& [z0, ph] : seeds_) {
    const double d = std::abs(ph - omega);
    if (d < best) {
      best = d;
      z = z0;
    }
  }
  Trajectory traj = integrate(z, init_, t_, opts_);
  if (!traj.alive()) throw ConvergenceError("eta: seed trajectory exits early");
  FlowState s = traj.back();
  double resid = std::abs(s.phi - omega);
  for (int iter = 0; iter < 50 && resid >= kNewtonTol; ++iter) {
    const Complex step = (s.phi - omega) / s.v;  // v is the exact Jacobian
    double lambda = 1.0;
    for (;;) {
      const Complex zn = z - lambda * step;
      bool accepted = false;
      if (std::abs(zn) < 1.0) {
        Trajectory tn = integrate(zn, init_, t_, opts_);
        if (tn.alive()) {
          const double rn = std::abs(tn.back().phi - omega);
          if (rn < resid || lambda <= 1e-3) {
            z = zn;
            s = tn.back();
            resid = rn;
            accepted = true;
          }
        }
      }
      if (accepted) break;
      lambda *= 0.5;
      if (lambda < 1e-4)
        throw ConvergenceError("eta: damped Newton stalled, |phi-omega|=" +
                               std::to_string(resid));
    }
  }
  if (resid >= kNewtonTol)
    throw ConvergenceError("eta: no convergence after 50 steps, last residual " +
                           std::to_string(resid));
  preimage_ = z;
  return s;
}

Complex FlowInverter::eta(Complex omega) const {
  if (std::abs(omega) > 1.0 - kRimMargin)
    throw DomainError("eta: |omega| must be <= 1 - 1e-8");
  if (t_ == 0.0 || omega == Complex(0.0)) return omega;
  solve(omega);
  return preimage_;
}

Complex FlowInverter::h_eval(Complex z) const {
  if (std::abs(z) > 1.0 - kRimMargin)
    throw DomainError("h_eval: |z| must be <= 1 - 1e-8");
  if (t_ == 0.0) return init_.herglotz0(z);
  return solve(z).w;
}

Complex eta(double t, Complex omega, const InitialData& init, const FlowOptions& opts) {
  return FlowInverter(init, t, opts).eta(omega);
}

Complex h_eval(double t, Complex z, const InitialData& init, const FlowOptions& opts) {
  return FlowInverter(init, t, opts).h_eval(z);
}

namespace {

double atom_statistic(const FlowInverter& inv, double theta0, double r) {
  const Complex h = inv.h_eval(std::polar(r, theta0));
  return (1.0 - r) / (1.0 + r) * h.real();
}

double atom_mass_impl(const FlowInverter& inv, double theta0, double eps, int levels) {
  std::vector<double> hs(levels), vals(levels);
  for (int k = 0; k < levels; ++k) {
    const double h = eps * std::pow(2.0, -k);
    hs[k] = h;
    vals[k] = atom_statistic(inv, theta0, 1.0 - h);
  }
  const double m = neville_extrapolate(hs, vals);
  return std::abs(m) < 1e-8 ? 0.0 : std::max(m, 0.0);
}

double poisson_kernel(double r, double dtheta) {
  return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(dtheta) + r * r);
}

}  // namespace

double atom_mass(const FlowInverter& inv, double theta0, double eps, int levels) {
  return atom_mass_impl(inv, theta0, eps, levels);
}

double atom_mass(double t, double theta0, const InitialData& init, double eps,
                 int levels, const FlowOptions& opts) {
  FlowInverter inv(init, t, opts);
  return atom_mass_impl(inv, theta0, eps, levels);
}

DensityProfile nu_density(double t, int n_theta, double epsilon,
                          const InitialData& init, const FlowOptions& opts,
                          unsigned workers) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-2))
    throw std::invalid_argument("nu_density: epsilon must be in [1e-6, 1e-2]");
  DensityProfile prof;
  prof.t = t;
  prof.epsilon = epsilon;
  prof.grid.resize(n_theta);
  prof.values.assign(n_theta, 0.0);
  const double r = 1.0 - epsilon;
  const double spacing = 2.0 * kPi / n_theta;
  for (int j = 0; j < n_theta; ++j) prof.grid[j] = -kPi + spacing * (j + 1);

  FlowInverter inv(init, t, opts, 64, 64, workers);
  std::vector<char> failed(n_theta, 0);
  parallel_for(n_theta, workers, [&](std::size_t j) {
    try {
      prof.values[j] = inv.h_eval(std::polar(r, prof.grid[j])).real() / (2.0 * kPi);
    } catch (const std::exception&) {
      failed[j] = 1;
    }
  });
  // Heal isolated failures by linear interpolation between good neighbors.
  for (int j = 0; j < n_theta; ++j) {
    if (!failed[j]) continue;
    int l = (j + n_theta - 1) % n_theta, rr = (j + 1) % n_theta;
    while (failed[l]) l = (l + n_theta - 1) % n_theta;
    while (failed[rr]) rr = (rr + 1) % n_theta;
    prof.values[j] = 0.5 * (prof.values[l] + prof.values[rr]);
    ++prof.interpolated;
  }

  // Atom detection: probe with a radius matched to the grid spacing so an
  // atom between nodes still lights up, then refine the location and extract
  // the mass by extrapolation.
  const double eps_detect = std::clamp(2.0 * spacing, epsilon, 1e-1);
  const double r_detect = 1.0 - eps_detect;
  std::vector<double> candidates = {0.0, kPi};
  if (init.measure0)
    for (const auto& a : init.measure0->atoms()) candidates.push_back(a.theta);
  for (int j = 0; j < n_theta; ++j) {
    const int l = (j + n_theta - 1) % n_theta, rr = (j + 1) % n_theta;
    if (prof.values[j] > prof.values[l] && prof.values[j] >= prof.values[rr] &&
        prof.values[j] * 2.0 * kPi * epsilon > 0.02)
      candidates.push_back(prof.grid[j]);
  }
  std::sort(candidates.begin(), candidates.end());
  const double kThreshold = 0.05;  // on eps * Re H, reported with the profile
  double prev_loc = std::numeric_limits<double>::quiet_NaN();
  for (double cand : candidates) {
    if (!std::isnan(prev_loc) && std::abs(cand - prev_loc) < 2.0 * spacing) continue;
    double stat;
    try {
      stat = eps_detect * inv.h_eval(std::polar(r_detect, cand)).real();
    } catch (const std::exception&) {
      continue;
    }
    if (stat <= kThreshold) continue;
    // Golden-section refinement of the peak of Re H around the candidate.
    double lo = cand - spacing, hi = cand + spacing;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    auto peak = [&](double th) {
      return inv.h_eval(std::polar(r_detect, th)).real();
    };
    double f1 = peak(x1), f2 = peak(x2);
    for (int it = 0; it < 40 && hi - lo > 1e-10; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = peak(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = peak(x1);
      }
    }
    const double loc = 0.5 * (lo + hi);
    const double mass = atom_mass_impl(inv, loc, 1e-3, 6);
    if (mass > 1e-4) {
      prof.atoms.emplace_back(loc, mass);
      prev_loc = cand;
    }
  }

  // Subtract the Poisson smear of each atom from the sampled density; nodes
  // right at an atom are reconstruction artifacts and are re-interpolated.
  for (const auto& [loc, mass] : prof.atoms) {
    for (int j = 0; j < n_theta; ++j)
      prof.values[j] -= mass * poisson_kernel(r, prof.grid[j] - loc) / (2.0 * kPi);
    for (int j = 0; j < n_theta; ++j) {
      const double d = std::abs(std::remainder(prof.grid[j] - loc, 2.0 * kPi));
      if (d < 2.5 * spacing) {
        int l = j, rr = j;
        do l = (l + n_theta - 1) % n_theta;
        while (std::abs(std::remainder(prof.grid[l] - loc, 2.0 * kPi)) < 2.5 * spacing);
        do rr = (rr + 1) % n_theta;
        while (std::abs(std::remainder(prof.grid[rr] - loc, 2.0 * kPi)) < 2.5 * spacing);
        prof.values[j] = 0.5 * (prof.values[l] + prof.values[rr]);
      }
    }
  }

  // Positivity: tolerate roundoff, fail on anything genuinely negative.
  for (double& v : prof.values) {
    if (v < -1e-9)
      throw ConvergenceError("nu_density: negative density sample " + std::to_string(v));
    if (v < 0.0) v = 0.0;
  }

  double mass = 0.0;
  Complex moment = 0.0;
  for (int j = 0; j < n_theta; ++j) {
    mass += prof.values[j];
    moment += prof.values[j] * std::polar(1.0, prof.grid[j]);
  }
  mass *= spacing;
  moment *= spacing;
  moment /= r;  // exact de-smoothing of the first Fourier mode
  for (const auto& [loc, m] : prof.atoms) {
    mass += m;
    moment += m * std::polar(1.0, loc);
  }
  prof.mass_defect = std::abs(mass - 1.0);
  prof.first_moment = moment;
  return prof;
}

DensityProfile mu_density(double t, int n_x, double epsilon, const InitialData& init,
                          const FlowOptions& opts, unsigned workers, double delta) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-2))
    throw std::invalid_argument("mu_density: epsilon must be in [1e-6, 1e-2]");
  DensityProfile prof;
  prof.t = t;
  prof.epsilon = epsilon;
  prof.grid.resize(n_x);
  prof.values.assign(n_x, 0.0);
  const double lo = delta, hi = 1.0 - delta;
  for (int j = 0; j < n_x; ++j)
    prof.grid[j] = lo + (hi - lo) * (j + 0.5) / n_x;

  FlowInverter inv(init, t, opts, 64, 64, workers);
  auto h_nu = [&inv](Complex z) { return inv.h_eval(z); };
  auto stieltjes = [&](Complex zeta) {
    const Complex hmu = nu_to_mu_herglotz(h_nu, init.params, 1.0 / zeta);
    return (hmu + 1.0) / (2.0 * zeta);
  };

  std::vector<char> failed(n_x, 0);
  parallel_for(n_x, workers, [&](std::size_t j) {
    try {
      const Complex g = stieltjes(Complex(prof.grid[j], epsilon));
      prof.values[j] = -g.imag() / kPi;
    } catch (const std::exception&) {
      failed[j] = 1;
    }
  });
  for (int j = 0; j < n_x; ++j) {
    if (!failed[j]) continue;
    int l = j > 0 ? j - 1 : j + 1, rr = j < n_x - 1 ? j + 1 : j - 1;
    prof.values[j] = 0.5 * (prof.values[l] + prof.values[rr]);
    ++prof.interpolated;
  }

  // Endpoint atoms at 0 and 1: mass = lim eps' * (-Im G(x0 + i eps')).
  for (double x0 : {0.0, 1.0}) {
    std::vector<double> hs, vals;
    bool ok = true;
    for (int k = 0; k < 6; ++k) {
      const double e = 1e-2 * std::pow(2.0, -k);
      try {
        const Complex g = stieltjes(Complex(x0, e));
        hs.push_back(e);
        vals.push_back(e * (-g.imag()));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok || hs.size() < 3) continue;
    const double m = neville_extrapolate(hs, vals);
    if (m > 1e-4) prof.atoms.emplace_back(x0, m);
  }

  // Remove the Cauchy lobes of the endpoint atoms from the interior samples.
  for (const auto& [loc, mass] : prof.atoms)
    for (int j = 0; j < n_x; ++j) {
      const double d = prof.grid[j] - loc;
      prof.values[j] -= mass / kPi * epsilon / (d * d + epsilon * epsilon);
    }

  for (double& v : prof.values) {
    if (v < -1e-9)
      throw ConvergenceError("mu_density: negative density sample " + std::to_string(v));
    if (v < 0.0) v = 0.0;
  }

  const double dx = (hi - lo) / n_x;
  double mass = 0.0, mean = 0.0;
  for (int j = 0; j < n_x; ++j) {
    mass += prof.values[j];
    mean += prof.values[j] * prof.grid[j];
  }
  mass *= dx;
  mean *= dx;
  for (const auto& [loc, m] : prof.atoms) {
    mass += m;
    mean += m * loc;
  }
  prof.mass_defect = std::abs(mass - 1.0);
  prof.first_moment = mean;
  return prof;
}

}  // namespace liber
