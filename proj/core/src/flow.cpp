#include "liber/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace liber {

Complex g_rhs(Complex phi, const TraceParams& p) {
  if (p.alpha == 0.0 && p.beta == 0.0) return 0.0;
  const Complex phi2 = phi * phi;
  const Complex den1 = (1.0 - phi) * (1.0 + phi);
  if (std::abs(den1) < 1e-12) throw PoleError("g_rhs: phi too close to +-1");
  const double s2 = p.alpha * p.alpha + p.beta * p.beta;
  const double ab = p.alpha * p.beta;
  const Complex num =
      4.0 * s2 * phi2 * (1.0 + phi2) + 2.0 * ab * phi * (1.0 + 6.0 * phi2 + phi2 * phi2);
  return num / (den1 * den1 * den1);
}

Complex g_rhs_deriv(Complex phi, const TraceParams& p) {
  if (p.alpha == 0.0 && p.beta == 0.0) return 0.0;
  const Complex phi2 = phi * phi;
  const Complex den1 = (1.0 - phi) * (1.0 + phi);
  if (std::abs(den1) < 1e-12) throw PoleError("g_rhs_deriv: phi too close to +-1");
  const double s2 = p.alpha * p.alpha + p.beta * p.beta;
  const double ab = p.alpha * p.beta;
  const Complex num =
      4.0 * s2 * phi2 * (1.0 + phi2) + 2.0 * ab * phi * (1.0 + 6.0 * phi2 + phi2 * phi2);
  const Complex dnum =
      4.0 * s2 * (2.0 * phi + 4.0 * phi * phi2) +
      2.0 * ab * (1.0 + 18.0 * phi2 + 5.0 * phi2 * phi2);
  // (num/den^3)' = (num' den + 6 phi num) / den^4
  const Complex den2 = den1 * den1;
  return (dnum * den1 + 6.0 * phi * num) / (den2 * den2);
}

Complex g_section4(Complex phi, const TraceParams& p) {
  const double a = p.a(), b = p.b();
  Complex out = 0.0;
  if (b != 0.0) {
    const Complex d = 1.0 - phi;
    if (std::abs(d) < 1e-12) throw PoleError("g_section4: phi too close to +1");
    out += b * b * (1.0 + phi) / (d * d * d);
  }
  if (a != 0.0) {
    const Complex d = 1.0 + phi;
    if (std::abs(d) < 1e-12) throw PoleError("g_section4: phi too close to -1");
    out -= a * a * (1.0 - phi) / (d * d * d);
  }
  return 2.0 * phi * out;
}

std::array<Complex, 4> flow_rhs(const FlowState& s, const TraceParams& p) {
  return {s.phi * s.w, g_rhs(s.phi, p), s.v * s.w + s.phi * s.u,
          g_rhs_deriv(s.phi, p) * s.v};
}

namespace {

// ODE state: phi, w, v, u, int w ds, int s*Gtilde ds.
struct Vec6 {
  std::array<Complex, 6> y{};
  Complex& operator[](int i) { return y[i]; }
  const Complex& operator[](int i) const { return y[i]; }
};

Vec6 axpy(const Vec6& base, double h,
          std::initializer_list<std::pair<double, const Vec6*>> terms) {
  Vec6 out = base;
  for (const auto& [c, k] : terms)
    for (int i = 0; i < 6; ++i) out[i] += h * c * (*k)[i];
  return out;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
// Dense-output coefficients (Hairer & Wanner, DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

class Stepper {
 public:
  Stepper(const InitialData& init, const FlowOptions& opts)
      : p_(init.params), opts_(opts) {}

  Vec6 rhs(double t, const Vec6& y) const {
    const Complex phi = y[0], w = y[1], v = y[2], u = y[3];
    Vec6 f;
    f[0] = phi * w;
    f[1] = g_rhs(phi, p_);
    f[2] = v * w + phi * u;
    f[3] = g_rhs_deriv(phi, p_) * v;
    f[4] = w;
    f[5] = t * g_section4(phi, p_);
    return f;
  }

  // One trial step; fills k2..k7 and the candidate y1; k7 = f(t+h, y1) (FSAL).
  Vec6 try_step(double t, const Vec6& y0, const Vec6& k1, double h) {
    k_[0] = k1;
    Vec6 y = axpy(y0, h, {{a21, &k_[0]}});
    k_[1] = rhs(t + c2 * h, y);
    y = axpy(y0, h, {{a31, &k_[0]}, {a32, &k_[1]}});
    k_[2] = rhs(t + c3 * h, y);
    y = axpy(y0, h, {{a41, &k_[0]}, {a42, &k_[1]}, {a43, &k_[2]}});
    k_[3] = rhs(t + c4 * h, y);
    y = axpy(y0, h, {{a51, &k_[0]}, {a52, &k_[1]}, {a53, &k_[2]}, {a54, &k_[3]}});
    k_[4] = rhs(t + c5 * h, y);
    y = axpy(y0, h,
             {{a61, &k_[0]}, {a62, &k_[1]}, {a63, &k_[2]}, {a64, &k_[3]}, {a65, &k_[4]}});
    k_[5] = rhs(t + h, y);
    Vec6 y1 = axpy(y0, h,
                   {{b1, &k_[0]}, {b3, &k_[2]}, {b4, &k_[3]}, {b5, &k_[4]}, {b6, &k_[5]}});
    k_[6] = rhs(t + h, y1);
    return y1;
  }

  double error_norm(const Vec6& y0, const Vec6& y1, double h) const {
    double acc = 0.0;
    for (int i = 0; i < 6; ++i) {
      const Complex err = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] +
                               e5 * k_[4][i] + e6 * k_[5][i] + e7 * k_[6][i]);
      const double sc =
          opts_.atol + opts_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double e = std::abs(err) / sc;
      acc += e * e;
    }
    return std::sqrt(acc / 6.0);
  }

  // Continuous extension on the last accepted step.
  void prepare_dense(const Vec6& y0, const Vec6& y1, double h) {
    for (int i = 0; i < 6; ++i) {
      const Complex dy = y1[i] - y0[i];
      rc1_[i] = y0[i];
      rc2_[i] = dy;
      rc3_[i] = h * k_[0][i] - dy;
      rc4_[i] = dy - h * k_[6][i] - rc3_[i];
      rc5_[i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                     d6 * k_[5][i] + d7 * k_[6][i]);
    }
  }

  Vec6 dense_eval(double theta) const {
    Vec6 out;
    const double om = 1.0 - theta;
    for (int i = 0; i < 6; ++i)
      out[i] = rc1_[i] +
               theta * (rc2_[i] + om * (rc3_[i] + theta * (rc4_[i] + om * rc5_[i])));
    return out;
  }

  const Vec6& k7() const { return k_[6]; }

 private:
  TraceParams p_;
  FlowOptions opts_;
  std::array<Vec6, 7> k_{};
  Vec6 rc1_, rc2_, rc3_, rc4_, rc5_;
};

double dist_to_exit_set(Complex phi) {
  return std::min({1.0 - std::abs(phi), std::abs(phi - 1.0), std::abs(phi + 1.0)});
}

}  // namespace

Trajectory integrate(Complex z0, const InitialData& init, double horizon,
                     const FlowOptions& opts) {
  Trajectory traj;
  traj.z0 = z0;
  if (std::abs(z0) >= 1.0) throw DomainError("integrate: |z0| must be < 1");
  if (horizon < 0.0) throw std::invalid_argument("integrate: horizon must be >= 0");

  Stepper st(init, opts);
  Vec6 y;
  y[0] = z0;
  y[1] = init.herglotz0(z0);
  y[2] = 1.0;
  y[3] = init.herglotz0_deriv(z0);
  y[4] = 0.0;
  y[5] = 0.0;

  double t = 0.0;
  auto record = [&](double tt, const Vec6& v) {
    traj.states.push_back({tt, v[0], v[1], v[2], v[3]});
    traj.herglotz_integral.push_back(v[4]);
    traj.weighted_g_integral.push_back(v[5]);
  };
  record(t, y);
  if (horizon == 0.0) return traj;

  const double exit_radius = 1.0 - opts.eps_exit;
  if (std::abs(z0) >= exit_radius) {
    traj.status = Trajectory::Status::exited;
    traj.exit_time = 0.0;
    return traj;
  }

  Vec6 k1;
  try {
    k1 = st.rhs(t, y);
  } catch (const PoleError& e) {
    traj.status = Trajectory::Status::failed;
    traj.failure = e.what();
    return traj;
  }

  double h = std::min({opts.hmax, horizon, 1e-3});
  std::size_t steps = 0;
  while (t < horizon) {
    if (horizon - t <= 1e-14 * std::max(1.0, horizon)) break;
    if (++steps > opts.max_steps) {
      traj.status = Trajectory::Status::failed;
      traj.failure = "step budget exhausted";
      return traj;
    }
    // Clamp by the distance to the unit circle and to the poles +-1.
    const double speed = std::abs(k1[0]);
    if (speed > 0.0)
      h = std::min(h, 0.5 * dist_to_exit_set(y[0]) / speed);
    h = std::min({h, opts.hmax, horizon - t});
    if (h < 1e-14 * std::max(1.0, t)) {
      traj.status = Trajectory::Status::failed;
      traj.failure = "step size underflow";
      return traj;
    }

    Vec6 y1;
    bool stage_pole = false;
    try {
      y1 = st.try_step(t, y, k1, h);
    } catch (const PoleError&) {
      stage_pole = true;
    }
    if (stage_pole ||
        std::abs((1.0 - y1[0]) * (1.0 + y1[0])) < opts.pole_guard) {
      h *= 0.5;
      continue;
    }
    const double err = st.error_norm(y, y1, h);
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    // Accepted.
    st.prepare_dense(y, y1, h);
    const double t1 = t + h;
    if (std::abs(y1[0]) >= exit_radius) {
      // Localize the first time |phi| reaches the exit radius.
      double lo = 0.0, hi = 1.0;
      while ((hi - lo) * h > opts.exit_bisect_width) {
        const double mid = 0.5 * (lo + hi);
        if (std::abs(st.dense_eval(mid)[0]) >= exit_radius)
          hi = mid;
        else
          lo = mid;
      }
      const double theta = 0.5 * (lo + hi);
      const Vec6 ye = st.dense_eval(theta);
      record(t + theta * h, ye);
      traj.status = Trajectory::Status::exited;
      traj.exit_time = t + theta * h;
      return traj;
    }

    if (y1[1].real() <= 0.0) {
      traj.status = Trajectory::Status::failed;
      traj.failure = "Herglotz positivity lost along trajectory";
      return traj;
    }

    t = t1;
    y = y1;
    k1 = st.k7();  // FSAL
    record(t, y);
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
  }
  return traj;
}

namespace {

template <typename F>
ResidualStats guarded_max(const Trajectory& traj, double guard, F&& value) {
  ResidualStats out;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Complex phi = traj.states[k].phi;
    if (std::min(std::abs(phi - 1.0), std::abs(phi + 1.0)) < guard) {
      ++out.skipped;
      continue;
    }
    out.max = std::max(out.max, value(k));
    ++out.used;
  }
  return out;
}

}  // namespace

ResidualStats residual_char_eq(const Trajectory& traj, const InitialData& init,
                               double guard) {
  const Complex z0 = traj.z0;
  const Complex h0 = traj.states.front().w;
  const Complex rhs = h0 * h0 - h_infinity_squared(z0, init.params);
  return guarded_max(traj, guard, [&](std::size_t k) {
    const Complex w = traj.states[k].w;
    const Complex lhs = w * w - h_infinity_squared(traj.states[k].phi, init.params);
    return std::abs(lhs - rhs);
  });
}

ResidualStats residual_k_subordination(const Trajectory& traj, const InitialData& init,
                                       double guard) {
  const Complex h0 = traj.states.front().w;
  const Complex rhs = k_squared(h0, traj.z0, init.params);
  return guarded_max(traj, guard, [&](std::size_t k) {
    const Complex lhs =
        k_squared(traj.states[k].w, traj.states[k].phi, init.params);
    return std::abs(lhs - rhs);
  });
}

ResidualStats residual_exp_form(const Trajectory& traj) {
  ResidualStats out;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out.max = std::max(out.max, std::abs(traj.states[k].phi -
                                         traj.z0 * std::exp(traj.herglotz_integral[k])));
    ++out.used;
  }
  return out;
}

ResidualStats ibp_residual(const Trajectory& traj, const InitialData& init,
                           double guard) {
  (void)init;
  return guarded_max(traj, guard, [&](std::size_t k) {
    const auto& s = traj.states[k];
    return std::abs(s.t * s.w - traj.herglotz_integral[k] -
                    traj.weighted_g_integral[k]);
  });
}

double imag_integral_bound_excess(const Trajectory& traj) {
  if (traj.z0 == Complex(0.0))
    throw std::invalid_argument("imag_integral_bound_excess: z0 must be nonzero");
  const double lnz = std::log(std::abs(traj.z0));
  double excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double mod = std::abs(traj.states[k].phi);
    const double bound = -2.0 * mod * lnz / (1.0 - mod * mod);
    excess = std::max(excess, std::abs(traj.herglotz_integral[k].imag()) - bound);
  }
  return excess;
}

}  // namespace liber
