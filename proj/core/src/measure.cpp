#include "liber/measure.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace liber {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMassTol = 1e-9;
constexpr double kSymTol = 1e-9;

bool same_angle(double x, double y) {
  double d = std::remainder(x - y, 2.0 * kPi);
  return std::abs(d) < 1e-12;
}
}  // namespace

CircleMeasure::CircleMeasure(std::vector<CircleAtom> atoms, std::vector<double> density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {}

CircleMeasure CircleMeasure::dirac(double theta) {
  return CircleMeasure({{theta, 1.0}}, {});
}

CircleMeasure CircleMeasure::haar(int n) {
  return CircleMeasure({}, std::vector<double>(n, 1.0 / (2.0 * kPi)));
}

CircleMeasure CircleMeasure::symmetric_pair(double theta0) {
  return CircleMeasure({{theta0, 0.5}, {-theta0, 0.5}}, {});
}

double CircleMeasure::grid_angle(int j) const {
  const int n = grid_size();
  return -kPi + 2.0 * kPi * (j + 1) / n;
}

double CircleMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.mass;
  if (!density_.empty()) {
    double s = 0.0;
    for (double v : density_) s += v;
    m += s * 2.0 * kPi / density_.size();  // periodic trapezoid
  }
  return m;
}

std::vector<std::string> CircleMeasure::validate() const {
  std::vector<std::string> out;
  for (const auto& a : atoms_) {
    if (a.mass < 0.0) out.push_back("atom mass < 0");
    if (a.mass > 1.0 + kMassTol) out.push_back("atom mass > 1");
    if (a.theta <= -kPi - 1e-12 || a.theta > kPi + 1e-12)
      out.push_back("atom angle outside (-pi, pi]");
  }
  for (double v : density_)
    if (v < 0.0) {
      out.push_back("density sample < 0");
      break;
    }
  if (std::abs(total_mass() - 1.0) > kMassTol) out.push_back("total mass != 1");
  // Conjugation symmetry of atoms: every atom away from {0, pi} needs a
  // mirror of equal mass.
  for (const auto& a : atoms_) {
    if (same_angle(a.theta, 0.0) || same_angle(a.theta, kPi)) continue;
    bool found = false;
    for (const auto& b : atoms_)
      if (same_angle(b.theta, -a.theta) && std::abs(b.mass - a.mass) < kMassTol) {
        found = true;
        break;
      }
    if (!found) {
      out.push_back("atoms not conjugation-symmetric");
      break;
    }
  }
  // Density symmetry: node at theta maps to the node at -theta.
  const int n = grid_size();
  for (int j = 0; j < n; ++j) {
    int k = ((n - 2 - j) % n + n) % n;  // grid_angle(k) == -grid_angle(j) mod 2pi
    if (std::abs(density_[j] - density_[k]) > kSymTol) {
      out.push_back("density not conjugation-symmetric");
      break;
    }
  }
  return out;
}

Complex CircleMeasure::herglotz(Complex z) const {
  if (std::abs(z) >= 1.0) throw DomainError("herglotz: |z| must be < 1");
  Complex sum = 0.0;
  for (const auto& a : atoms_) {
    const Complex xi = std::polar(1.0, a.theta);
    sum += a.mass * (xi + z) / (xi - z);
  }
  const int n = grid_size();
  if (n > 0) {
    Complex q = 0.0;
    for (int j = 0; j < n; ++j) {
      const Complex xi = std::polar(1.0, grid_angle(j));
      q += density_[j] * (xi + z) / (xi - z);
    }
    sum += q * 2.0 * kPi / static_cast<double>(n);
  }
  return sum;
}

Complex CircleMeasure::herglotz_deriv(Complex z) const {
  if (std::abs(z) >= 1.0) throw DomainError("herglotz_deriv: |z| must be < 1");
  Complex sum = 0.0;
  for (const auto& a : atoms_) {
    const Complex xi = std::polar(1.0, a.theta);
    const Complex d = xi - z;
    sum += a.mass * 2.0 * xi / (d * d);
  }
  const int n = grid_size();
  if (n > 0) {
    Complex q = 0.0;
    for (int j = 0; j < n; ++j) {
      const Complex xi = std::polar(1.0, grid_angle(j));
      const Complex d = xi - z;
      q += density_[j] * 2.0 * xi / (d * d);
    }
    sum += q * 2.0 * kPi / static_cast<double>(n);
  }
  return sum;
}

Complex CircleMeasure::first_moment() const {
  Complex sum = 0.0;
  for (const auto& a : atoms_) sum += a.mass * std::polar(1.0, a.theta);
  const int n = grid_size();
  if (n > 0) {
    Complex q = 0.0;
    for (int j = 0; j < n; ++j) q += density_[j] * std::polar(1.0, grid_angle(j));
    sum += q * 2.0 * kPi / static_cast<double>(n);
  }
  return sum;
}

CircleMeasure CircleMeasure::from_json_text(const std::string& text, double* alpha,
                                            double* beta) {
  const auto j = nlohmann::json::parse(text);
  std::vector<CircleAtom> atoms;
  if (j.contains("atoms"))
    for (const auto& a : j.at("atoms"))
      atoms.push_back({a.at("theta").get<double>(), a.at("mass").get<double>()});
  std::vector<double> density;
  if (j.contains("density")) {
    const auto& d = j.at("density");
    density = d.at("values").get<std::vector<double>>();
    if (d.contains("n") && d.at("n").get<int>() != static_cast<int>(density.size()))
      throw std::invalid_argument("measure JSON: density.n != values.size()");
  }
  if (alpha && j.contains("alpha")) *alpha = j.at("alpha").get<double>();
  if (beta && j.contains("beta")) *beta = j.at("beta").get<double>();
  return CircleMeasure(std::move(atoms), std::move(density));
}

CircleMeasure CircleMeasure::from_json_file(const std::string& path, double* alpha,
                                            double* beta) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open measure file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), alpha, beta);
}

std::string CircleMeasure::to_json_text(const TraceParams* params) const {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : atoms_) j["atoms"].push_back({{"theta", a.theta}, {"mass", a.mass}});
  if (!density_.empty())
    j["density"] = {{"n", grid_size()}, {"values", density_}};
  if (params) {
    j["alpha"] = params->alpha;
    j["beta"] = params->beta;
  }
  return j.dump(2);
}

namespace {

InitialData measure_backed(std::string name, CircleMeasure m, TraceParams p) {
  auto violations = m.validate();
  if (!violations.empty()) {
    std::string what = "invalid measure:";
    for (const auto& v : violations) what += " [" + v + "]";
    throw std::invalid_argument(what);
  }
  InitialData init;
  init.name = std::move(name);
  init.params = p;
  auto shared = std::make_shared<CircleMeasure>(std::move(m));
  init.herglotz0 = [shared](Complex z) { return shared->herglotz(z); };
  init.herglotz0_deriv = [shared](Complex z) { return shared->herglotz_deriv(z); };
  init.measure0 = *shared;
  return init;
}

}  // namespace

InitialData preset_equal(double alpha) {
  TraceParams p(alpha, alpha);
  InitialData init;
  init.name = "equal";
  init.params = p;
  init.herglotz0 = [](Complex z) {
    if (std::abs(z) >= 1.0) throw DomainError("herglotz0: |z| must be < 1");
    return (1.0 + z) / (1.0 - z);
  };
  init.herglotz0_deriv = [](Complex z) {
    const Complex d = 1.0 - z;
    return 2.0 / (d * d);
  };
  init.measure0 = CircleMeasure::dirac(0.0);
  return init;
}

InitialData preset_free(double alpha, double beta) {
  TraceParams p(alpha, beta);
  InitialData init;
  init.name = "free";
  init.params = p;
  init.herglotz0 = [p](Complex z) { return h_infinity(z, p); };
  // 2 H H' = 2 Phi Phi', so H' = Phi Phi' / H (H has no zeros in the disc).
  init.herglotz0_deriv = [p](Complex z) {
    return phi_weight(z, p) * phi_weight_deriv(z, p) / h_infinity(z, p);
  };
  return init;
}

InitialData preset_custom(CircleMeasure m, double alpha, double beta, std::string name) {
  return measure_backed(std::move(name), std::move(m), TraceParams(alpha, beta));
}

InitialData preset_haar() {
  return measure_backed("haar", CircleMeasure::haar(), TraceParams(0.0, 0.0));
}

InitialData preset_two_atom(double theta0) {
  return measure_backed("two-atom", CircleMeasure::symmetric_pair(theta0),
                        TraceParams(0.0, 0.0));
}

InitialData make_preset(const std::string& name, double alpha, double beta) {
  if (name == "equal") {
    if (alpha != beta)
      throw std::invalid_argument("preset equal requires alpha == beta");
    return preset_equal(alpha);
  }
  if (name == "free") return preset_free(alpha, beta);
  if (name == "haar") {
    if (alpha != 0.0 || beta != 0.0)
      throw std::invalid_argument("preset haar requires alpha = beta = 0");
    return preset_haar();
  }
  if (name == "two-atom") {
    if (alpha != 0.0 || beta != 0.0)
      throw std::invalid_argument("preset two-atom requires alpha = beta = 0");
    return preset_two_atom(2.0 * std::numbers::pi / 3.0);
  }
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace liber
