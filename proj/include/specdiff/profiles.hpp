#ifndef SPECDIFF_PROFILES_HPP_
#define SPECDIFF_PROFILES_HPP_

// Cutoff profiles ψ with ψ(x) → ±1/2 as x → ∓∞, their ε-scalings, and the
// arctangent model symbol ζ.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specdiff/quadrature.hpp"

namespace specdiff {

enum class ProfileKind {
  kSoft,         // limits ±1/2 approached asymptotically
  kCompactFlat,  // exactly ±1/2 outside [-R, R]
};

struct CutoffProfile {
  std::string name;
  ProfileKind kind = ProfileKind::kSoft;
  double flat_radius = 0.0;  // only meaningful for kCompactFlat
  double sup_norm_bound = 0.5;
  std::function<double(double)> evaluate;
  std::function<double(double)> derivative;

  double operator()(double x) const { return evaluate(x); }
};

/// ψ_ε(x) = ψ(x/ε).
class ScaledProfile {
 public:
  ScaledProfile(CutoffProfile base, double epsilon) : base_(std::move(base)), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("scale: epsilon must be positive");
  }

  double operator()(double x) const { return base_.evaluate(x / epsilon_); }
  double derivative(double x) const { return base_.derivative(x / epsilon_) / epsilon_; }
  double epsilon() const noexcept { return epsilon_; }
  const CutoffProfile& base() const noexcept { return base_; }

 private:
  CutoffProfile base_;
  double epsilon_;
};

inline ScaledProfile scale(const CutoffProfile& p, double epsilon) { return {p, epsilon}; }

/// ζ(x) = −(2/π)·arctan(x).
inline double zeta(double x) { return -2.0 / std::numbers::pi * std::atan(x); }
inline double zeta_eps(double x, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("zeta_eps: epsilon must be positive");
  return zeta(x / epsilon);
}
inline double zeta_derivative(double x) { return -2.0 / std::numbers::pi / (1.0 + x * x); }

namespace detail {

inline double standard_bump(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

// The mollified step is built from ∫_0^x bump on a fixed 64-point rule, so it
// is exactly odd and exactly ∓1/2 beyond |x| ≥ 1.
struct MollifierTable {
  QuadratureGrid unit = gauss_legendre(64, 0.0, 1.0);
  double total = 2.0 * unit.integrate(standard_bump);  // ∫_{-1}^{1} bump
};

inline const MollifierTable& mollifier_table() {
  static const MollifierTable table;
  return table;
}

inline double mollified_step(double x) {
  if (x <= -1.0) return 0.5;
  if (x >= 1.0) return -0.5;
  if (x == 0.0) return 0.0;
  const auto& t = mollifier_table();
  const double a = std::abs(x);
  double partial = 0.0;
  for (std::size_t i = 0; i < t.unit.size(); ++i)
    partial += t.unit.weights[i] * standard_bump(a * t.unit.nodes[i]);
  partial *= a;
  return x > 0.0 ? -partial / t.total : partial / t.total;
}

}  // namespace detail

inline constexpr double kAsymmetricShift = 0.7;

inline std::vector<std::string> builtin_profile_names() {
  return {"ARCTAN_HALF", "TANH_HALF", "MOLLIFIED_STEP", "SHIFTED_ARCTAN"};
}

/// Named profiles. SHIFTED_ARCTAN = −(1/π)·arctan(x − 0.7) is the one
/// deliberately non-odd member, used for universality checks.
inline CutoffProfile builtin_profile(std::string_view name) {
  using std::numbers::pi;
  CutoffProfile p;
  p.name = std::string(name);
  if (name == "ARCTAN_HALF") {
    p.evaluate = [](double x) { return -std::atan(x) / pi; };
    p.derivative = [](double x) { return -1.0 / (pi * (1.0 + x * x)); };
  } else if (name == "TANH_HALF") {
    p.evaluate = [](double x) { return -0.5 * std::tanh(x); };
    p.derivative = [](double x) {
      if (std::abs(x) > 350.0) return 0.0;
      const double c = std::cosh(x);
      return -0.5 / (c * c);
    };
  } else if (name == "MOLLIFIED_STEP") {
    p.kind = ProfileKind::kCompactFlat;
    p.flat_radius = 1.0;
    p.evaluate = detail::mollified_step;
    p.derivative = [](double x) {
      return -detail::standard_bump(x) / detail::mollifier_table().total;
    };
  } else if (name == "SHIFTED_ARCTAN") {
    p.evaluate = [](double x) { return -std::atan(x - kAsymmetricShift) / pi; };
    p.derivative = [](double x) {
      const double y = x - kAsymmetricShift;
      return -1.0 / (pi * (1.0 + y * y));
    };
  } else {
    throw std::invalid_argument("unknown profile name: " + std::string(name));
  }
  return p;
}

}  // namespace specdiff

#endif  // SPECDIFF_PROFILES_HPP_
