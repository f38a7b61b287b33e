#ifndef SPECDIFF_DENSITY_HPP_
#define SPECDIFF_DENSITY_HPP_

// Limiting eigenvalue density μ of the smoothed projection difference and the
// closed forms it integrates to.
//
//   μ(y) = π⁻² Σ_n 𝟙(|y| < a_n) / (|y| √(1 − y²/a_n²)),
//
// equivalently ∫ g μ = (2π²)⁻¹ Σ_n ∫_ℝ [g(a_n/cosh x) + g(−a_n/cosh x)] dx.
// All quadrature runs in the cosh variable, where the band-edge singularity
// of μ disappears.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "specdiff/quadrature.hpp"

namespace specdiff {

inline constexpr double kDefaultBandFloor = 1e-6;

/// Positive band edges a_n ∈ (0, 1], stored in descending order.
class BandSet {
 public:
  BandSet() = default;

  /// Edges below `floor` are dropped; edges must lie in [0, 1].
  explicit BandSet(std::vector<double> edges, double floor = kDefaultBandFloor) {
    for (double a : edges) {
      if (!std::isfinite(a) || a < 0.0 || a > 1.0 + 1e-12)
        throw std::invalid_argument("BandSet: edges must lie in (0, 1]");
      if (a >= floor) edges_.push_back(std::min(a, 1.0));
    }
    std::sort(edges_.begin(), edges_.end(), std::greater<>());
  }

  const std::vector<double>& edges() const noexcept { return edges_; }
  bool empty() const noexcept { return edges_.empty(); }

  /// Union of band sets; μ is additive under this operation.
  friend BandSet operator+(const BandSet& a, const BandSet& b) {
    std::vector<double> all = a.edges_;
    all.insert(all.end(), b.edges_.begin(), b.edges_.end());
    return BandSet(std::move(all), 0.0);
  }

 private:
  std::vector<double> edges_;
};

/// Density μ at y ∈ (−1, 1) \ {0}.
inline double mu(const BandSet& bands, double y) {
  if (y == 0.0) throw std::domain_error("mu: density diverges at y = 0");
  if (!(std::abs(y) < 1.0)) throw std::domain_error("mu: |y| must be < 1");
  const double ay = std::abs(y);
  double s = 0.0;
  for (double a : bands.edges()) {
    if (ay < a) s += 1.0 / (ay * std::sqrt(1.0 - (y / a) * (y / a)));
  }
  return s / (std::numbers::pi * std::numbers::pi);
}

/// ∫_b^1 μ(y) dy = π⁻² Σ_{a_n > b} arccosh(a_n / b).
inline double band_count_slope(const BandSet& bands, double b) {
  if (!(b > 0.0)) throw std::domain_error("band_count_slope: b must be positive");
  double s = 0.0;
  for (double a : bands.edges())
    if (a > b) s += std::acosh(a / b);
  return s / (std::numbers::pi * std::numbers::pi);
}

/// ∫_ℝ (cosh x)^(−m) dx.
inline double sech_moment(int m) {
  if (m < 1) throw std::invalid_argument("sech_moment: m must be >= 1");
  const double md = static_cast<double>(m);
  // sech^m(x) ≤ 2^m e^{−m x}; beyond x_max the tail is below 1e-17.
  const double x_max = (md * std::log(2.0) + 40.0) / md;
  auto f = [m](double x) { return std::pow(1.0 / std::cosh(x), m); };
  return 2.0 * adaptive_integrate(f, 0.0, x_max, 1e-15);
}

/// Δ_m = (1 + (−1)^m)/(2π²) · Σ_n a_n^m · ∫ sech^m.
inline double delta_m(const BandSet& bands, int m) {
  if (m < 1) throw std::invalid_argument("delta_m: m must be >= 1");
  if (m % 2 == 1) return 0.0;
  double s = 0.0;
  for (double a : bands.edges()) s += std::pow(a, m);
  return s * sech_moment(m) / (std::numbers::pi * std::numbers::pi);
}

/// A test function g for the window integral. `eta` declares that g vanishes
/// on (−eta, eta); `jumps` lists points |y| where g may be discontinuous so
/// that quadrature panels can split there.
struct TestFunction {
  std::function<double(double)> g;
  double eta = 0.0;
  std::vector<double> jumps;
};

/// (2π²)⁻¹ Σ_n ∫ [g(a_n/cosh x) + g(−a_n/cosh x)] dx over |x| ≤ arccosh(a_n/η).
inline double rhs_integral(const BandSet& bands, const TestFunction& tf, double rel_tol = 1e-13) {
  if (!(tf.eta > 0.0)) throw std::invalid_argument("rhs_integral: eta must be positive");
  double total = 0.0;
  for (double a : bands.edges()) {
    if (a <= tf.eta) continue;
    const double x_max = std::acosh(a / tf.eta);
    std::vector<double> cuts{0.0, x_max};
    for (double j : tf.jumps) {
      const double aj = std::abs(j);
      if (aj > tf.eta && aj < a) cuts.push_back(std::acosh(a / aj));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto integrand = [&](double x) {
      const double y = a / std::cosh(x);
      return tf.g(y) + tf.g(-y);
    };
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      total += 2.0 * adaptive_integrate(integrand, cuts[k], cuts[k + 1], rel_tol);
  }
  return total / (2.0 * std::numbers::pi * std::numbers::pi);
}

}  // namespace specdiff

#endif  // SPECDIFF_DENSITY_HPP_
