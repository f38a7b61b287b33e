#ifndef SPECDIFF_MODELS_HPP_
#define SPECDIFF_MODELS_HPP_

// Concrete operator pairs (H₀, H) with known scattering data.
//
// The rank-one model lives on L²(−L, L): H₀ is multiplication by x and
// H = H₀ + c⟨·, v⟩v. After Nyström discretization on nodes x_i with weights
// w_i, H₀ = diag(x_i) and V_ij = c·√w_i v(x_i)·√w_j v(x_j). Its boundary
// value T(λ + i0) = ∫ v(x)²/(x − λ − i0) dx gives the 1×1 scattering matrix
//
//   S(λ) = 1 − 2πi·c·v(λ)² / (1 + c·T(λ + i0)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specdiff/density.hpp"
#include "specdiff/linalg.hpp"
#include "specdiff/profiles.hpp"
#include "specdiff/quadrature.hpp"

namespace specdiff {

struct Bump {
  std::string name;
  std::function<double(double)> v;
};

inline std::vector<std::string> builtin_bump_names() {
  return {"gaussian", "gaussian_wide", "gaussian_shifted", "sech"};
}

inline Bump builtin_bump(const std::string& name) {
  if (name == "gaussian") return {name, [](double x) { return std::exp(-x * x); }};
  if (name == "gaussian_wide") return {name, [](double x) { return std::exp(-0.5 * x * x); }};
  if (name == "gaussian_shifted")
    return {name, [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)); }};
  if (name == "sech") return {name, [](double x) { return 1.0 / std::cosh(x); }};
  throw std::invalid_argument("unknown bump name: " + name);
}

enum class GridKind {
  kUniform,  // one Gauss–Legendre rule of n nodes on (−L, L)
  kGraded,   // composite Gauss–Legendre, panels log-graded toward `center`
};

struct ModelGrid {
  GridKind kind = GridKind::kGraded;
  std::size_t points_per_panel = 6;
  double inner_width = 1e-17;  // width of the innermost panel on each side
  double center = 0.0;
};

struct RankOneParams {
  double half_width = 8.0;
  std::size_t grid_size = 2400;
  std::string bump = "gaussian";
  double coupling = 0.5;
  ModelGrid grid;
};

namespace detail {

inline QuadratureGrid graded_grid(double lo, double hi, std::size_t n, const ModelGrid& g) {
  if (!(g.center > lo && g.center < hi))
    throw std::invalid_argument("graded grid: center must lie inside (-L, L)");
  const std::size_t p = g.points_per_panel;
  if (p == 0 || n < 4 * p) throw std::invalid_argument("graded grid: grid_size too small");
  const std::size_t panels_per_side = n / (2 * p);
  auto one_side = [&](double len) {
    const double inner = std::min(g.inner_width, 0.5 * len);
    std::vector<double> br{0.0};
    if (panels_per_side > 1) {
      const auto rest = log_spaced_breakpoints(inner, len, panels_per_side - 1);
      br.insert(br.end(), rest.begin(), rest.end());
    } else {
      br.push_back(len);
    }
    return composite_gauss_legendre(br, p);
  };
  const QuadratureGrid left = one_side(g.center - lo), right = one_side(hi - g.center);
  QuadratureGrid out;
  for (std::size_t i = left.size(); i-- > 0;) {
    out.nodes.push_back(g.center - left.nodes[i]);
    out.weights.push_back(left.weights[i]);
  }
  for (std::size_t i = 0; i < right.size(); ++i) {
    out.nodes.push_back(g.center + right.nodes[i]);
    out.weights.push_back(right.weights[i]);
  }
  return out;
}

}  // namespace detail

/// Resolution diagnostics attached to a discretized D_ε.
struct ResolutionGuard {
  double kappa = 10.0;            // ε must exceed kappa × local level spacing
  double precision_factor = 1e3;  // ε must exceed this × machine-ε × ‖H‖
};

class RankOneModel {
 public:
  explicit RankOneModel(RankOneParams params) : params_(std::move(params)) {
    if (!(params_.half_width > 0.0)) throw std::invalid_argument("RankOneModel: L must be positive");
    if (params_.grid_size < 2) throw std::invalid_argument("RankOneModel: grid_size too small");
    bump_ = builtin_bump(params_.bump);
    const double l = params_.half_width;
    grid_ = params_.grid.kind == GridKind::kUniform
                ? gauss_legendre(params_.grid_size, -l, l)
                : detail::graded_grid(-l, l, params_.grid_size, params_.grid);
    grid_.validate();
    const std::size_t n = grid_.size();
    u_.resize(n);
    for (std::size_t i = 0; i < n; ++i) u_[i] = std::sqrt(grid_.weights[i]) * bump_.v(grid_.nodes[i]);
    RectMatrix h = RectMatrix::diagonal(grid_.nodes);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) += params_.coupling * u_[i] * u_[j];
    h_ = SelfAdjointMatrix::symmetrized(std::move(h));
  }

  const RankOneParams& params() const noexcept { return params_; }
  double half_width() const noexcept { return params_.half_width; }
  double coupling() const noexcept { return params_.coupling; }
  std::size_t size() const noexcept { return grid_.size(); }
  const QuadratureGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& nodes() const noexcept { return grid_.nodes; }
  double v(double x) const { return bump_.v(x); }
  const SelfAdjointMatrix& h() const noexcept { return h_; }
  SelfAdjointMatrix h0() const { return SelfAdjointMatrix::diagonal(grid_.nodes); }

  /// ∫ v² over (−L, L) by the model grid and by adaptive quadrature.
  std::pair<double, double> bump_norm_check() const {
    const double grid_value = grid_.integrate([this](double x) { return sq(bump_.v(x)); });
    const double l = params_.half_width;
    const double adaptive =
        adaptive_integrate([this](double x) { return sq(bump_.v(x)); }, -l, l, 1e-14);
    return {grid_value, adaptive};
  }

  /// Largest gap between consecutive H₀ levels that touch [λ − ε, λ + ε].
  double local_spacing(double lambda, double epsilon) const {
    const auto& x = grid_.nodes;
    auto first = std::lower_bound(x.begin(), x.end(), lambda - epsilon);
    auto last = std::upper_bound(x.begin(), x.end(), lambda + epsilon);
    std::size_t i0 = static_cast<std::size_t>(first - x.begin());
    std::size_t i1 = static_cast<std::size_t>(last - x.begin());
    if (i0 > 0) --i0;
    if (i1 >= x.size()) i1 = x.size() - 1;
    double gap = 0.0;
    for (std::size_t i = i0; i < i1; ++i) gap = std::max(gap, x[i + 1] - x[i]);
    return gap;
  }

  bool guard_ok(double lambda, double epsilon, const ResolutionGuard& guard) const {
    const double h_norm = params_.half_width + std::abs(params_.coupling) * norm_u_sq();
    const double floor = guard.precision_factor * std::numeric_limits<double>::epsilon() * h_norm;
    return epsilon >= guard.kappa * local_spacing(lambda, epsilon) && epsilon >= floor;
  }

  double norm_u_sq() const {
    double s = 0.0;
    for (double ui : u_) s += ui * ui;
    return s;
  }

 private:
  static double sq(double a) { return a * a; }

  RankOneParams params_;
  Bump bump_;
  QuadratureGrid grid_;
  std::vector<double> u_;
  SelfAdjointMatrix h_;
};

/// T(λ + i0): principal value by singularity subtraction, imaginary part π v(λ)².
inline std::complex<double> t_plus(const RankOneModel& model, double lambda) {
  const double l = model.half_width();
  if (!(lambda > -l + 1e-6 && lambda < l - 1e-6))
    throw std::domain_error("t_plus: lambda must lie inside (-L, L), away from the endpoints");
  const double v2 = model.v(lambda) * model.v(lambda);
  auto f = [&](double x) {
    const double vx = model.v(x);
    return (vx * vx - v2) / (x - lambda);
  };
  const double pv = adaptive_integrate(f, -l, lambda, 1e-14) + adaptive_integrate(f, lambda, l, 1e-14) +
                    v2 * std::log((l - lambda) / (l + lambda));
  return {pv, std::numbers::pi * v2};
}

struct ScatteringPoint {
  double lambda = 0.0;
  std::complex<double> t_plus;
  std::complex<double> s;
  double a1 = 0.0;
  double xi = 0.0;

  BandSet bands() const { return BandSet({a1}); }
};

/// Thrown when 1 + c·T(λ + i0) vanishes (λ is an exceptional point).
class ExceptionalPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// S(λ), a₁ = |S − 1|/2 and ξ(λ) = π⁻¹ arg(1 + c·T(λ + i0)).
///
/// The arg branch is anchored at λ → −∞, where T → 0. Since
/// Im(1 + cT) = cπv² keeps one sign wherever v ≠ 0, the principal value of
/// arg is the continuous branch for the strictly positive built-in bumps.
inline ScatteringPoint scattering_point(const RankOneModel& model, double lambda) {
  ScatteringPoint p;
  p.lambda = lambda;
  p.t_plus = t_plus(model, lambda);
  const double c = model.coupling();
  const std::complex<double> denom = 1.0 + c * p.t_plus;
  if (std::abs(denom) < 1e-10) {
    std::ostringstream os;
    os << "scattering_point: 1 + c T(lambda + i0) vanishes at lambda = " << lambda;
    throw ExceptionalPointError(os.str());
  }
  const double v2 = model.v(lambda) * model.v(lambda);
  const std::complex<double> i(0.0, 1.0);
  p.s = 1.0 - 2.0 * std::numbers::pi * i * c * v2 / denom;
  p.a1 = std::min(1.0, 0.5 * std::abs(p.s - 1.0));
  p.xi = std::arg(denom) / std::numbers::pi;
  return p;
}

struct DEps {
  SelfAdjointMatrix matrix;
  bool guard_ok = true;
  std::string warning;
};

/// D_ε(λ) = ψ_ε(H − λ) − ψ_ε(H₀ − λ).
inline DEps build_d_eps(const RankOneModel& model, const ScaledProfile& psi, double lambda,
                        const ResolutionGuard& guard = {}) {
  DEps out;
  const std::size_t n = model.size();
  const auto& e = model.h().eig();
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = psi(e.values[j] - lambda);
  RectMatrix scaled = e.vectors;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= f[j];
  RectMatrix d = multiply(scaled, e.vectors, false, true);
  const auto& x = model.nodes();
  for (std::size_t i = 0; i < n; ++i) d(i, i) -= psi(x[i] - lambda);
  out.matrix = SelfAdjointMatrix::symmetrized(std::move(d));
  out.guard_ok = model.guard_ok(lambda, psi.epsilon(), guard);
  if (!out.guard_ok) {
    std::ostringstream os;
    os << "epsilon = " << psi.epsilon() << " is below the resolution guard (local spacing "
       << model.local_spacing(lambda, psi.epsilon()) << ")";
    out.warning = os.str();
  }
  return out;
}

/// H₀ = 0, H = diag(k^{−1/α}), k = 1..n: the spectrum of D_ε(0) = ψ(H/ε)
/// is {ψ(k^{−1/α}/ε)}. Returns how many of these lie strictly in (lo, hi).
inline std::size_t negative_control(double alpha, std::size_t n, const CutoffProfile& psi,
                                    double epsilon, double lo, double hi) {
  if (!(alpha > 0.0)) throw std::invalid_argument("negative_control: alpha must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("negative_control: epsilon must be positive");
  if (psi(0.0) != 0.0) throw std::invalid_argument("negative_control: requires psi(0) = 0");
  std::size_t count = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double y = psi(std::pow(static_cast<double>(k), -1.0 / alpha) / epsilon);
    if (y > lo && y < hi) ++count;
  }
  return count;
}

/// #{k ≤ n : k^{−1/α} > ε·R}, the lower bound for a flat-beyond-R profile.
inline std::size_t negative_control_bound(double alpha, std::size_t n, double epsilon, double r) {
  std::size_t count = 0;
  for (std::size_t k = 1; k <= n; ++k)
    if (std::pow(static_cast<double>(k), -1.0 / alpha) > epsilon * r) ++count;
  return count;
}

}  // namespace specdiff

#endif  // SPECDIFF_MODELS_HPP_
