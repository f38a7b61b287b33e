#ifndef SPECDIFF_HANKEL_HPP_
#define SPECDIFF_HANKEL_HPP_

// The model Hankel operator K_ε on L²(ℝ₊) with kernel k_ε(t + s),
//
//   k_ε(t) = (e^{−εt} − e^{−t}) / (π t),
//
// its Nyström discretization, the Laplace-transform factorization
// K_ε = π⁻¹ (𝟙_(ε,1) 𝓛)* (𝟙_(ε,1) 𝓛), exact trace oracles, and the Fourier
// route from a scalar symbol to a Hankel kernel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specdiff/density.hpp"
#include "specdiff/fit.hpp"
#include "specdiff/linalg.hpp"
#include "specdiff/profiles.hpp"
#include "specdiff/quadrature.hpp"

namespace specdiff {

struct HankelKernel {
  std::function<double(double)> k;  // defined on (0, ∞)
  std::string decay_note;

  double operator()(double t) const { return k(t); }
};

inline HankelKernel k_eps_kernel(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("k_eps_kernel: epsilon must lie in (0, 1)");
  HankelKernel kern;
  kern.k = [epsilon](double t) {
    if (t < 1e-12) return (1.0 - epsilon) / std::numbers::pi;
    // e^{−εt} − e^{−t} = e^{−t}·expm1((1 − ε)t) avoids cancellation for small t;
    // for large t expm1 overflows and the plain difference is accurate anyway
    if (t < 1.0) return std::exp(-t) * std::expm1((1.0 - epsilon) * t) / (std::numbers::pi * t);
    return (std::exp(-epsilon * t) - std::exp(-t)) / (std::numbers::pi * t);
  };
  kern.decay_note = "e^{-eps t}/(pi t) as t -> inf; bounded by (1-eps)/pi near 0";
  return kern;
}

struct HankelGridOptions {
  std::size_t points_per_panel = 12;
  double panel_ratio = 2.0;
  double lower_factor = 1e-6;  // first breakpoint at lower_factor·ε
  double upper_factor = 50.0;  // last breakpoint at upper_factor/ε
};

/// Composite Gauss–Legendre on [0, t₀] ∪ log-spaced panels up to 50/ε.
inline QuadratureGrid default_hankel_grid(double epsilon, const HankelGridOptions& opt = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("default_hankel_grid: epsilon must lie in (0, 1)");
  const double lo = opt.lower_factor * epsilon;
  const double hi = opt.upper_factor / epsilon;
  const auto panels =
      static_cast<std::size_t>(std::ceil(std::log(hi / lo) / std::log(opt.panel_ratio)));
  std::vector<double> br = log_spaced_breakpoints(lo, hi, panels);
  br.insert(br.begin(), 0.0);
  return composite_gauss_legendre(br, opt.points_per_panel);
}

/// M_ij = √w_i · k(t_i + t_j) · √w_j.
inline SelfAdjointMatrix discretize_hankel(const HankelKernel& kern, const QuadratureGrid& grid) {
  grid.validate();
  const std::size_t n = grid.size();
  std::vector<double> sw(n);
  for (std::size_t i = 0; i < n; ++i) sw[i] = std::sqrt(grid.weights[i]);
  RectMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = kern(grid.nodes[i] + grid.nodes[j]);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "discretize_hankel: kernel not finite at nodes (" << i << "," << j << ")";
        throw std::domain_error(os.str());
      }
      m(i, j) = m(j, i) = sw[i] * v * sw[j];
    }
  return SelfAdjointMatrix(std::move(m));
}

/// Quadrature on (ε, 1) graded toward ε, fine enough for e^{−s x} with
/// s up to 2·t_max of the companion t-grid.
inline QuadratureGrid default_laplace_x_grid(double epsilon, std::size_t points_per_panel = 12,
                                             double panel_ratio = 2.0) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("default_laplace_x_grid: epsilon must lie in (0, 1)");
  const double span = 1.0 - epsilon;
  const double first = std::min(1e-4 * epsilon, 0.5 * span);
  const auto panels =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(span / first) /
                                                                   std::log(panel_ratio))));
  std::vector<double> br = log_spaced_breakpoints(first, span, panels);
  br.insert(br.begin(), 0.0);
  for (double& b : br) b += epsilon;
  br.back() = 1.0;
  return composite_gauss_legendre(br, points_per_panel);
}

/// L_{ij} = √w_{x,i} · e^{−t_j x_i} · √w_{t,j}; π⁻¹ LᵀL is the discretized K_ε.
inline RectMatrix laplace_section(double epsilon, const QuadratureGrid& grid_t,
                                  const QuadratureGrid& grid_x) {
  grid_t.validate();
  grid_x.validate();
  for (double x : grid_x.nodes)
    if (!(x > epsilon && x < 1.0))
      throw std::invalid_argument("laplace_section: x-node outside (epsilon, 1)");
  RectMatrix l(grid_x.size(), grid_t.size());
  for (std::size_t i = 0; i < grid_x.size(); ++i) {
    const double swx = std::sqrt(grid_x.weights[i]);
    for (std::size_t j = 0; j < grid_t.size(); ++j)
      l(i, j) = swx * std::exp(-grid_t.nodes[j] * grid_x.nodes[i]) * std::sqrt(grid_t.weights[j]);
  }
  return l;
}

/// Tr K_ε = log(1/ε)/(2π); Tr K_ε² = (2 log(1+ε) − log(4ε))/π².
inline double k_eps_trace_exact(double epsilon, int m) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("k_eps_trace_exact: epsilon must lie in (0, 1)");
  using std::numbers::pi;
  if (m == 1) return std::log(1.0 / epsilon) / (2.0 * pi);
  if (m == 2) return (2.0 * std::log1p(epsilon) - std::log(4.0 * epsilon)) / (pi * pi);
  throw std::invalid_argument("k_eps_trace_exact: only m = 1, 2 are available in closed form");
}

/// A real odd symbol Ω with its derivative. `decay_order` declares
/// |Ω(x)| = O(|x|^{−decay_order}) at infinity.
struct Symbol {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double decay_order = 0.0;
};

/// Ω = ζ_{ε₁} − ζ_{ε₂}; with ε₂ = 1 this is ζ_ε − ζ.
inline Symbol zeta_difference_symbol(double eps1, double eps2 = 1.0) {
  Symbol s;
  s.value = [eps1, eps2](double x) { return zeta(x / eps1) - zeta(x / eps2); };
  s.derivative = [eps1, eps2](double x) {
    return zeta_derivative(x / eps1) / eps1 - zeta_derivative(x / eps2) / eps2;
  };
  s.decay_order = 1.0;
  return s;
}

struct SymbolKernelValues {
  std::vector<double> kernel;               // real part of k(t)
  std::vector<double> imaginary_residual;   // |Im k(t)|
};

namespace detail {

// ∫_0^∞ f(x)·trig(xt) dx as a sum over half-periods, accelerated by repeated
// averaging of the last partial sums (the tail alternates in sign).
template <class F>
double half_line_oscillatory(F&& f, double t, bool use_cos) {
  const double period = std::numbers::pi / t;
  const std::size_t keep = 12;
  std::vector<double> partial;
  double sum = 0.0;
  double term_scale = 0.0;
  auto integrand = [&](double x) { return f(x) * (use_cos ? std::cos(x * t) : std::sin(x * t)); };
  for (std::size_t k = 0; k < 2'000'000; ++k) {
    const double a = period * static_cast<double>(k);
    const double term = adaptive_integrate(integrand, a, a + period, 1e-14);
    sum += term;
    partial.push_back(sum);
    term_scale = std::max(term_scale, std::abs(term));
    if (k >= 2 * keep && std::abs(term) < 1e-7 * std::max(term_scale, 1e-300)) break;
    if (term_scale == 0.0 && k >= 2 * keep) break;
  }
  const std::size_t m = std::min(keep, partial.size());
  std::vector<double> s(partial.end() - static_cast<std::ptrdiff_t>(m), partial.end());
  for (std::size_t level = 1; level < m; ++level)
    for (std::size_t i = 0; i + level < m; ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
  return s[0];
}

}  // namespace detail

/// k(t) = −(i/2π) ∫ Ω(x) e^{−ixt} dx, evaluated after one integration by parts
/// as −(2πt)⁻¹ ∫ Ω'(x) e^{−ixt} dx. Throws if |Im k| ≥ 1e-8 at any t.
inline SymbolKernelValues kernel_from_symbol(const Symbol& omega, std::span<const double> t_values,
                                             double imaginary_limit = 1e-8) {
  if (!(omega.decay_order >= 1.0))
    throw std::invalid_argument("kernel_from_symbol: symbol must be declared O(1/x) or faster");
  if (!omega.derivative) throw std::invalid_argument("kernel_from_symbol: derivative required");
  SymbolKernelValues out;
  for (double t : t_values) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_from_symbol: t must be positive");
    auto even = [&](double x) { return omega.derivative(x) + omega.derivative(-x); };
    auto odd = [&](double x) { return omega.derivative(x) - omega.derivative(-x); };
    const double c = detail::half_line_oscillatory(even, t, true);
    const double s = detail::half_line_oscillatory(odd, t, false);
    const double re = -c / (2.0 * std::numbers::pi * t);
    const double im = s / (2.0 * std::numbers::pi * t);
    if (!(std::abs(im) < imaginary_limit)) {
      std::ostringstream os;
      os << "kernel_from_symbol: imaginary residual " << std::abs(im) << " at t = " << t
         << " (symbol not odd?)";
      throw std::domain_error(os.str());
    }
    out.kernel.push_back(re);
    out.imaginary_residual.push_back(std::abs(im));
  }
  return out;
}

struct HsBox {
  double lo = -1.0;
  double hi = 1.0;
};

/// ∫∫_box |(ψ_ε(x) − ψ_ε(y))/(x − y)|² dx dy on a tensor grid graded toward 0;
/// the diagonal uses ψ_ε'.
inline double hs_log_check(const CutoffProfile& psi, double epsilon, HsBox box = {},
                           std::size_t points_per_panel = 20, double panel_ratio = 1.5) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("hs_log_check: epsilon must lie in (0, 1]");
  if (!(box.lo < 0.0 && box.hi > 0.0)) throw std::invalid_argument("hs_log_check: box must contain 0");
  const ScaledProfile p = scale(psi, epsilon);
  auto side = [&](double len) {
    const double first = std::min(1e-3 * epsilon, 0.5 * len);
    const auto panels = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::log(len / first) / std::log(panel_ratio))));
    std::vector<double> br = log_spaced_breakpoints(first, len, panels);
    br.insert(br.begin(), 0.0);
    return composite_gauss_legendre(br, points_per_panel);
  };
  const QuadratureGrid neg = side(-box.lo), pos = side(box.hi);
  std::vector<double> x, w;
  for (std::size_t i = neg.size(); i-- > 0;) {
    x.push_back(-neg.nodes[i]);
    w.push_back(neg.weights[i]);
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    x.push_back(pos.nodes[i]);
    w.push_back(pos.weights[i]);
  }
  const std::size_t n = x.size();
  std::vector<double> f(n), df(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = p(x[i]);
    df[i] = p.derivative(x[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = w[i] * df[i] * df[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double q = (f[i] - f[j]) / (x[i] - x[j]);
      row += w[j] * q * q;
    }
    total += w[i] * row;
  }
  return total;
}

struct TraceSlope {
  int m = 0;
  double fitted = 0.0;
  double predicted = 0.0;  // (2π²)⁻¹ ∫ sech^m
  double residual = 0.0;
};

struct TraceSlopeReport {
  std::vector<double> epsilons;
  std::vector<std::vector<double>> traces;  // traces[k][i] = Tr K_{ε_i}^{m_k}
  std::vector<TraceSlope> slopes;
  double max_m1_deviation = 0.0;  // relative, against the exact Tr K_ε
  bool resolution_ok = true;
};

/// Σ λ^m over the eigenvalues of the discretized K_ε for each ε, and the
/// least-squares slope of Tr K_ε^m against |log ε|.
inline TraceSlopeReport k_eps_trace_slopes(std::span<const int> m_list,
                                           std::span<const double> eps_grid,
                                           const HankelGridOptions& opt = {}) {
  if (eps_grid.size() < 5) throw std::invalid_argument("k_eps_trace_slopes: need >= 5 epsilons");
  for (double e : eps_grid)
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("k_eps_trace_slopes: epsilon outside (0,1)");
  TraceSlopeReport rep;
  rep.epsilons.assign(eps_grid.begin(), eps_grid.end());
  rep.traces.assign(m_list.size(), std::vector<double>(eps_grid.size()));
  std::vector<double> x(eps_grid.size());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double e = eps_grid[i];
    x[i] = std::log(1.0 / e);
    const SelfAdjointMatrix k = discretize_hankel(k_eps_kernel(e), default_hankel_grid(e, opt));
    const auto& ev = k.eigenvalues();
    for (std::size_t q = 0; q < m_list.size(); ++q) rep.traces[q][i] = trace_power(ev, m_list[q]);
    const double dev =
        std::abs(trace_power(ev, 1) - k_eps_trace_exact(e, 1)) / k_eps_trace_exact(e, 1);
    rep.max_m1_deviation = std::max(rep.max_m1_deviation, dev);
  }
  rep.resolution_ok = rep.max_m1_deviation <= 1e-4;
  for (std::size_t q = 0; q < m_list.size(); ++q) {
    const LineFit f = slope_fit(x, rep.traces[q]);
    rep.slopes.push_back({m_list[q], f.slope,
                          sech_moment(m_list[q]) / (2.0 * std::numbers::pi * std::numbers::pi), f.residual});
  }
  return rep;
}

}  // namespace specdiff

#endif  // SPECDIFF_HANKEL_HPP_
