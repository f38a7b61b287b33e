#ifndef SPECDIFF_QUADRATURE_HPP_
#define SPECDIFF_QUADRATURE_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace specdiff {

/// Nodes (strictly increasing) and positive weights of a quadrature rule.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }

  void validate() const {
    if (nodes.size() != weights.size())
      throw std::invalid_argument("QuadratureGrid: node/weight count mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!(weights[i] > 0.0)) throw std::invalid_argument("QuadratureGrid: non-positive weight");
      if (i > 0 && !(nodes[i] > nodes[i - 1]))
        throw std::invalid_argument("QuadratureGrid: nodes not strictly increasing");
    }
  }
};

/// n-point Gauss–Legendre rule on [-1, 1] by Newton iteration on P_n.
inline QuadratureGrid gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureGrid g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root.
    const double k = static_cast<double>(i) + 0.75;
    const double nd = static_cast<double>(n);
    double x = std::cos(std::numbers::pi * k / (nd + 0.5)) *
               (1.0 - (nd - 1.0) / (8.0 * nd * nd * nd));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * x * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (std::size_t j = 2; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      const double p2 = ((2.0 * jd - 1.0) * x * p1 - (jd - 1.0) * p0) / jd;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    } else {
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[n - 1 - i] = x;
    g.nodes[i] = -x;
    g.weights[n - 1 - i] = w;
    g.weights[i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

/// n-point Gauss–Legendre on [a, b].
inline QuadratureGrid gauss_legendre(std::size_t n, double a, double b) {
  if (!(b > a)) throw std::invalid_argument("gauss_legendre: empty interval");
  QuadratureGrid g = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes[i] = mid + half * g.nodes[i];
    g.weights[i] *= half;
  }
  return g;
}

/// Composite Gauss–Legendre with `points` nodes on each panel [b_k, b_{k+1}].
inline QuadratureGrid composite_gauss_legendre(const std::vector<double>& breakpoints,
                                               std::size_t points) {
  if (breakpoints.size() < 2) throw std::invalid_argument("composite rule needs >= 2 breakpoints");
  const QuadratureGrid ref = gauss_legendre(points);
  QuadratureGrid g;
  g.nodes.reserve((breakpoints.size() - 1) * points);
  g.weights.reserve((breakpoints.size() - 1) * points);
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k], b = breakpoints[k + 1];
    if (!(b > a)) throw std::invalid_argument("composite rule: breakpoints must increase");
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < points; ++i) {
      g.nodes.push_back(mid + half * ref.nodes[i]);
      g.weights.push_back(half * ref.weights[i]);
    }
  }
  return g;
}

/// `panels + 1` log-spaced breakpoints lo, lo·r, ..., hi with r = (hi/lo)^(1/panels).
inline std::vector<double> log_spaced_breakpoints(double lo, double hi, std::size_t panels) {
  if (!(lo > 0.0) || !(hi > lo) || panels == 0)
    throw std::invalid_argument("log_spaced_breakpoints: need 0 < lo < hi and panels > 0");
  std::vector<double> br(panels + 1);
  const double step = std::log(hi / lo) / static_cast<double>(panels);
  for (std::size_t k = 0; k <= panels; ++k) br[k] = lo * std::exp(step * static_cast<double>(k));
  br.front() = lo;
  br.back() = hi;
  return br;
}

/// Adaptive 15-point Gauss–Kronrod integral of f over [a, b]; either end may
/// be infinite. `rel_tol` is relative to the L1 norm of the integrand.
template <class F>
double adaptive_integrate(F&& f, double a, double b, double rel_tol = 1e-14,
                          unsigned max_depth = 15, double* error = nullptr) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth,
                                                                       rel_tol, error);
}

}  // namespace specdiff

#endif  // SPECDIFF_QUADRATURE_HPP_
