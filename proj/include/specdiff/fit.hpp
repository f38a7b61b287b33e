#ifndef SPECDIFF_FIT_HPP_
#define SPECDIFF_FIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace specdiff {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square of y − (slope·x + intercept)
};

/// Ordinary least squares y ≈ slope·x + intercept.
inline LineFit slope_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("slope_fit: need at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  const double scale = std::max(1.0, std::abs(mx));
  if (!(sxx > 1e-24 * scale * scale * n)) throw std::invalid_argument("slope_fit: degenerate abscissas");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (f.slope * x + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

inline LineFit slope_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("slope_fit: size mismatch");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], ys[i]);
  return slope_fit(pts);
}

/// Geometric sequence start, ..., stop with `count` points (count ≥ 2).
inline std::vector<double> geometric_sequence(double start, double stop, std::size_t count) {
  if (count < 2 || !(start > 0.0) || !(stop > 0.0))
    throw std::invalid_argument("geometric_sequence: need count >= 2 and positive ends");
  std::vector<double> v(count);
  const double step = std::log(stop / start) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) v[k] = start * std::exp(step * static_cast<double>(k));
  v.front() = start;
  v.back() = stop;
  return v;
}

}  // namespace specdiff

#endif  // SPECDIFF_FIT_HPP_
