#ifndef SPECDIFF_LINALG_HPP_
#define SPECDIFF_LINALG_HPP_

// Dense real matrices, self-adjoint eigendecompositions and Schatten norms.
// Products, eigensolvers and SVD are delegated to Eigen.

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace specdiff {

/// Thrown when an iterative eigen/SVD solver reports non-convergence.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int info, double residual)
      : std::runtime_error(what), info_(info), residual_(residual) {}
  int info() const noexcept { return info_; }
  double residual() const noexcept { return residual_; }

 private:
  int info_;
  double residual_;
};

/// Row-major dense rectangular matrix.
class RectMatrix {
 public:
  RectMatrix() = default;
  RectMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  RectMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("RectMatrix: data size does not match shape");
  }

  static RectMatrix diagonal(std::span<const double> diag) {
    RectMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  RectMatrix transpose() const {
    RectMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  RectMatrix& operator+=(const RectMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  RectMatrix& operator-=(const RectMatrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  RectMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend RectMatrix operator+(RectMatrix a, const RectMatrix& b) { return a += b; }
  friend RectMatrix operator-(RectMatrix a, const RectMatrix& b) { return a -= b; }
  friend RectMatrix operator*(double s, RectMatrix a) { return a *= s; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_same_shape(const RectMatrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_)
      throw std::invalid_argument("RectMatrix: shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMajor> view(const RectMatrix& a) {
  return {a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}
inline Eigen::Map<RowMajor> view(RectMatrix& a) {
  return {a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols())};
}

}  // namespace detail

/// C = op(A)·op(B).
inline RectMatrix multiply(const RectMatrix& a, const RectMatrix& b, bool transpose_a = false,
                           bool transpose_b = false) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t k = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb) throw std::invalid_argument("multiply: inner dimensions differ");
  RectMatrix c(m, n);
  if (m == 0 || n == 0 || k == 0) return c;
  auto cv = detail::view(c);
  const auto av = detail::view(a);
  const auto bv = detail::view(b);
  if (transpose_a && transpose_b)
    cv.noalias() = av.transpose() * bv.transpose();
  else if (transpose_a)
    cv.noalias() = av.transpose() * bv;
  else if (transpose_b)
    cv.noalias() = av * bv.transpose();
  else
    cv.noalias() = av * bv;
  return c;
}

struct Eigendecomposition {
  std::vector<double> values;  // ascending
  RectMatrix vectors;          // column j is the eigenvector of values[j]
};

namespace detail {

// Householder tridiagonalization followed by implicit symmetric QR.
inline std::vector<double> eigenvalues_only(const RectMatrix& a) {
  std::vector<double> w(a.rows());
  if (w.empty()) return w;
  const Eigen::MatrixXd m = view(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SolverError("symmetric eigensolver did not converge", static_cast<int>(es.info()),
                      std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd::Map(w.data(), static_cast<Eigen::Index>(w.size())) = es.eigenvalues();
  return w;
}

inline Eigendecomposition full_eig(const RectMatrix& a) {
  Eigendecomposition e{std::vector<double>(a.rows()), RectMatrix(a.rows(), a.cols())};
  if (a.rows() == 0) return e;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(view(a)), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw SolverError("symmetric eigensolver did not converge", static_cast<int>(es.info()),
                      std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd::Map(e.values.data(), static_cast<Eigen::Index>(e.values.size())) = es.eigenvalues();
  view(e.vectors) = es.eigenvectors();
  return e;
}

}  // namespace detail

/// Immutable dense real-symmetric matrix. The eigendecomposition is computed
/// at most once and shared between copies.
class SelfAdjointMatrix {
 public:
  SelfAdjointMatrix() : state_(std::make_shared<State>(RectMatrix())) {}

  /// Takes `entries` as given; throws if it is not symmetric to 1e-12 relative.
  explicit SelfAdjointMatrix(RectMatrix entries)
      : state_(std::make_shared<State>(checked(std::move(entries)))) {}

  /// Symmetrizes (A + Aᵀ)/2 first. For matrices assembled in floating point.
  static SelfAdjointMatrix symmetrized(RectMatrix entries) {
    if (entries.rows() != entries.cols())
      throw std::invalid_argument("SelfAdjointMatrix: matrix is not square");
    const std::size_t n = entries.rows();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double m = 0.5 * (entries(i, j) + entries(j, i));
        entries(i, j) = m;
        entries(j, i) = m;
      }
    return SelfAdjointMatrix(std::move(entries));
  }

  static SelfAdjointMatrix diagonal(std::span<const double> diag) {
    return SelfAdjointMatrix(RectMatrix::diagonal(diag));
  }

  std::size_t dim() const noexcept { return state_->entries.rows(); }
  const RectMatrix& entries() const noexcept { return state_->entries; }
  double operator()(std::size_t i, std::size_t j) const { return state_->entries(i, j); }

  /// Full eigendecomposition, cached.
  const Eigendecomposition& eig() const {
    std::call_once(state_->eig_once, [this] {
      state_->eig = detail::full_eig(state_->entries);
      state_->values_ready = true;
    });
    return state_->eig;
  }

  /// Ascending eigenvalues. Uses the cache when present, otherwise a
  /// values-only solve (itself cached).
  const std::vector<double>& eigenvalues() const {
    std::call_once(state_->values_once, [this] {
      if (!state_->values_ready) state_->values_only = detail::eigenvalues_only(state_->entries);
    });
    return state_->values_ready ? state_->eig.values : state_->values_only;
  }

  bool has_eig_cache() const noexcept { return state_->values_ready; }

 private:
  struct State {
    explicit State(RectMatrix e) : entries(std::move(e)) {}
    RectMatrix entries;
    std::once_flag eig_once;
    std::once_flag values_once;
    Eigendecomposition eig;
    std::vector<double> values_only;
    std::atomic<bool> values_ready{false};
  };

  static RectMatrix checked(RectMatrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("SelfAdjointMatrix: matrix is not square");
    if (!m.all_finite()) throw std::invalid_argument("SelfAdjointMatrix: non-finite entry");
    const double scale = std::max(m.max_abs(), std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i + 1; j < m.cols(); ++j)
        if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
          std::ostringstream os;
          os << "SelfAdjointMatrix: entries (" << i << "," << j << ") and (" << j << "," << i
             << ") differ by " << std::abs(m(i, j) - m(j, i));
          throw std::invalid_argument(os.str());
        }
    return m;
  }

  std::shared_ptr<State> state_;
};

inline const Eigendecomposition& eig(const SelfAdjointMatrix& a) { return a.eig(); }

/// Relative reconstruction residual ‖QΛQᵀ − A‖_F / ‖A‖_F (0 for A = 0).
inline double reconstruction_residual(const SelfAdjointMatrix& a) {
  const auto& e = a.eig();
  RectMatrix scaled = e.vectors;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= e.values[j];
  RectMatrix diff = multiply(scaled, e.vectors, false, true) - a.entries();
  const double norm = a.entries().frobenius_norm();
  return norm > 0.0 ? diff.frobenius_norm() / norm : diff.frobenius_norm();
}

/// Q·diag(f(λ_i))·Qᵀ. Throws if f is not finite at some eigenvalue.
inline SelfAdjointMatrix matrix_function(const SelfAdjointMatrix& a,
                                         const std::function<double(double)>& f) {
  const auto& e = a.eig();
  const std::size_t n = a.dim();
  std::vector<double> fv(n);
  for (std::size_t j = 0; j < n; ++j) {
    fv[j] = f(e.values[j]);
    if (!std::isfinite(fv[j])) {
      std::ostringstream os;
      os.precision(17);
      os << "matrix_function: f is not finite at eigenvalue " << e.values[j];
      throw std::domain_error(os.str());
    }
  }
  RectMatrix scaled = e.vectors;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= fv[j];
  return SelfAdjointMatrix::symmetrized(multiply(scaled, e.vectors, false, true));
}

/// Singular values in descending order (divide-and-conquer bidiagonal SVD).
inline std::vector<double> singular_values(const RectMatrix& x) {
  if (!x.all_finite()) throw std::invalid_argument("singular_values: non-finite entry");
  std::vector<double> s(std::min(x.rows(), x.cols()));
  if (s.empty()) return s;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(detail::view(x)));
  if (svd.info() != Eigen::Success)
    throw SolverError("SVD did not converge", static_cast<int>(svd.info()),
                      std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd::Map(s.data(), static_cast<Eigen::Index>(s.size())) = svd.singularValues();
  return s;
}

inline constexpr double kSchattenInfinity = std::numeric_limits<double>::infinity();

/// ℓᵖ norm of a sequence of singular values; p = ∞ gives the maximum.
inline double schatten_from_singular_values(std::span<const double> s, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("schatten_norm: p must be >= 1");
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, std::abs(v));
  if (std::isinf(p) || smax == 0.0) return smax;
  // scaled to avoid overflow in s^p
  double acc = 0.0;
  for (double v : s) acc += std::pow(std::abs(v) / smax, p);
  return smax * std::pow(acc, 1.0 / p);
}

inline double schatten_norm(const RectMatrix& x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("schatten_norm: p must be >= 1");
  const auto s = singular_values(x);
  return schatten_from_singular_values(s, p);
}

/// For self-adjoint A the singular values are |λ_i|.
inline double schatten_norm(const SelfAdjointMatrix& a, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("schatten_norm: p must be >= 1");
  std::vector<double> s = a.eigenvalues();
  for (double& v : s) v = std::abs(v);
  return schatten_from_singular_values(s, p);
}

/// The block matrix [[0, Xᵀ], [X, 0]] acting on ℝ^cols ⊕ ℝ^rows.
inline SelfAdjointMatrix sho_assemble(const RectMatrix& x) {
  const std::size_t r = x.rows();
  const std::size_t c = x.cols();
  RectMatrix b(r + c, r + c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      b(c + i, j) = x(i, j);
      b(j, c + i) = x(i, j);
    }
  return SelfAdjointMatrix(std::move(b));
}

/// Σ λ_i^m over the spectrum.
inline double trace_power(std::span<const double> eigenvalues, int m) {
  if (m < 1) throw std::invalid_argument("trace_power: m must be >= 1");
  double s = 0.0;
  for (double v : eigenvalues) {
    double p = v;
    for (int k = 1; k < m; ++k) p *= v;
    s += p;
  }
  return s;
}

inline double trace_power(const SelfAdjointMatrix& a, int m) {
  return trace_power(a.eigenvalues(), m);
}

inline double trace(const RectMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

/// Spectral norm (largest singular value).
inline double operator_norm(const RectMatrix& x) { return schatten_norm(x, kSchattenInfinity); }

}  // namespace specdiff

#endif  // SPECDIFF_LINALG_HPP_
