#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "kronsensus/errors.hpp"

namespace kronsensus {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Complex = std::complex<double>;

/// Dimension caps. Configuration, not hard limits of the algorithms.
struct Limits {
  Index max_product_entries = Index{1} << 20;  // kron / block_kron results
  Index max_eigen_dim = 2048;                  // dense eigensolves
  Index max_strategy_dim = Index{1} << 12;     // dense strategy matrices
  Index max_graph_vertices = Index{1} << 20;
};

namespace tol {
// Matrix identities, scaled by max(1, ||.||_inf).
inline constexpr double kCompare = 1e-9;
// Eigenvalue multiset matching and clustering around 1.
inline constexpr double kEigenvalue = 1e-7;
// Condition (C) margin: |lambda| < 1 - kStable.
inline constexpr double kStable = 1e-9;
// Structural zero when reading a communication graph off a matrix.
inline constexpr double kZero = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Integer helpers

/// base^exponent, or SizeError when the result exceeds `cap`.
inline Index checked_pow(Index base, Index exponent, Index cap = std::numeric_limits<Index>::max()) {
  Index result = 1;
  for (Index i = 0; i < exponent; ++i) {
    if (base != 0 && result > cap / base) {
      throw SizeError(std::to_string(base) + "^" + std::to_string(exponent) + " exceeds cap " +
                      std::to_string(cap));
    }
    result *= base;
  }
  return result;
}

/// The u with base^u == value, if value is an exact power of base.
inline std::optional<int> exact_log(Index value, Index base) {
  if (value < 1 || base < 2) return std::nullopt;
  int u = 0;
  while (value % base == 0) {
    value /= base;
    ++u;
  }
  if (value != 1) return std::nullopt;
  return u;
}

/// Rotates the `width` base-`base` digits of `value` left by `shift` places
/// (most significant digit first). shift == width is the identity.
inline Index rotate_digits_left(Index value, int shift, Index base, int width) {
  if (width == 0 || shift % width == 0) return value;
  shift %= width;
  const Index low_span = checked_pow(base, width - shift);
  const Index high = value / low_span;
  const Index low = value % low_span;
  return low * checked_pow(base, shift) + high;
}

/// A base-n integer with a fixed number of digits; 0 <= value < base^width.
class DigitIndex {
 public:
  DigitIndex(Index value, Index base, int width) : value_(value), base_(base), width_(width) {
    if (base < 2) throw DomainError("DigitIndex base must be >= 2");
    if (width < 1) throw DomainError("DigitIndex width must be >= 1");
    const Index span = checked_pow(base, width);
    if (value < 0 || value >= span) {
      throw DomainError("DigitIndex value " + std::to_string(value) + " outside [0, " +
                        std::to_string(span) + ")");
    }
  }

  static DigitIndex from_digits(std::span<const Index> digits, Index base) {
    Index value = 0;
    for (Index d : digits) {
      if (d < 0 || d >= base) throw DomainError("digit out of range for base");
      value = value * base + d;
    }
    return DigitIndex(value, base, static_cast<int>(digits.size()));
  }

  Index value() const { return value_; }
  Index base() const { return base_; }
  int width() const { return width_; }

  // Most significant digit first.
  std::vector<Index> digits() const {
    std::vector<Index> out(static_cast<std::size_t>(width_));
    Index v = value_;
    for (int i = width_ - 1; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = v % base_;
      v /= base_;
    }
    return out;
  }

  friend bool operator==(const DigitIndex&, const DigitIndex&) = default;

 private:
  Index value_;
  Index base_;
  int width_;
};

/// Cyclic left rotation of the digit string by `shift` places; requires shift < width.
inline DigitIndex digit_rotate_left(const DigitIndex& p, int shift) {
  if (shift < 0 || shift >= p.width()) {
    throw DomainError("digit_rotate_left: shift " + std::to_string(shift) +
                      " must lie in [0, width=" + std::to_string(p.width()) + ")");
  }
  return DigitIndex(rotate_digits_left(p.value(), shift, p.base(), p.width()), p.base(), p.width());
}

// ---------------------------------------------------------------------------
// Norms and comparisons

template <typename Derived>
typename Derived::RealScalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Entrywise comparison at `tolerance * max(1, ||a||_inf)`.
template <typename DerivedA, typename DerivedB>
bool approx_equal(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                  double tolerance = tol::kCompare) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, static_cast<double>(inf_norm(a)));
  return static_cast<double>((a - b).cwiseAbs().maxCoeff()) <= tolerance * scale;
}

template <typename Derived>
bool is_normal(const Eigen::MatrixBase<Derived>& a, double tolerance = 1e-10) {
  if (a.rows() != a.cols()) return false;
  const auto commutator = (a.transpose() * a - a * a.transpose()).eval();
  return commutator.size() == 0 || static_cast<double>(inf_norm(commutator)) < tolerance;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// (1/dim) 1 1^T, the consensus projector E.
template <typename Scalar = double>
Matrix<Scalar> averaging_matrix(Index dim) {
  return Matrix<Scalar>::Constant(dim, dim, Scalar(1) / static_cast<Scalar>(dim));
}

// ---------------------------------------------------------------------------
// Products

/// Kronecker product: entry (i*b.rows()+p, j*b.cols()+q) = a(i,j)*b(p,q).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b,
                                       const Limits& limits = {}) {
  static_assert(std::is_same_v<typename DerivedA::Scalar, typename DerivedB::Scalar>,
                "kron operands must share a scalar type");
  const Index cap = limits.max_product_entries;
  if (a.rows() != 0 && b.rows() > cap / a.rows()) throw SizeError("kron: row count overflow");
  if (a.cols() != 0 && b.cols() > cap / a.cols()) throw SizeError("kron: column count overflow");
  const Index out_rows = a.rows() * b.rows();
  const Index out_cols = a.cols() * b.cols();
  if (out_rows != 0 && out_cols > cap / out_rows) {
    throw SizeError("kron: result " + std::to_string(out_rows) + "x" + std::to_string(out_cols) +
                    " exceeds " + std::to_string(cap) + " entries");
  }
  Matrix<typename DerivedA::Scalar> out(out_rows, out_cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Left-to-right Kronecker product of a list of matrices; the empty list gives [1].
template <typename Scalar>
Matrix<Scalar> kron_all(std::span<const Matrix<Scalar>> factors, const Limits& limits = {}) {
  Matrix<Scalar> out = Matrix<Scalar>::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f, limits);
  return out;
}

/// `factor` Kronecker-multiplied with itself `count` times.
template <typename Derived>
Matrix<typename Derived::Scalar> kron_power(const Eigen::MatrixBase<Derived>& factor, int count,
                                            const Limits& limits = {}) {
  Matrix<typename Derived::Scalar> out = Matrix<typename Derived::Scalar>::Ones(1, 1);
  for (int i = 0; i < count; ++i) out = kron(out, factor, limits);
  return out;
}

/// Block Kronecker product over base-n indices:
///   (b ⊙ c)(p, q) = (b ⊗ c)(rotl(p, t), q)
/// where c is n^t x n^t, b is n^u x n^u, and p carries u+t digits.
template <typename DerivedB, typename DerivedC>
Matrix<typename DerivedB::Scalar> block_kron(const Eigen::MatrixBase<DerivedB>& b,
                                             const Eigen::MatrixBase<DerivedC>& c, Index n,
                                             const Limits& limits = {}) {
  static_assert(std::is_same_v<typename DerivedB::Scalar, typename DerivedC::Scalar>,
                "block_kron operands must share a scalar type");
  if (b.rows() != b.cols() || c.rows() != c.cols()) {
    throw DomainError("block_kron: operands must be square");
  }
  const auto u = exact_log(b.rows(), n);
  const auto t = exact_log(c.rows(), n);
  if (!u || !t) {
    throw DomainError("block_kron: dimensions " + std::to_string(b.rows()) + " and " +
                      std::to_string(c.rows()) + " are not powers of " + std::to_string(n));
  }
  const Index dim = b.rows() * c.rows();
  if (dim != 0 && dim > limits.max_product_entries / dim) {
    throw SizeError("block_kron: result dimension " + std::to_string(dim) + " exceeds cap");
  }
  const int width = *u + *t;
  const Index cd = c.rows();
  Matrix<typename DerivedB::Scalar> out(dim, dim);
  for (Index p = 0; p < dim; ++p) {
    const Index r = rotate_digits_left(p, *t, n, width);
    const Index br = r / cd;
    const Index cr = r % cd;
    for (Index q = 0; q < dim; ++q) out(p, q) = b(br, q / cd) * c(cr, q % cd);
  }
  return out;
}

/// m^t by repeated squaring; m^0 = I.
template <typename Derived>
Matrix<typename Derived::Scalar> mat_pow(const Eigen::MatrixBase<Derived>& m, std::uint64_t t) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DomainError("mat_pow: matrix must be square");
  Matrix<Scalar> result = Matrix<Scalar>::Identity(m.rows(), m.cols());
  Matrix<Scalar> base = m;
  while (t > 0) {
    if (t & 1U) result = (result * base).eval();
    t >>= 1U;
    if (t > 0) base = (base * base).eval();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Structured spectra

/// Eigenvalues of M = (I ⊗ ... ⊗ I) ⊙ A (k digits) from the eigenvalues of A.
///
/// M is similar to (digit rotation) * diag(lambda_{leading digit}), so each
/// rotation orbit of digit strings with period L and eigenvalue product w
/// contributes the L distinct L-th roots of w.
inline std::vector<Complex> block_kron_spectrum(std::span<const Complex> seed_eigenvalues, int k,
                                                const Limits& limits = {}) {
  const Index n = static_cast<Index>(seed_eigenvalues.size());
  if (n < 1 || k < 1) throw DomainError("block_kron_spectrum: need n >= 1 and k >= 1");
  if (n == 1) return std::vector<Complex>(1, seed_eigenvalues[0]);
  const Index dim = checked_pow(n, k, limits.max_product_entries);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(dim));
  std::vector<bool> seen(static_cast<std::size_t>(dim), false);
  for (Index p = 0; p < dim; ++p) {
    if (seen[static_cast<std::size_t>(p)]) continue;
    int period = 0;
    Complex w{1.0, 0.0};
    Index q = p;
    do {
      seen[static_cast<std::size_t>(q)] = true;
      const Index leading = q / checked_pow(n, k - 1);
      w *= seed_eigenvalues[static_cast<std::size_t>(leading)];
      q = rotate_digits_left(q, 1, n, k);
      ++period;
    } while (q != p);
    if (w == Complex{0.0, 0.0}) {
      out.insert(out.end(), static_cast<std::size_t>(period), Complex{0.0, 0.0});
      continue;
    }
    const double radius = std::pow(std::abs(w), 1.0 / period);
    const double angle = std::arg(w);
    for (int m = 0; m < period; ++m) {
      out.push_back(std::polar(radius, (angle + 2.0 * std::numbers::pi * m) / period));
    }
  }
  return out;
}

}  // namespace kronsensus
