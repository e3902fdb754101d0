#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kronsensus/errors.hpp"
#include "kronsensus/matlin.hpp"

namespace kronsensus {

template <typename Scalar>
struct Spectrum {
  std::vector<std::complex<Scalar>> eigenvalues;
  // Largest backward residual over the reported eigenvalues (see eigenvalues()).
  Scalar residual = 0;

  std::size_t size() const { return eigenvalues.size(); }
};

struct EigenOptions {
  int iterations_per_eigenvalue = 100;
  // Above this dimension the residual is the trace mismatch |sum(lambda) - tr(m)|.
  Index residual_dim_cap = 512;
};

namespace detail {

// Radix-2 diagonal similarity scaling so that row and column norms are comparable.
template <typename Scalar>
void balance(Matrix<Scalar>& a) {
  constexpr Scalar kRadix = 2;
  constexpr Scalar kRadixSq = kRadix * kRadix;
  const Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      Scalar c = 0;
      Scalar r = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0 || r == 0) continue;
      Scalar g = r / kRadix;
      Scalar f = 1;
      const Scalar s = c + r;
      while (c < g) {
        f *= kRadix;
        c *= kRadixSq;
      }
      g = r * kRadix;
      while (c > g) {
        f /= kRadix;
        c /= kRadixSq;
      }
      if ((c + r) / f < Scalar(0.95) * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

template <typename Scalar>
Scalar sign_of(Scalar magnitude, Scalar sign) {
  return sign >= 0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
// The matrix is destroyed. Throws NumericError when an eigenvalue fails to
// deflate within the iteration budget.
template <typename Scalar>
std::vector<std::complex<Scalar>> hessenberg_qr(Matrix<Scalar> a, int budget) {
  const Index n = a.rows();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  std::vector<Scalar> wr(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> wi(static_cast<std::size_t>(n), 0);
  auto re = [&](Index i) -> Scalar& { return wr[static_cast<std::size_t>(i)]; };
  auto im = [&](Index i) -> Scalar& { return wi[static_cast<std::size_t>(i)]; };

  Scalar anorm = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }

  Index nn = n - 1;
  Scalar shift_total = 0;
  Scalar p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 0) {
    int its = 0;
    Index l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        re(nn) = x + shift_total;
        im(nn) = 0;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = Scalar(0.5) * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += shift_total;
          if (q >= 0) {
            z = p + sign_of(z, p);
            re(nn - 1) = re(nn) = x + z;
            if (z != 0) re(nn) = x - w / z;
            im(nn - 1) = im(nn) = 0;
          } else {
            re(nn - 1) = re(nn) = x + p;
            im(nn) = z;
            im(nn - 1) = -z;
          }
          nn -= 2;
        } else {
          if (its >= budget) {
            std::vector<std::complex<double>> partial;
            for (Index i = nn + 1; i < n; ++i) {
              partial.emplace_back(static_cast<double>(re(i)), static_cast<double>(im(i)));
            }
            throw NumericError("eigenvalues: QR iteration did not converge within " +
                                   std::to_string(budget) + " iterations (" +
                                   std::to_string(partial.size()) + " of " + std::to_string(n) +
                                   " eigenvalues found)",
                               std::move(partial));
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            shift_total += x;
            for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = Scalar(0.75) * s;
            w = Scalar(-0.4375) * s * s;
          }
          ++its;
          Index m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const Scalar u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const Scalar v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (Index i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0;
            if (i != m + 2) a(i, i - 3) = 0;
          }
          for (Index k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (Index j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const Index mmin = nn < k + 3 ? nn : k + 3;
            for (Index i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<std::complex<Scalar>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.emplace_back(re(i), im(i));
  return out;
}

// One step of inverse iteration on (h - lambda I) with h upper Hessenberg;
// returns ||(h - lambda I) x|| / ||x||. O(n^2).
template <typename Scalar>
Scalar hessenberg_residual(const Matrix<Scalar>& h, std::complex<Scalar> lambda) {
  using C = std::complex<Scalar>;
  const Index n = h.rows();
  Matrix<C> u = h.template cast<C>();
  for (Index i = 0; i < n; ++i) u(i, i) -= lambda;
  const Matrix<C> shifted = u;
  Vector<C> rhs = Vector<C>::Ones(n);
  const Scalar floor =
      std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(Scalar(1), inf_norm(h));
  // Gaussian elimination with adjacent-row partial pivoting (Hessenberg structure).
  for (Index k = 0; k + 1 < n; ++k) {
    if (std::abs(u(k + 1, k)) > std::abs(u(k, k))) {
      u.row(k).swap(u.row(k + 1));
      std::swap(rhs(k), rhs(k + 1));
    }
    if (std::abs(u(k, k)) < floor) u(k, k) = floor;
    const C factor = u(k + 1, k) / u(k, k);
    u.row(k + 1).tail(n - k) -= factor * u.row(k).tail(n - k);
    rhs(k + 1) -= factor * rhs(k);
  }
  if (n > 0 && std::abs(u(n - 1, n - 1)) < floor) u(n - 1, n - 1) = floor;
  Vector<C> x = u.template triangularView<Eigen::Upper>().solve(rhs);
  const Scalar xnorm = x.norm();
  if (!(xnorm > 0) || !std::isfinite(xnorm)) return 0;
  x /= xnorm;
  return (shifted * x).norm();
}

}  // namespace detail

/// All eigenvalues of a square real matrix.
///
/// Balancing, Householder reduction to Hessenberg form, then Francis
/// double-shift QR with `iterations_per_eigenvalue` sweeps allowed between
/// deflations. The residual is the largest inverse-iteration residual
/// ||(H - lambda I) v|| in the balanced Hessenberg basis, or the trace mismatch
/// for dimensions above `residual_dim_cap`.
template <typename Derived>
Spectrum<typename Derived::Scalar> eigenvalues(const Eigen::MatrixBase<Derived>& m,
                                               const Limits& limits = {},
                                               const EigenOptions& options = {}) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw DomainError("eigenvalues: matrix must be square");
  if (m.rows() > limits.max_eigen_dim) {
    throw SizeError("eigenvalues: dimension " + std::to_string(m.rows()) + " exceeds cap " +
                    std::to_string(limits.max_eigen_dim));
  }
  if (!m.allFinite()) throw DomainError("eigenvalues: matrix has non-finite entries");
  Spectrum<Scalar> out;
  const Index n = m.rows();
  if (n == 0) return out;

  Matrix<Scalar> a = m;
  detail::balance(a);
  Matrix<Scalar> h = a;
  if (n > 2) {
    h = Eigen::HessenbergDecomposition<Matrix<Scalar>>(a).matrixH();
  }
  out.eigenvalues = detail::hessenberg_qr(h, options.iterations_per_eigenvalue);

  if (n <= options.residual_dim_cap) {
    for (const auto& lambda : out.eigenvalues) {
      out.residual = std::max(out.residual, detail::hessenberg_residual(h, lambda));
    }
  } else {
    std::complex<Scalar> sum{0, 0};
    for (const auto& lambda : out.eigenvalues) sum += lambda;
    out.residual = std::abs(sum - std::complex<Scalar>(m.trace(), 0));
  }
  return out;
}

/// Greedy nearest-neighbour matching of two eigenvalue multisets.
/// Returns the largest matched distance, or +inf if the sizes differ.
template <typename Scalar>
Scalar multiset_distance(std::span<const std::complex<Scalar>> a,
                         std::span<const std::complex<Scalar>> b) {
  if (a.size() != b.size()) return std::numeric_limits<Scalar>::infinity();
  std::vector<bool> used(b.size(), false);
  Scalar worst = 0;
  for (const auto& x : a) {
    std::size_t best = b.size();
    Scalar best_distance = std::numeric_limits<Scalar>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const Scalar d = std::abs(x - b[j]);
      if (d < best_distance) {
        best_distance = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_distance);
  }
  return worst;
}

}  // namespace kronsensus
