#pragma once

// Dense Cholesky factorization for the small covariance matrices used by the
// Gaussian samplers.  Near-singular matrices (e.g. nearly coincident
// locations) get an escalating diagonal jitter before we give up.

#include <cmath>
#include <cstddef>
#include <string>

#include "maxfield/errors.hpp"
#include "maxfield/matrix.hpp"

namespace maxfield {

namespace detail {

inline bool try_cholesky(const RowMatrix& a, double jitter, RowMatrix& out) {
  std::size_t n = a.rows();
  out = RowMatrix(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) + jitter;
    for (std::size_t k = 0; k < j; ++k) d -= out(j, k) * out(j, k);
    if (!(d > 0.0)) return false;
    double pivot = std::sqrt(d);
    out(j, j) = pivot;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= out(i, k) * out(j, k);
      out(i, j) = s / pivot;
    }
  }
  return true;
}

}  // namespace detail

// Lower-triangular factor L with L L^T = A (+ jitter I if needed).  The jitter
// ladder is relative to the mean diagonal magnitude; levels 0, 1e-12, 1e-10,
// 1e-8.  Throws FactorizationFailure when even the largest jitter fails.
inline RowMatrix cholesky_spd(const RowMatrix& a) {
  std::size_t n = a.rows();
  if (n == 0 || a.cols() != n)
    throw DomainError("cholesky_spd: matrix must be square and nonempty");
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale += std::abs(a(i, i));
  scale = scale > 0.0 ? scale / static_cast<double>(n) : 1.0;
  const double levels[] = {0.0, 1e-12, 1e-10, 1e-8};
  RowMatrix l;
  for (double lvl : levels)
    if (detail::try_cholesky(a, lvl * scale, l)) return l;
  throw FactorizationFailure(
      "covariance matrix of dimension " + std::to_string(n) +
      " is not positive definite even with diagonal jitter 1e-8");
}

}  // namespace maxfield
