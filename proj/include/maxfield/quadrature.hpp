#pragma once

// Adaptive Simpson quadrature with an absolute tolerance and a hard budget on
// integrand evaluations.  Exceeding the budget (or the recursion depth) raises
// QuadratureFailure with diagnostics in the message; callers treat that as
// "tolerance not reached", never as a silent partial answer.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "maxfield/errors.hpp"

namespace maxfield {

struct QuadratureResult {
  double value = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

template <typename Eval>
double simpson_recurse(Eval& eval, double x0, double x2, double f0, double f1,
                       double f2, double whole, double tol, int depth) {
  double x1 = 0.5 * (x0 + x2);
  double h = x2 - x0;
  double xl = 0.5 * (x0 + x1), xr = 0.5 * (x1 + x2);
  double fl = eval(xl), fr = eval(xr);
  double left = (h / 12.0) * (f0 + 4.0 * fl + f1);
  double right = (h / 12.0) * (f1 + 4.0 * fr + f2);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  if (depth <= 0)
    throw QuadratureFailure(
        "adaptive Simpson recursion depth exhausted on [" +
        std::to_string(x0) + ", " + std::to_string(x2) + "]");
  return simpson_recurse(eval, x0, x1, f0, fl, f1, left, 0.5 * tol, depth - 1) +
         simpson_recurse(eval, x1, x2, f1, fr, f2, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol,
                                  std::size_t max_evals = 200000) {
  if (!(b > a)) throw DomainError("adaptive_simpson: need b > a");
  if (!(abs_tol > 0.0)) throw DomainError("adaptive_simpson: need abs_tol > 0");
  std::size_t evals = 0;
  auto eval = [&](double x) {
    if (++evals > max_evals)
      throw QuadratureFailure("evaluation budget " + std::to_string(max_evals) +
                              " exhausted before reaching tolerance " +
                              std::to_string(abs_tol));
    return f(x);
  };
  double fa = eval(a);
  double fm = eval(0.5 * (a + b));
  double fb = eval(b);
  double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
  double value =
      detail::simpson_recurse(eval, a, b, fa, fm, fb, whole, abs_tol, 52);
  return {value, evals};
}

}  // namespace maxfield
