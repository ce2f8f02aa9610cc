#pragma once

// Scalar search helpers shared by the grid-certified solvers.

#include <cmath>
#include <cstddef>
#include <utility>

namespace tecoord::detail {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a maximum of f on [lo, hi].  Assumes f is
/// unimodal there; the endpoints are evaluated too so a boundary maximum is
/// never lost.
template <typename F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  ScalarMax best{lo, f(lo)};
  if (const double v = f(hi); v > best.value) best = {hi, v};
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  if (const double v = f(mid); v > best.value) best = {mid, v};
  return best;
}

/// Uniform grid of `points` values over [lo, hi] followed by golden-section
/// refinement of the best cell.  Ties keep the smallest x.
template <typename F>
ScalarMax grid_then_refine(F&& f, double lo, double hi, std::size_t points, double tol) {
  if (points < 2 || hi <= lo) return {lo, f(lo)};
  const double h = (hi - lo) / static_cast<double>(points - 1);
  ScalarMax best{lo, f(lo)};
  std::size_t best_k = 0;
  for (std::size_t k = 1; k < points; ++k) {
    const double x = k + 1 == points ? hi : lo + h * static_cast<double>(k);
    const double v = f(x);
    if (v > best.value) {
      best = {x, v};
      best_k = k;
    }
  }
  const double a = best_k == 0 ? lo : lo + h * static_cast<double>(best_k - 1);
  const double b = best_k + 1 >= points ? hi : lo + h * static_cast<double>(best_k + 1);
  const auto refined = golden_section_max(f, a, b, tol);
  if (refined.value > best.value) best = refined;
  return best;
}

}  // namespace tecoord::detail
