#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace mcurve {

using Complex = std::complex<double>;

/// 20-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  static constexpr int kPoints = 20;
  double nodes[kPoints];
  double weights[kPoints];
  static const GaussLegendre& instance();
};

struct QuadratureResult {
  Complex value;
  double error = 0;       ///< sum of per-panel estimates |G(P) - G(left) - G(right)|
  std::size_t panels = 0;
};

inline constexpr std::size_t kDefaultPanelBudget = std::size_t{1} << 20;

/// Adaptive Gauss-Legendre with bisection until the estimated error of each panel is below
/// abs_tol * (panel length) / (b - a). Throws NumericError (with the achieved estimate) past
/// the panel budget.
QuadratureResult integrate(const std::function<Complex(double)>& f, double a, double b, double abs_tol,
                           std::size_t initial_panels = 1, std::size_t budget = kDefaultPanelBudget);

/// Nested adaptive quadrature of a real function over a box, relative tolerance.
QuadratureResult integrate_box(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> lo, std::span<const double> hi, double rel_tol,
                               std::size_t initial_panels = 4, std::size_t budget = kDefaultPanelBudget);

}  // namespace mcurve
