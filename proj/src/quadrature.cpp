#include "mcurve/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mcurve/errors.hpp"
#include "mcurve/number.hpp"
#include "mcurve/summation.hpp"

namespace mcurve {

const GaussLegendre& GaussLegendre::instance() {
  static const GaussLegendre rule = [] {
    GaussLegendre g{};
    const int n = kPoints;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = x;
        for (int m = 2; m <= n; ++m) {
          double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1, p1 = x;
      for (int m = 2; m <= n; ++m) {
        double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      g.nodes[i] = x;
      g.weights[i] = 2 / ((1 - x * x) * dp * dp);
    }
    return g;
  }();
  return rule;
}

namespace {

Complex panel(const std::function<Complex(double)>& f, double a, double b) {
  const auto& g = GaussLegendre::instance();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Complex sum = 0;
  for (int i = 0; i < GaussLegendre::kPoints; ++i) sum += g.weights[i] * f(mid + half * g.nodes[i]);
  return sum * half;
}

}  // namespace

QuadratureResult integrate(const std::function<Complex(double)>& f, double a, double b, double abs_tol,
                           std::size_t initial_panels, std::size_t budget) {
  if (!(abs_tol > 0)) throw ParameterError("quadrature tolerance must be positive");
  QuadratureResult out;
  if (a == b) return out;
  const double total = b - a;
  initial_panels = std::max<std::size_t>(1, initial_panels);
  if (initial_panels > budget) throw NumericError("initial panel count exceeds the quadrature budget", INFINITY);
  struct Item {
    double a, b;
    Complex whole;
  };
  // Depth-first, left to right: the accepted panels are summed in a fixed order.
  std::vector<Item> stack;
  for (std::size_t i = initial_panels; i-- > 0;) {
    double lo = a + total * static_cast<double>(i) / static_cast<double>(initial_panels);
    double hi = i + 1 == initial_panels ? b : a + total * static_cast<double>(i + 1) / static_cast<double>(initial_panels);
    stack.push_back({lo, hi, panel(f, lo, hi)});
  }
  CompensatedComplexSum sum;
  CompensatedSum err;
  std::size_t used = initial_panels;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (it.a + it.b);
    Complex left = panel(f, it.a, mid), right = panel(f, mid, it.b);
    double e = std::abs(it.whole - left - right);
    const double allowed = abs_tol * (it.b - it.a) / total;
    if (e <= allowed || mid <= it.a || mid >= it.b) {
      sum.add(left + right);
      err.add(e);
      ++out.panels;
      continue;
    }
    used += 2;
    if (used > budget) {
      double pending = e;
      throw NumericError("adaptive quadrature exceeded its panel budget of " + std::to_string(budget) +
                             " (error estimate " + format_double(err.value() + pending) + ")",
                         err.value() + pending);
    }
    stack.push_back({mid, it.b, right});
    stack.push_back({it.a, mid, left});
  }
  out.value = sum.value();
  out.error = err.value();
  return out;
}

namespace {

QuadratureResult nested(const std::function<double(std::span<const double>)>& f, std::span<const double> lo,
                        std::span<const double> hi, std::vector<double>& point, std::size_t d, double abs_tol,
                        std::size_t initial_panels, std::size_t budget) {
  const double width = hi[d] - lo[d];
  if (d + 1 == lo.size()) {
    return integrate(
        [&](double x) {
          point[d] = x;
          return Complex(f(point), 0.0);
        },
        lo[d], hi[d], abs_tol, initial_panels, budget);
  }
  const double inner_tol = abs_tol / (2 * width);
  return integrate(
      [&](double x) {
        point[d] = x;
        return nested(f, lo, hi, point, d + 1, inner_tol, initial_panels, budget).value;
      },
      lo[d], hi[d], abs_tol / 2, initial_panels, budget);
}

}  // namespace

QuadratureResult integrate_box(const std::function<double(std::span<const double>)>& f,
                               std::span<const double> lo, std::span<const double> hi, double rel_tol,
                               std::size_t initial_panels, std::size_t budget) {
  if (lo.size() != hi.size() || lo.empty()) throw ParameterError("box bounds must have equal, positive dimension");
  if (!(rel_tol > 0)) throw ParameterError("quadrature tolerance must be positive");
  std::vector<double> point(lo.size());
  // Coarse tensor rule for the magnitude that scales the absolute tolerance.
  const auto& g = GaussLegendre::instance();
  double volume = 1;
  for (std::size_t d = 0; d < lo.size(); ++d) volume *= hi[d] - lo[d];
  if (volume == 0) return {};
  std::vector<int> idx(lo.size(), 0);
  CompensatedSum coarse;
  for (;;) {
    double w = 1;
    for (std::size_t d = 0; d < lo.size(); ++d) {
      double mid = 0.5 * (lo[d] + hi[d]), half = 0.5 * (hi[d] - lo[d]);
      point[d] = mid + half * g.nodes[idx[d]];
      w *= half * g.weights[idx[d]];
    }
    coarse.add(w * std::abs(f(point)));
    std::size_t d = lo.size();
    while (d > 0 && ++idx[d - 1] == GaussLegendre::kPoints) idx[--d] = 0;
    if (d == 0) break;
  }
  double scale = coarse.value();
  if (scale == 0) scale = std::numeric_limits<double>::min();
  return nested(f, lo, hi, point, 0, rel_tol * scale, initial_panels, budget);
}

}  // namespace mcurve
