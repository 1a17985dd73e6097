#include "mcurve/circle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mcurve/errors.hpp"
#include "mcurve/number.hpp"
#include "mcurve/parallel.hpp"
#include "mcurve/summation.hpp"

namespace mcurve {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Fractional part of x * m with the rounding error of the product kept.
double frac_product(double x, double m) {
  double p = x * m;
  double e = std::fma(x, m, -p);
  double f = p - std::nearbyint(p);
  return f + e;
}

double reduce(double t) { return t - std::nearbyint(t); }

Complex expi(double t) { return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)}; }

std::int64_t floor_radius(double X) {
  if (!(X >= 0) || X > 1e12) throw ParameterError("X must be in [0, 1e12]");
  return static_cast<std::int64_t>(std::floor(X));
}

std::int64_t mod_q(std::int64_t v, std::int64_t q) {
  std::int64_t r = v % q;
  return r < 0 ? r + q : r;
}

std::int64_t gcd_all(std::int64_t q, const std::vector<std::int64_t>& a) {
  std::int64_t g = q;
  for (auto x : a) g = std::gcd(g, x);
  return g;
}

}  // namespace

double torus_diff(double x, double y) { return reduce(x - y); }

Complex weyl_sum(const std::vector<double>& alpha, double X) {
  const std::int64_t n_max = floor_radius(X);
  std::vector<double> al(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) al[j] = alpha[j] - std::floor(alpha[j]);
  CompensatedComplexSum sum;
  for (std::int64_t n = -n_max; n <= n_max; ++n) {
    double t = 0, m = 1;
    for (double a : al) {
      m *= static_cast<double>(n);
      t = reduce(t + frac_product(a, m));
    }
    sum.add(expi(t));
  }
  return sum.value();
}

Complex weyl_sum_at(std::int64_t q, const std::vector<std::int64_t>& a, const std::vector<double>& beta, double X) {
  if (q < 1) throw ParameterError("q must be >= 1");
  if (a.size() != beta.size()) throw ParameterError("a and beta must have equal length");
  const std::int64_t n_max = floor_radius(X);
  CompensatedComplexSum sum;
  for (std::int64_t n = -n_max; n <= n_max; ++n) {
    __int128 res = 0, pw = 1;
    double t = 0, m = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
      pw = pw * mod_q(n, q) % q;
      res = (res + static_cast<__int128>(mod_q(a[j], q)) * pw) % q;
      m *= static_cast<double>(n);
      t = reduce(t + frac_product(beta[j], m));
    }
    t = reduce(t + static_cast<double>(res) / static_cast<double>(q));
    sum.add(expi(t));
  }
  return sum.value();
}

Complex complete_sum(std::int64_t q, const std::vector<std::int64_t>& a) {
  if (q < 1) throw ParameterError("q must be >= 1");
  if (q > 100'000'000) throw ResourceError("complete sum modulus too large");
  std::vector<std::int64_t> count(static_cast<std::size_t>(q), 0);
  for (std::int64_t r = 1; r <= q; ++r) {
    __int128 res = 0, pw = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
      pw = pw * r % q;
      res = (res + static_cast<__int128>(mod_q(a[j], q)) * pw) % q;
    }
    ++count[static_cast<std::size_t>(res)];
  }
  CompensatedComplexSum sum;
  for (std::int64_t m = 0; m < q; ++m)
    if (count[static_cast<std::size_t>(m)])
      sum.add(static_cast<double>(count[static_cast<std::size_t>(m)]) * expi(static_cast<double>(m) / static_cast<double>(q)));
  return sum.value();
}

CrtSplit crt_split(std::int64_t q1, std::int64_t q2, const std::vector<std::int64_t>& a) {
  if (q1 < 1 || q2 < 1 || std::gcd(q1, q2) != 1) throw ParameterError("CRT split needs coprime moduli");
  CrtSplit out;
  __int128 p1 = 1, p2 = 1;  // q2^{j-1} mod q1, q1^{j-1} mod q2
  for (auto aj : a) {
    out.a1.push_back(static_cast<std::int64_t>((static_cast<__int128>(mod_q(aj, q1)) * p1 + q1 - 1) % q1 + 1));
    out.a2.push_back(static_cast<std::int64_t>((static_cast<__int128>(mod_q(aj, q2)) * p2 + q2 - 1) % q2 + 1));
    p1 = p1 * q2 % q1;
    p2 = p2 * q1 % q2;
  }
  return out;
}

QuadratureResult oscillatory_integral(const std::vector<double>& beta, double X, double tol, std::size_t budget) {
  if (!(tol > 0)) throw ParameterError("tolerance must be positive");
  if (!(X >= 0)) throw ParameterError("X must be non-negative");
  if (std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0; })) return {Complex(2 * X, 0), 0, 1};
  double variation = 0;
  for (std::size_t j = 0; j < beta.size(); ++j) variation += std::abs(beta[j]) * std::pow(X, static_cast<double>(j + 1));
  const double wanted = std::ceil(2 * variation) + 1;
  if (wanted > static_cast<double>(budget))
    throw NumericError("oscillatory integral needs about " + format_double(wanted) + " panels", INFINITY);
  return integrate(
      [&](double g) {
        double phase = 0;
        for (std::size_t j = beta.size(); j-- > 0;) phase = (phase + beta[j]) * g;
        return expi(reduce(phase));
      },
      -X, X, tol, static_cast<std::size_t>(wanted), budget);
}

ArcDecomposition::ArcDecomposition(double X, int k) : X_(X), k_(k) {
  if (!(X >= 1)) throw ParameterError("X must be >= 1");
  if (k < 1) throw ParameterError("k must be >= 1");
  L_ = std::pow(X, 1.0 / (2.0 * k));
  for (int j = 1; j <= k; ++j) radius_.push_back(L_ * std::pow(X, -static_cast<double>(j)));
  const auto q_max = static_cast<std::int64_t>(std::floor(L_ + 1e-12));
  double count = 0;
  for (std::int64_t q = 1; q <= q_max; ++q) count += std::pow(static_cast<double>(q), k);
  if (count > 1e7) throw ResourceError("major arc family of " + format_double(count) + " arcs exceeds 1e7");
  for (std::int64_t q = 1; q <= q_max; ++q) {
    std::vector<std::int64_t> a(static_cast<std::size_t>(k), 1);
    for (;;) {
      if (gcd_all(q, a) == 1) arcs_.push_back({q, a});
      int j = k - 1;
      while (j >= 0 && a[static_cast<std::size_t>(j)] == q) a[static_cast<std::size_t>(j--)] = 1;
      if (j < 0) break;
      ++a[static_cast<std::size_t>(j)];
    }
  }
}

std::optional<Arc> ArcDecomposition::locate(const std::vector<double>& alpha) const {
  if (static_cast<int>(alpha.size()) != k_) throw ParameterError("alpha must have k components");
  const auto q_max = static_cast<std::int64_t>(std::floor(L_ + 1e-12));
  for (std::int64_t q = 1; q <= q_max; ++q) {
    Arc arc{q, std::vector<std::int64_t>(static_cast<std::size_t>(k_))};
    bool inside = true;
    for (int j = 0; j < k_ && inside; ++j) {
      double x = alpha[static_cast<std::size_t>(j)] - std::floor(alpha[static_cast<std::size_t>(j)]);
      // Nearest a/q; on an exact half the smaller numerator is taken.
      double c = std::ceil(x * static_cast<double>(q) - 0.5);
      auto aj = mod_q(static_cast<std::int64_t>(c) - 1, q) + 1;
      arc.a[static_cast<std::size_t>(j)] = aj;
      inside = std::abs(torus_diff(x, static_cast<double>(aj) / static_cast<double>(q))) <= radius_[static_cast<std::size_t>(j)];
    }
    if (inside && gcd_all(q, arc.a) == 1) return arc;
  }
  return std::nullopt;
}

bool ArcDecomposition::disjoint() const {
  for (std::size_t i = 0; i < arcs_.size(); ++i)
    for (std::size_t m = i + 1; m < arcs_.size(); ++m) {
      const Arc &x = arcs_[i], &y = arcs_[m];
      bool overlap = true;
      for (int j = 0; j < k_ && overlap; ++j) {
        const auto qq = static_cast<__int128>(x.q) * y.q;
        auto d = static_cast<__int128>(x.a[static_cast<std::size_t>(j)]) * y.q - static_cast<__int128>(y.a[static_cast<std::size_t>(j)]) * x.q;
        d %= qq;
        if (d < 0) d += qq;
        double dist = static_cast<double>(std::min(d, qq - d)) / static_cast<double>(qq);
        overlap = dist < 2 * radius_[static_cast<std::size_t>(j)];
      }
      if (overlap) return false;
    }
  return true;
}

double ArcDecomposition::measure_bound() const {
  double box = 1;
  for (double r : radius_) box *= 2 * r;
  const auto q_max = static_cast<std::int64_t>(std::floor(L_ + 1e-12));
  double sum = 0;
  for (std::int64_t q = 1; q <= q_max; ++q) sum += std::pow(static_cast<double>(q), k_);
  return sum * box;
}

Complex major_arc_approximant(const std::vector<double>& alpha, const ArcDecomposition& arcs, double tol) {
  auto arc = arcs.locate(alpha);
  if (!arc) return 0;
  std::vector<double> beta(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j)
    beta[j] = torus_diff(alpha[j], static_cast<double>(arc->a[j]) / static_cast<double>(arc->q));
  return complete_sum(arc->q, arc->a) / static_cast<double>(arc->q) * oscillatory_integral(beta, arcs.X(), tol).value;
}

MinorSample minor_arc_sup_sample(double X, int k, int grid_density, std::uint64_t seed, unsigned threads) {
  if (grid_density < 1) throw ParameterError("grid density must be >= 1");
  ArcDecomposition arcs(X, k);
  // Generalized golden ratio: positive root of x^{k+1} = x + 1.
  double phi = 2;
  for (int i = 0; i < 200; ++i) phi = std::pow(1 + phi, 1.0 / (k + 1));
  std::vector<double> g(static_cast<std::size_t>(k)), offset(static_cast<std::size_t>(k));
  std::mt19937_64 rng(seed);
  for (int j = 0; j < k; ++j) {
    g[static_cast<std::size_t>(j)] = std::fmod(1.0 / std::pow(phi, j + 1), 1.0);
    offset[static_cast<std::size_t>(j)] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  const std::size_t count = 256 * static_cast<std::size_t>(grid_density);
  std::vector<double> value(count, -1);
  parallel_for(count, threads, [&](std::size_t i) {
    std::vector<double> alpha(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      double t = offset[static_cast<std::size_t>(j)] + static_cast<double>(i + 1) * g[static_cast<std::size_t>(j)];
      alpha[static_cast<std::size_t>(j)] = t - std::floor(t);
    }
    if (!arcs.contains(alpha)) value[i] = std::abs(weyl_sum(alpha, X));
  });
  MinorSample out;
  out.reference = std::pow(X, 1.0 - 1.0 / (4.0 * k * k));
  for (std::size_t i = 0; i < count; ++i) {
    if (value[i] < 0) {
      ++out.skipped;
      continue;
    }
    ++out.evaluated;
    if (value[i] > out.max_abs || out.location.empty()) {
      out.max_abs = value[i];
      out.location.resize(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        double t = offset[static_cast<std::size_t>(j)] + static_cast<double>(i + 1) * g[static_cast<std::size_t>(j)];
        out.location[static_cast<std::size_t>(j)] = t - std::floor(t);
      }
    }
  }
  return out;
}

double singular_series_partial(int k, double u, std::int64_t Q, unsigned threads) {
  if (k < 1 || Q < 1) throw ParameterError("singular series needs k >= 1 and Q >= 1");
  if (std::pow(static_cast<double>(Q), k + 2) > 1e12) throw ResourceError("singular series partial sum too large");
  std::vector<double> per_q(static_cast<std::size_t>(Q), 0.0);
  parallel_for(static_cast<std::size_t>(Q), threads, [&](std::size_t idx) {
    const auto q = static_cast<std::int64_t>(idx) + 1;
    std::vector<Complex> roots(static_cast<std::size_t>(q));
    for (std::int64_t m = 0; m < q; ++m) roots[static_cast<std::size_t>(m)] = expi(static_cast<double>(m) / static_cast<double>(q));
    std::vector<std::vector<std::int64_t>> pw(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(q)));
    for (std::int64_t r = 1; r <= q; ++r) {
      std::int64_t p = 1;
      for (int j = 0; j < k; ++j) {
        p = p * r % q;
        pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(r - 1)] = p;
      }
    }
    CompensatedSum sum;
    std::vector<std::int64_t> a(static_cast<std::size_t>(k), 1);
    for (;;) {
      if (gcd_all(q, a) == 1) {
        CompensatedComplexSum s;
        for (std::int64_t r = 0; r < q; ++r) {
          std::int64_t res = 0;
          for (int j = 0; j < k; ++j) res = (res + a[static_cast<std::size_t>(j)] * pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)]) % q;
          s.add(roots[static_cast<std::size_t>(res)]);
        }
        sum.add(std::pow(std::abs(s.value()) / static_cast<double>(q), u));
      }
      int j = k - 1;
      while (j >= 0 && a[static_cast<std::size_t>(j)] == q) a[static_cast<std::size_t>(j--)] = 1;
      if (j < 0) break;
      ++a[static_cast<std::size_t>(j)];
    }
    per_q[idx] = sum.value();
  });
  CompensatedSum total;
  for (double v : per_q) total.add(v);
  return total.value();
}

MajorArcMoment major_arc_moment(double X, int k, double u, double tol, unsigned threads) {
  if (k < 1 || k > 3) throw ParameterError("major-arc moment quadrature supports 1 <= k <= 3");
  if (!(u > k * (k + 1) / 2.0 + 2)) throw ParameterError("major-arc moment needs u > k(k+1)/2 + 2");
  if (!(tol > 0)) throw ParameterError("tolerance must be positive");
  ArcDecomposition arcs(X, k);
  MajorArcMoment out;
  std::vector<double> lo, hi, slo, shi;
  for (int j = 1; j <= k; ++j) {
    lo.push_back(-arcs.radius(j));
    hi.push_back(arcs.radius(j));
    slo.push_back(-arcs.L());
    shi.push_back(arcs.L());
  }
  // The two integrals are independent so they may run side by side.
  parallel_for(2, threads, [&](std::size_t which) {
    if (which == 0) {
      out.box_integral = integrate_box(
                             [&](std::span<const double> b) {
                               std::vector<double> beta(b.begin(), b.end());
                               return std::pow(std::abs(oscillatory_integral(beta, X, 1e-12 * X).value), u);
                             },
                             lo, hi, tol)
                             .value.real();
    } else {
      out.singular_integral = integrate_box(
                                  [&](std::span<const double> b) {
                                    std::vector<double> beta(b.begin(), b.end());
                                    return std::pow(std::abs(oscillatory_integral(beta, 1.0, 1e-12).value), u);
                                  },
                                  slo, shi, tol)
                                  .value.real();
    }
  });
  CompensatedSum total, series;
  for (const Arc& arc : arcs.arcs()) {
    double weight = std::pow(std::abs(complete_sum(arc.q, arc.a)) / static_cast<double>(arc.q), u);
    double value = weight * out.box_integral;
    out.rows.push_back({arc, value});
    total.add(value);
    series.add(weight);
  }
  out.total = total.value();
  out.singular_partial = series.value();
  out.factorized = out.singular_partial * out.singular_integral * std::pow(X, u - k * (k + 1) / 2.0);
  out.relative_gap = out.factorized == 0 ? 0 : std::abs(out.total - out.factorized) / out.factorized;
  return out;
}

}  // namespace mcurve
