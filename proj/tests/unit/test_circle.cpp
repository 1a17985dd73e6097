#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "mcurve/circle.hpp"
#include "mcurve/errors.hpp"

using namespace mcurve;

namespace {

Complex direct_sum(const std::vector<double>& alpha, long X) {
  Complex s = 0;
  for (long n = -X; n <= X; ++n) {
    long double phase = 0, p = 1;
    for (double a : alpha) {
      p *= n;
      phase += a * p;
    }
    double t = static_cast<double>(2 * std::numbers::pi_v<long double> * (phase - std::floor(phase)));
    s += Complex(std::cos(t), std::sin(t));
  }
  return s;
}

}  // namespace

TEST_CASE("Weyl sums") {
  CHECK(std::abs(weyl_sum({0.0, 0.0}, 10) - Complex(21, 0)) < 1e-12);
  CHECK(std::abs(weyl_sum({0.5, 0.0}, 2) - Complex(1, 0)) < 1e-12);
  for (double a : {0.1, 0.37, 0.731}) {
    std::vector<double> alpha{a, a * a, 0.2};
    CHECK(std::abs(weyl_sum(alpha, 25) - direct_sum(alpha, 25)) < 1e-9);
  }
  Complex at = weyl_sum_at(7, {3, 5}, {1e-4, -2e-6}, 40);
  Complex ref = weyl_sum({3.0 / 7 + 1e-4, 5.0 / 7 - 2e-6}, 40);
  CHECK(std::abs(at - ref) < 1e-9);
}

TEST_CASE("complete sums") {
  CHECK(std::abs(complete_sum(2, {1, 1}) - Complex(2, 0)) < 1e-12);
  Complex s3 = complete_sum(3, {1, 1});
  CHECK(s3.real() == doctest::Approx(1.5));
  CHECK(s3.imag() == doctest::Approx(-std::sqrt(3.0) / 2));
  // Quadratic Gauss sum modulus sqrt(q) for odd prime q.
  CHECK(std::abs(complete_sum(11, {0, 3})) == doctest::Approx(std::sqrt(11.0)));
  for (std::int64_t q = 1; q <= 40; ++q)
    for (std::int64_t a = 1; a <= q; ++a) CHECK(std::abs(complete_sum(q, {a, 1})) <= q + 1e-9);
}

TEST_CASE("CRT factorization") {
  for (auto [q1, q2] : {std::pair<std::int64_t, std::int64_t>{3, 4}, {5, 7}, {8, 9}}) {
    for (std::int64_t a1 = 1; a1 <= q1 * q2; a1 += 5) {
      std::vector<std::int64_t> a{a1, 7};
      CrtSplit c = crt_split(q1, q2, a);
      Complex lhs = complete_sum(q1 * q2, a), rhs = complete_sum(q1, c.a1) * complete_sum(q2, c.a2);
      CHECK(std::abs(lhs - rhs) < 1e-9);
      for (auto v : c.a1) CHECK((v >= 1 && v <= q1));
    }
  }
  CHECK_THROWS_AS(crt_split(4, 6, {1, 1}), ParameterError);
}

TEST_CASE("oscillatory integral") {
  QuadratureResult z = oscillatory_integral({0.0, 0.0}, 7.5);
  CHECK(z.value.real() == 15.0);
  CHECK(z.value.imag() == 0.0);
  const double b = 0.013, X = 100;
  QuadratureResult lin = oscillatory_integral({b, 0.0}, X);
  CHECK(std::abs(lin.value - Complex(std::sin(2 * std::numbers::pi * b * X) / (std::numbers::pi * b), 0)) < 1e-9);
  // Symmetric interval: the odd part of the phase only rotates conjugate pairs.
  QuadratureResult q = oscillatory_integral({0.0, 1e-3}, 30);
  QuadratureResult qn = oscillatory_integral({0.0, -1e-3}, 30);
  CHECK(std::abs(q.value - std::conj(qn.value)) < 1e-9);
  CHECK_THROWS_AS(oscillatory_integral({0.0, 0.5}, 1e6, 1e-12, 64), NumericError);
}

TEST_CASE("major arcs") {
  ArcDecomposition d(1e3, 2);
  CHECK(d.arcs().size() == 48);
  CHECK(d.disjoint());
  CHECK(d.L() == doctest::Approx(std::pow(1e3, 0.25)));
  CHECK(d.radius(1) == doctest::Approx(d.L() / 1e3));
  for (std::size_t i = 1; i < d.arcs().size(); ++i) CHECK(d.arcs()[i - 1].q <= d.arcs()[i].q);
  auto hit = d.locate({1.0 / 3 + 1e-4, 2.0 / 3});
  REQUIRE(hit.has_value());
  CHECK(hit->q == 3);
  CHECK(hit->a == std::vector<std::int64_t>{1, 2});
  CHECK_FALSE(d.contains({0.4321, 0.1234}));
  CHECK(torus_diff(0.95, 0.05) == doctest::Approx(-0.1));
}

TEST_CASE("approximant near a rational") {
  ArcDecomposition d(1e3, 2);
  std::vector<double> alpha{0.5 + 2e-5, 0.5};
  Complex V = major_arc_approximant(alpha, d);
  Complex F = weyl_sum(alpha, 1e3);
  CHECK(std::abs(F - V) < 10 * (2 + 1e3 * 2 * 2e-5));
  CHECK(major_arc_approximant({0.4321, 0.1234}, d) == Complex(0, 0));
}

TEST_CASE("minor-arc sampling is deterministic") {
  MinorSample a = minor_arc_sup_sample(1e3, 2, 2, 5, 1), b = minor_arc_sup_sample(1e3, 2, 2, 5, 3);
  CHECK(a.max_abs == b.max_abs);
  CHECK(a.location == b.location);
  CHECK(a.evaluated + a.skipped == 512);
  CHECK(a.reference == doctest::Approx(std::pow(1e3, 1 - 1.0 / 16)));
}

TEST_CASE("singular series partial sums") {
  CHECK(singular_series_partial(2, 6, 1) == doctest::Approx(1.0));
  double s2 = singular_series_partial(2, 6, 2);
  CHECK(s2 == doctest::Approx(1.0 + std::pow(std::abs(complete_sum(2, {1, 1})) / 2, 6) +
                              std::pow(std::abs(complete_sum(2, {2, 1})) / 2, 6) +
                              std::pow(std::abs(complete_sum(2, {1, 2})) / 2, 6)));
  CHECK(singular_series_partial(2, 6, 30, 1) == singular_series_partial(2, 6, 30, 3));
}

TEST_CASE("major-arc moment factorizes") {
  MajorArcMoment m = major_arc_moment(50, 2, 6);
  CHECK(m.relative_gap < 1e-4);
  CHECK(m.rows.size() == ArcDecomposition(50, 2).arcs().size());
  CHECK(m.total / std::pow(50.0, 3) > 10);
  CHECK_THROWS_AS(major_arc_moment(50, 2, 4), ParameterError);
}
