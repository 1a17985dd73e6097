#include <doctest.h>

#include <cmath>

#include "mcurve/errors.hpp"
#include "mcurve/meanvalue.hpp"

using namespace mcurve;

namespace {

// Unit-weight counts (s, exponents, N) -> (J, distinct keys), frozen from direct
// enumeration of all s-tuples.
struct Oracle {
  int s;
  std::vector<int> es;
  std::int64_t N;
  long J;
  std::uint64_t keys;
};

const Oracle kOracles[] = {
    {2, {1, 2}, 1, 15, 6},      {2, {1, 2}, 3, 91, 28},      {3, {1, 2}, 2, 563, 34},
    {3, {1, 2}, 3, 1771, 80},   {2, {1, 2, 3}, 2, 45, 15},   {3, {1, 2, 3}, 2, 545, 35},
    {4, {1, 2}, 2, 8717, 63},   {2, {1, 3}, 3, 127, 25},     {2, {2}, 3, 289, 10},
};

MeanValueOptions with(MeanValueMethod m, unsigned threads = 1) {
  MeanValueOptions o;
  o.method = m;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("exponent sets") {
  ExponentSet e = ExponentSet::parse("1,3");
  CHECK(e.t() == 2);
  CHECK(e.k() == 3);
  CHECK(e.K() == 4);
  CHECK_FALSE(e.is_full());
  CHECK(ExponentSet::full(3).K() == 6);
  CHECK(ExponentSet::full(3).to_string() == "1,2,3");
  CHECK_THROWS_AS(ExponentSet::parse("2,1"), ParameterError);
  CHECK_THROWS_AS(ExponentSet::parse("0,1"), ParameterError);
}

TEST_CASE("packed keys add under multiplication") {
  KeyCodec codec(ExponentSet::full(3), 4, 3);
  std::vector<std::int64_t> xs{-4, 1, 3};
  u128 sum = 0;
  for (auto x : xs) sum += codec.pack_single(x);
  PowerSumKey key = power_sums(xs, ExponentSet::full(3));
  CHECK(codec.pack(key, 3) == sum);
  CHECK(codec.unpack(sum, 3) == key);
  CHECK(key.components == std::vector<std::int64_t>{0, 26, -36});
}

TEST_CASE("packed key ordering groups by the first power sum") {
  KeyCodec codec(ExponentSet::full(2), 5, 2);
  u128 a = codec.pack(PowerSumKey{{-3, 50}}, 2), b = codec.pack(PowerSumKey{{-2, 0}}, 2);
  CHECK(a < b);
  CHECK(codec.top_digit(a) < codec.top_digit(b));
}

TEST_CASE("key space overflow is a parameter error") {
  CHECK_THROWS_AS(KeyCodec(ExponentSet::full(6), 1000, 20), ParameterError);
  CHECK_THROWS_AS(checked_power(1'000'000, 4), ParameterError);
}

TEST_CASE("frozen unit-weight counts, every method") {
  for (const auto& o : kOracles) {
    CAPTURE(o.s);
    CAPTURE(o.N);
    ExponentSet es(o.es);
    WeightSequence w = make_generator({}, o.N);
    for (auto m : {MeanValueMethod::sparse, MeanValueMethod::sliced}) {
      MeanValueResult r = mean_value(w, o.s, es, with(m));
      CHECK(r.raw_moment == Number(mpz_class(o.J)));
      CHECK(r.distinct_keys == o.keys);
      CHECK(r.exact);
    }
    MeanValueResult bf = brute_force_mean_value(w, o.s, es);
    CHECK(bf.raw_moment == Number(mpz_class(o.J)));
    CHECK(bf.distinct_keys == o.keys);
    MeanValueResult sp = mean_value(w, o.s, es, with(MeanValueMethod::spectral));
    CHECK(sp.raw_moment.to_double() == doctest::Approx(static_cast<double>(o.J)).epsilon(1e-9));
  }
}

TEST_CASE("geometric weights, frozen rationals") {
  WeightSequence g = make_generator(parse_generator("geometric:1/2"), 2);
  const mpq_class expected[] = {mpq_class(13, 8), mpq_class(531, 128), mpq_class(13625, 1024)};
  for (int s = 1; s <= 3; ++s) {
    MeanValueResult r = mean_value(g, s, ExponentSet::full(3));
    CHECK(r.raw_moment == Number(expected[s - 1]));
    CHECK(brute_force_mean_value(g, s, ExponentSet::full(3)).raw_moment == r.raw_moment);
  }
}

TEST_CASE("normalization") {
  WeightSequence u = make_generator({}, 1);
  MeanValueResult r = mean_value(u, 2, ExponentSet::full(2));
  CHECK(r.normalized == Number(mpq_class(15, 9)));
  WeightSequence g = scale(u, mpq_class(2, 3));
  MeanValueResult rg = mean_value(g, 2, ExponentSet::full(2));
  CHECK(rg.normalized == r.normalized);
  CHECK(rg.raw_moment == Number(mpq_class(15 * 16, 81)));
}

TEST_CASE("Parseval at s = 1") {
  WeightSequence w = make_generator(parse_generator("random:4"), 6);
  MeanValueResult r = mean_value(w, 1, ExponentSet::full(3));
  CHECK(r.raw_moment == rho(w).squared);
  CHECK(r.normalized == Number(mpq_class(1)));
}

TEST_CASE("complex weights match the exact path") {
  WeightSequence w = make_generator(parse_generator("random:2"), 3);
  std::map<std::int64_t, Complex> c;
  for (auto n : w.indices()) c[n] = Complex(w.rational(n).get_d(), 0.0);
  WeightSequence wc = WeightSequence::complex(3, c);
  const double exact = mean_value(w, 3, ExponentSet::full(2)).raw_moment.to_double();
  for (auto m : {MeanValueMethod::sparse, MeanValueMethod::sliced, MeanValueMethod::spectral}) {
    MeanValueResult r = mean_value(wc, 3, ExponentSet::full(2), with(m));
    CHECK_FALSE(r.exact);
    CHECK(r.raw_moment.to_double() == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("phases do not change a single-spike moment") {
  std::map<std::int64_t, Complex> c{{2, Complex(0.6, 0.8)}};
  WeightSequence w = WeightSequence::complex(3, c);
  CHECK(mean_value(w, 4, ExponentSet::full(2)).raw_moment.to_double() == doctest::Approx(1.0));
}

TEST_CASE("results do not depend on the thread count") {
  WeightSequence w = make_generator(parse_generator("random:11"), 12);
  for (auto m : {MeanValueMethod::sparse, MeanValueMethod::sliced}) {
    MeanValueResult a = mean_value(w, 3, ExponentSet::full(2), with(m, 1));
    MeanValueResult b = mean_value(w, 3, ExponentSet::full(2), with(m, 4));
    CHECK(a.raw_moment == b.raw_moment);
    CHECK(a.distinct_keys == b.distinct_keys);
  }
  std::map<std::int64_t, Complex> c;
  for (std::int64_t n = -12; n <= 12; ++n) c[n] = Complex(std::cos(0.3 * n), std::sin(0.7 * n));
  WeightSequence wc = WeightSequence::complex(12, c);
  for (auto m : {MeanValueMethod::sparse, MeanValueMethod::sliced, MeanValueMethod::spectral}) {
    MeanValueResult a = mean_value(wc, 3, ExponentSet::full(2), with(m, 1));
    MeanValueResult b = mean_value(wc, 3, ExponentSet::full(2), with(m, 3));
    CHECK(a.raw_moment.to_double() == b.raw_moment.to_double());
  }
}

TEST_CASE("convolution of amplitude maps") {
  WeightSequence u = make_generator({}, 2);
  AmplitudeMap<mpq_class> single = single_factor_map(u, ExponentSet::full(2), 3);
  AmplitudeMap<mpq_class> cube = power(single, 3);
  CHECK(cube.total_mass() == 125);
  AmplitudeMap<mpq_class> twice = convolve(convolve(single, single), single);
  REQUIRE(twice.size() == cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) {
    CHECK(twice.entries()[i].key == cube.entries()[i].key);
    CHECK(twice.entries()[i].value == cube.entries()[i].value);
  }
  // (0, 0) only from (0, 0, 0); (0, 2) from the orderings of (-1, 0, 1).
  CHECK(cube.at(PowerSumKey{{0, 0}}) == 1);
  CHECK(cube.at(PowerSumKey{{0, 2}}) == 6);
}

TEST_CASE("entry cap raises a resource error") {
  MeanValueOptions o = with(MeanValueMethod::sparse);
  o.entry_cap = 100;
  CHECK_THROWS_AS(mean_value(make_generator({}, 20), 3, ExponentSet::full(2), o), ResourceError);
}

TEST_CASE("brute force respects its enumeration cap") {
  CHECK_THROWS_AS(brute_force_mean_value(make_generator({}, 10), 4, ExponentSet::full(2), 1e6), ResourceError);
}

TEST_CASE("lower bound witness") {
  for (std::int64_t N = 1; N <= 4; ++N) {
    LowerBoundWitness lb = lower_bound_witness(N, 3, 2);
    MeanValueResult r = mean_value(make_generator({}, N), 3, ExponentSet::full(2));
    CHECK(lb.diagonal_count == mpz_class(static_cast<long>((2 * N + 1) * (2 * N + 1) * (2 * N + 1))));
    CHECK(Number(lb.diagonal_count).rational() <= r.raw_moment.rational());
    CHECK(Number(lb.box_bound).rational() <= r.raw_moment.rational());
  }
}

TEST_CASE("Newton regime") {
  for (int s = 1; s <= 3; ++s) {
    NewtonCheck c = newton_regime_check(make_generator(parse_generator("random:5"), 3), s, 3);
    CHECK(c.holds);
    CHECK(c.raw_moment == c.multiset_sum);
  }
  CHECK_THROWS_AS(newton_regime_check(make_generator({}, 2), 3, 2), ParameterError);
}

TEST_CASE("automatic method choice") {
  MeanValueResult small = mean_value(make_generator({}, 3), 2, ExponentSet::full(2));
  CHECK(small.method != MeanValueMethod::spectral);
  MeanValueOptions o;
  o.exact_work_budget = 10;
  MeanValueResult big = mean_value(make_generator({}, 20), 3, ExponentSet::full(2), o);
  CHECK(big.method == MeanValueMethod::spectral);
  CHECK(big.raw_moment.to_double() ==
        doctest::Approx(mean_value(make_generator({}, 20), 3, ExponentSet::full(2)).raw_moment.to_double()));
}

TEST_CASE("method names") {
  CHECK(parse_method("sliced") == MeanValueMethod::sliced);
  CHECK(std::string(to_string(MeanValueMethod::automatic)) == "auto");
  CHECK_THROWS_AS(parse_method("fast"), ParameterError);
}
