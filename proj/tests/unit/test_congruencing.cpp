#include <doctest.h>

#include "mcurve/congruencing.hpp"
#include "mcurve/errors.hpp"

using namespace mcurve;

TEST_CASE("theta parsing") {
  Theta t = parse_theta("1/4");
  CHECK(t.p == 1);
  CHECK(t.q == 4);
  CHECK(t.value() == 0.25);
  CHECK_THROWS_AS(parse_theta("1"), ParameterError);
  CHECK_THROWS_AS(parse_theta("5/4"), ParameterError);
  CHECK_THROWS_AS(parse_theta("0/3"), ParameterError);
}

TEST_CASE("primality") {
  const std::int64_t primes[] = {2, 3, 5, 7, 97, 1'000'000'007, 2'305'843'009'213'693'951};
  for (auto p : primes) CHECK(is_prime(p));
  const std::int64_t composites[] = {0, 1, 4, 91, 561, 1'000'000'007LL * 3};
  for (auto n : composites) CHECK_FALSE(is_prime(n));
}

TEST_CASE("prime selection") {
  PrimeSelection a = select_prime(100, parse_theta("1/4"), 2);
  CHECK(a.prime == 5);
  CHECK(a.candidates.size() == 33);
  CHECK(a.M == doctest::Approx(std::sqrt(10.0)));
  CHECK(a.warning);
  for (auto p : a.candidates) CHECK(p > a.M);
  CHECK(select_prime(16, parse_theta("1/2"), 2).prime == 5);
  // X^theta = 4 exactly: the comparison is strict.
  CHECK(select_prime(16, parse_theta("1/2"), 2).candidates.front() == 5);
  CHECK_THROWS_AS(select_prime(1, parse_theta("1/2"), 2), ParameterError);
}

TEST_CASE("class lifts and well-conditioned tuples") {
  CHECK(class_lifts(3, 1, 2) == std::vector<std::int64_t>{2, 5, 8});
  CHECK(class_lifts(5, 0, 1) == std::vector<std::int64_t>{1, 2, 3, 4, 5});
  WellConditionedTuples t = well_conditioned_tuples(3, 1, 2, 2);
  CHECK(t.tuples.size() == 6);
  CHECK(t.tuples.front() == std::vector<std::int64_t>{2, 5});
  CHECK(t.tuples.back() == std::vector<std::int64_t>{8, 5});
  for (std::int64_t p : {2, 3, 5, 7})
    for (int k = 1; k <= 4; ++k)
      CHECK(mpz_class(static_cast<unsigned long>(well_conditioned_tuples(p, 1, 1, k).tuples.size())) ==
            xi_count_formula(p, k));
  CHECK(xi_count_formula(3, 4) == 0);
}

TEST_CASE("energy partition") {
  for (auto gen : {"unit", "random:3", "geometric:2/3"}) {
    WeightSequence w = make_generator(parse_generator(gen), 7);
    for (int c = 0; c <= 2; ++c) {
      CongruenceProfile p = class_profile(w, 3, c);
      CHECK(p.energies.size() == static_cast<std::size_t>(ipow(3, c)));
      CHECK(p.total() == rho(w).squared);
    }
  }
}

TEST_CASE("conditioned amplitude mass") {
  // 2 ordered distinct classes mod 3 for x in [-4, 4]: 3 * 3 * 6 = 54.
  AmplitudeMap<mpq_class> F = conditioned_amplitude(make_generator({}, 4), 3, 0, 1, 2);
  CHECK(F.total_mass() == 54);
}

TEST_CASE("aggregated weights sum to one") {
  for (auto gen : {"unit", "random:8"}) {
    WeightSequence w = make_generator(parse_generator(gen), 5);
    AggregateResult r = aggregate(MixedKind::I, w, 3, 0, 1, 2, 2);
    CHECK(r.weight_sum == Number(mpq_class(1)));
    CHECK(r.terms.size() == 3);
    CHECK_FALSE(r.bracket.has_value());
  }
}

TEST_CASE("aggregate I, frozen value") {
  AggregateResult r = aggregate(MixedKind::I, make_generator({}, 6), 3, 0, 1, 2, 2, parse_theta("1/4"));
  CHECK(r.value == Number(mpq_class(12776, 2197)));
  REQUIRE(r.bracket.has_value());
  CHECK(*r.bracket == doctest::Approx(12776.0 / 2197.0 / bracket_scale(6, std::pow(6.0, 0.25), 0, 1, 2, 2)));
}

TEST_CASE("mixed moment normalization") {
  WeightSequence w = make_generator({}, 5);
  MixedMomentResult r = mixed_moment_I(w, 3, 0, 1, 1, 2, 2, 2);
  CongruenceProfile a = class_profile(w, 3, 0), b = class_profile(w, 3, 1);
  Number scale = pow(a.energy(1), 2) * pow(b.energy(2), 2);
  CHECK(r.value == r.raw / scale);
  MixedMomentResult k = mixed_moment_K(w, 3, 0, 1, 1, 2, 1, 2);
  CHECK(k.s == 2);
  CHECK(k.value.exact());
}

TEST_CASE("Lemma 5.1 bound, frozen maxima") {
  CHECK(lemma51_bound(3, 0, 1, 2) == 6);
  CHECK(lemma51_bound(5, 0, 1, 3) == 750);
  Lemma51Audit a = lemma51_audit(3, 0, 1, 2);
  CHECK(a.max_cardinality == 6);
  CHECK(a.pass);
  Lemma51Audit b = lemma51_audit(3, 0, 2, 2);
  CHECK(b.max_cardinality == 18);
  CHECK(b.pass);
  CongruenceBox box = enumerate_congruence_box(3, 0, 1, a.argmax_xi, a.argmax_eta, a.argmax_m, 2);
  CHECK(box.solutions.size() == a.max_cardinality);
  for (const auto& z : box.solutions) CHECK(z.size() == 2);
}

TEST_CASE("box enumeration cap") {
  CHECK_THROWS_AS(lemma51_audit(7, 1, 3, 3, 1e4), ResourceError);
}

TEST_CASE("T split") {
  for (std::int64_t X = 1; X <= 4; ++X)
    for (std::int64_t eta = 1; eta <= 3; ++eta) {
      TSplit t = audit_T_split(make_generator({}, X), 3, 0, 1, 1, eta, 4, 2);
      CHECK(t.consistent);
      CHECK(t.T1.rational() + t.T2.rational() == t.I.rational());
    }
  WeightSequence g = make_generator(parse_generator("geometric:1/2"), 3);
  CHECK(audit_T_split(g, 3, 0, 1, 1, 2, 4, 2).consistent);
}

TEST_CASE("T split against the mixed moment") {
  WeightSequence w = make_generator({}, 4);
  TSplit t = audit_T_split(w, 3, 0, 1, 1, 2, 4, 2);
  MixedMomentResult m = mixed_moment_I(w, 3, 0, 1, 1, 2, 4, 2);
  CHECK(t.I == m.value);
}
