#include <doctest.h>

#include <sstream>

#include "mcurve/errors.hpp"
#include "mcurve/weights.hpp"

using namespace mcurve;

TEST_CASE("generators") {
  WeightSequence u = make_generator({}, 3);
  CHECK(u.mode() == Mode::integer);
  CHECK(u.stored_count() == 7);
  CHECK(u.positive());
  CHECK(rho(u).squared == Number(mpz_class(7)));

  WeightSequence spike = make_generator(parse_generator("spike"), 5);
  CHECK(spike.stored_count() == 1);
  CHECK(spike.rational(0) == 1);
  CHECK(spike.rational(3) == 0);

  WeightSequence g = make_generator(parse_generator("geometric:1/2"), 3);
  CHECK(g.rational(-2) == mpq_class(1, 4));
  CHECK(g.rational(3) == mpq_class(1, 8));
  CHECK(g.mode() == Mode::rational);

  WeightSequence r1 = make_generator(parse_generator("random:9"), 4);
  WeightSequence r2 = make_generator(parse_generator("random:9"), 4);
  WeightSequence r3 = make_generator(parse_generator("random:10"), 4);
  CHECK(r1 == r2);
  CHECK_FALSE(r1 == r3);
  for (auto n : r1.indices()) {
    CHECK(r1.rational(n) > 0);
    CHECK(r1.rational(n) <= 1);
  }
}

TEST_CASE("generator parsing errors") {
  CHECK_THROWS_AS(parse_generator("gaussian"), ParameterError);
  CHECK_THROWS_AS(parse_generator("geometric:3/2"), ParameterError);
  CHECK_THROWS_AS(parse_generator("random:x"), ParameterError);
}

TEST_CASE("weight file round trip") {
  std::map<std::int64_t, mpq_class> v{{-2, mpq_class(3, 7)}, {0, 5}, {4, mpq_class(-1, 2)}};
  WeightSequence w = WeightSequence::exact(4, v);
  std::stringstream io;
  format_weights(w, io);
  WeightSequence back = parse_weights(io);
  CHECK(back == w);
  CHECK(back.mode() == Mode::rational);
}

TEST_CASE("weight file modes and errors") {
  std::istringstream ints("2\n-1 3 0\n2 1 0\n");
  CHECK(parse_weights(ints).mode() == Mode::integer);
  std::istringstream floats("1\n0 0.5 0.25\n");
  WeightSequence c = parse_weights(floats);
  CHECK(c.mode() == Mode::complex_float);
  CHECK(c.complex_value(0) == Complex(0.5, 0.25));

  std::istringstream bad("3\n0 1 0\n1 x 0\n");
  try {
    parse_weights(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream dup("3\n0 1 0\n0 2 0\n");
  CHECK_THROWS_AS(parse_weights(dup), FormatError);
  std::istringstream range("1\n2 1 0\n");
  CHECK_THROWS_AS(parse_weights(range), FormatError);
}

TEST_CASE("class restriction and scaling") {
  WeightSequence u = make_generator({}, 5);
  WeightSequence odd = restrict_to_class(u, 2, 1);
  CHECK(odd.stored_count() == 6);
  CHECK(odd.is_stored(-3));
  CHECK_FALSE(odd.is_stored(2));
  WeightSequence half = scale(u, mpq_class(1, 2));
  CHECK(rho(half).squared == Number(mpq_class(11, 4)));
}

TEST_CASE("amplitude arithmetic promotes without rounding") {
  Amplitude a(mpz_class(2)), b(mpq_class(1, 3));
  CHECK((a * b).mode() == Mode::rational);
  CHECK((a * b).rational() == mpq_class(2, 3));
  Amplitude c(Complex(0, 1));
  CHECK((a + c).mode() == Mode::complex_float);
  CHECK(c.norm() == Number(1.0));
  CHECK(c.conj().to_complex() == Complex(0, -1));
}

TEST_CASE("exact lattice") {
  WeightSequence g = make_generator(parse_generator("geometric:1/2"), 2);
  ExactLattice lat = exact_lattice(g);
  CHECK(lat.denominator == 4);
  CHECK(lat.numerators[2] == 4);
  CHECK(lat.numerators[0] == 1);
}
