#include "mcurve/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mcurve/errors.hpp"

namespace mcurve {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::integer: return "integer";
    case Mode::rational: return "rational";
    case Mode::complex_float: return "complex-float";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Amplitude

Amplitude::Amplitude(mpq_class q) {
  q.canonicalize();
  if (q.get_den() == 1)
    value_ = mpz_class(q.get_num());
  else
    value_ = std::move(q);
}

Mode Amplitude::mode() const noexcept {
  switch (value_.index()) {
    case 0: return Mode::integer;
    case 1: return Mode::rational;
    default: return Mode::complex_float;
  }
}

bool Amplitude::is_zero() const {
  if (auto* z = std::get_if<mpz_class>(&value_)) return *z == 0;
  if (auto* q = std::get_if<mpq_class>(&value_)) return *q == 0;
  return std::get<Complex>(value_) == Complex(0.0, 0.0);
}

mpq_class Amplitude::rational() const {
  if (auto* z = std::get_if<mpz_class>(&value_)) return mpq_class(*z);
  return std::get<mpq_class>(value_);
}

Complex Amplitude::to_complex() const {
  if (exact()) return Complex(rational().get_d(), 0.0);
  return std::get<Complex>(value_);
}

Number Amplitude::norm() const {
  if (exact()) {
    mpq_class q = rational();
    return Number(mpq_class(q * q));
  }
  return Number(std::norm(std::get<Complex>(value_)));
}

Amplitude Amplitude::conj() const {
  if (exact()) return *this;
  return Amplitude(std::conj(std::get<Complex>(value_)));
}

Amplitude operator+(const Amplitude& a, const Amplitude& b) {
  if (a.exact() && b.exact()) return Amplitude(mpq_class(a.rational() + b.rational()));
  return Amplitude(a.to_complex() + b.to_complex());
}

Amplitude operator*(const Amplitude& a, const Amplitude& b) {
  if (a.exact() && b.exact()) return Amplitude(mpq_class(a.rational() * b.rational()));
  return Amplitude(a.to_complex() * b.to_complex());
}

bool operator==(const Amplitude& a, const Amplitude& b) {
  if (a.exact() != b.exact()) return false;
  if (a.exact()) return a.rational() == b.rational();
  return a.to_complex() == b.to_complex();
}

// ---------------------------------------------------------------------------
// WeightSequence

namespace {

void check_radius(std::int64_t N) {
  if (N < 0) throw ParameterError("support radius N must be non-negative");
}

template <class Map>
void check_indices(std::int64_t N, const Map& values) {
  for (const auto& [n, v] : values)
    if (n < -N || n > N)
      throw FormatError("index " + std::to_string(n) + " outside [-" + std::to_string(N) + ", " +
                        std::to_string(N) + "]");
}

}  // namespace

WeightSequence WeightSequence::exact(std::int64_t N, std::map<std::int64_t, mpq_class> values,
                                     bool force_rational) {
  check_radius(N);
  check_indices(N, values);
  WeightSequence w;
  w.N_ = N;
  w.mode_ = force_rational ? Mode::rational : Mode::integer;
  for (auto& [n, q] : values) {
    q.canonicalize();
    if (q.get_den() != 1) w.mode_ = Mode::rational;
  }
  w.exact_ = std::move(values);
  return w;
}

WeightSequence WeightSequence::complex(std::int64_t N, std::map<std::int64_t, Complex> values) {
  check_radius(N);
  check_indices(N, values);
  for (const auto& [n, c] : values)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ParameterError("amplitude at index " + std::to_string(n) + " is not finite");
  WeightSequence w;
  w.N_ = N;
  w.mode_ = Mode::complex_float;
  w.complex_ = std::move(values);
  return w;
}

Amplitude WeightSequence::operator[](std::int64_t n) const {
  if (exact()) return Amplitude(rational(n));
  return Amplitude(complex_value(n));
}

mpq_class WeightSequence::rational(std::int64_t n) const {
  auto it = exact_.find(n);
  return it == exact_.end() ? mpq_class(0) : it->second;
}

Complex WeightSequence::complex_value(std::int64_t n) const {
  if (exact()) return Complex(rational(n).get_d(), 0.0);
  auto it = complex_.find(n);
  return it == complex_.end() ? Complex(0.0, 0.0) : it->second;
}

std::vector<std::int64_t> WeightSequence::indices() const {
  std::vector<std::int64_t> out;
  if (exact())
    for (const auto& kv : exact_) out.push_back(kv.first);
  else
    for (const auto& kv : complex_) out.push_back(kv.first);
  return out;
}

std::size_t WeightSequence::stored_count() const noexcept {
  return exact() ? exact_.size() : complex_.size();
}

bool WeightSequence::is_stored(std::int64_t n) const {
  return exact() ? exact_.contains(n) : complex_.contains(n);
}

bool WeightSequence::positive() const {
  if (stored_count() != static_cast<std::size_t>(2 * N_ + 1)) return false;
  if (exact()) return std::all_of(exact_.begin(), exact_.end(), [](auto& kv) { return kv.second > 0; });
  return std::all_of(complex_.begin(), complex_.end(),
                     [](auto& kv) { return kv.second.imag() == 0.0 && kv.second.real() > 0.0; });
}

bool WeightSequence::all_zero() const {
  if (exact()) return std::all_of(exact_.begin(), exact_.end(), [](auto& kv) { return kv.second == 0; });
  return std::all_of(complex_.begin(), complex_.end(),
                     [](auto& kv) { return kv.second == Complex(0.0, 0.0); });
}

bool WeightSequence::real_valued() const {
  if (exact()) return true;
  return std::all_of(complex_.begin(), complex_.end(), [](auto& kv) { return kv.second.imag() == 0.0; });
}

bool operator==(const WeightSequence& a, const WeightSequence& b) {
  return a.N_ == b.N_ && a.mode_ == b.mode_ && a.exact_ == b.exact_ && a.complex_ == b.complex_;
}

Rho rho(const WeightSequence& w) {
  if (w.all_zero()) return {Number(mpq_class(1)), 1.0};
  if (w.exact()) {
    mpq_class sum = 0;
    for (auto n : w.indices()) {
      mpq_class q = w.rational(n);
      sum += q * q;
    }
    return {Number(sum), std::sqrt(sum.get_d())};
  }
  // Neumaier summation keeps the energy accurate when magnitudes vary widely.
  double sum = 0.0, carry = 0.0;
  for (auto n : w.indices()) {
    double term = std::norm(w.complex_value(n));
    double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  sum += carry;
  return {Number(sum), std::sqrt(sum)};
}

// ---------------------------------------------------------------------------
// Generators

WeightSequence make_generator(const GeneratorSpec& spec, std::int64_t N) {
  check_radius(N);
  std::map<std::int64_t, mpq_class> values;
  switch (spec.kind) {
    case GeneratorKind::unit:
      for (std::int64_t n = -N; n <= N; ++n) values[n] = 1;
      break;
    case GeneratorKind::single_spike:
      values[0] = 1;
      break;
    case GeneratorKind::random_uniform: {
      std::mt19937_64 rng(spec.seed);
      for (std::int64_t n = -N; n <= N; ++n) {
        auto j = static_cast<unsigned long>((rng() & (kRandomResolution - 1)) + 1);
        values[n] = mpq_class(mpz_class(j), mpz_class(static_cast<unsigned long>(kRandomResolution)));
      }
      break;
    }
    case GeneratorKind::geometric_decay: {
      if (spec.ratio <= 0 || spec.ratio > 1)
        throw ParameterError("geometric-decay ratio must lie in (0, 1]");
      for (std::int64_t n = -N; n <= N; ++n) {
        mpz_class num, den;
        auto e = static_cast<unsigned long>(n < 0 ? -n : n);
        mpz_pow_ui(num.get_mpz_t(), spec.ratio.get_num_mpz_t(), e);
        mpz_pow_ui(den.get_mpz_t(), spec.ratio.get_den_mpz_t(), e);
        values[n] = mpq_class(num, den);
      }
      break;
    }
  }
  return WeightSequence::exact(N, std::move(values));
}

GeneratorSpec parse_generator(const std::string& text) {
  GeneratorSpec spec;
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "unit") {
    spec.kind = GeneratorKind::unit;
  } else if (head == "spike" || head == "single-spike") {
    spec.kind = GeneratorKind::single_spike;
  } else if (head == "random" || head == "random-uniform") {
    spec.kind = GeneratorKind::random_uniform;
    if (!arg.empty()) {
      auto [p, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), spec.seed);
      if (ec != std::errc() || p != arg.data() + arg.size())
        throw ParameterError("bad random seed '" + arg + "'");
    }
  } else if (head == "geometric" || head == "geometric-decay") {
    spec.kind = GeneratorKind::geometric_decay;
    try {
      spec.ratio = mpq_class(arg.empty() ? std::string("1/2") : arg);
    } catch (const std::invalid_argument&) {
      throw ParameterError("bad geometric ratio '" + arg + "'");
    }
    spec.ratio.canonicalize();
    if (spec.ratio <= 0 || spec.ratio > 1)
      throw ParameterError("geometric-decay ratio must lie in (0, 1]");
  } else {
    throw ParameterError("unknown weight generator '" + text + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Transformations

WeightSequence restrict_to_class(const WeightSequence& w, std::int64_t modulus,
                                 std::int64_t residue) {
  if (modulus < 1) throw ParameterError("modulus must be >= 1");
  const std::int64_t r = floor_mod(residue, modulus);
  if (w.exact()) {
    std::map<std::int64_t, mpq_class> kept;
    for (auto n : w.indices())
      if (floor_mod(n, modulus) == r) kept[n] = w.rational(n);
    return WeightSequence::exact(w.N(), std::move(kept), w.mode() == Mode::rational);
  }
  std::map<std::int64_t, Complex> kept;
  for (auto n : w.indices())
    if (floor_mod(n, modulus) == r) kept[n] = w.complex_value(n);
  return WeightSequence::complex(w.N(), std::move(kept));
}

WeightSequence scale(const WeightSequence& w, const mpq_class& gamma) {
  if (w.exact()) {
    std::map<std::int64_t, mpq_class> out;
    for (auto n : w.indices()) out[n] = w.rational(n) * gamma;
    return WeightSequence::exact(w.N(), std::move(out));
  }
  return scale(w, Complex(gamma.get_d(), 0.0));
}

WeightSequence scale(const WeightSequence& w, Complex gamma) {
  std::map<std::int64_t, Complex> out;
  for (auto n : w.indices()) out[n] = w.complex_value(n) * gamma;
  return WeightSequence::complex(w.N(), std::move(out));
}

ExactLattice exact_lattice(const WeightSequence& w) {
  if (!w.exact()) throw ParameterError("exact lattice requested for a complex-float sequence");
  ExactLattice lat;
  lat.N = w.N();
  lat.denominator = 1;
  for (auto n : w.indices()) {
    mpq_class q = w.rational(n);
    mpz_lcm(lat.denominator.get_mpz_t(), lat.denominator.get_mpz_t(), q.get_den_mpz_t());
  }
  lat.numerators.assign(static_cast<std::size_t>(2 * w.N() + 1), mpz_class(0));
  for (auto n : w.indices()) {
    mpq_class q = w.rational(n);
    lat.numerators[static_cast<std::size_t>(n + w.N())] = q.get_num() * (lat.denominator / q.get_den());
  }
  return lat;
}

std::vector<Complex> complex_values(const WeightSequence& w) {
  std::vector<Complex> out(static_cast<std::size_t>(2 * w.N() + 1));
  for (auto n : w.indices()) out[static_cast<std::size_t>(n + w.N())] = w.complex_value(n);
  return out;
}

// ---------------------------------------------------------------------------
// File format

namespace {

enum class TokenKind { integer, rational, floating };

struct Token {
  TokenKind kind;
  mpq_class exact;
  double value = 0.0;
};

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool parse_token(std::string_view s, Token& out) {
  std::string_view body = s;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) body.remove_prefix(1);
  if (all_digits(body)) {
    out.kind = TokenKind::integer;
    std::string clean(s.front() == '+' ? s.substr(1) : s);
    out.exact = mpq_class(mpz_class(clean));
    return true;
  }
  auto slash = body.find('/');
  if (slash != std::string_view::npos) {
    if (!all_digits(body.substr(0, slash)) || !all_digits(body.substr(slash + 1))) return false;
    std::string clean(s.front() == '+' ? s.substr(1) : s);
    mpz_class den(std::string(body.substr(slash + 1)));
    if (den == 0) return false;
    out.kind = TokenKind::rational;
    out.exact = mpq_class(clean);
    out.exact.canonicalize();
    return true;
  }
  double d = 0.0;
  std::string_view num = s.front() == '+' ? s.substr(1) : s;
  auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
  if (ec != std::errc() || p != num.data() + num.size() || !std::isfinite(d)) return false;
  out.kind = TokenKind::floating;
  out.value = d;
  return true;
}

std::string float_token(double d) {
  std::string s = format_double(d);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

WeightSequence parse_weights(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::int64_t N = -1;
  struct Row {
    std::int64_t n;
    Token re, im;
    std::size_t line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (N < 0) {
      Token t;
      if (tokens.size() != 1 || !parse_token(tokens[0], t) || t.kind != TokenKind::integer || t.exact < 0 ||
          !t.exact.get_num().fits_slong_p())
        throw ParseError(lineno, "expected the support radius N");
      N = t.exact.get_num().get_si();
      continue;
    }
    if (tokens.size() != 3) throw ParseError(lineno, "expected 'n re im'");
    Token idx, re, im;
    if (!parse_token(tokens[0], idx) || idx.kind != TokenKind::integer || !idx.exact.get_num().fits_slong_p())
      throw ParseError(lineno, "bad index '" + tokens[0] + "'");
    if (!parse_token(tokens[1], re)) throw ParseError(lineno, "bad real part '" + tokens[1] + "'");
    if (!parse_token(tokens[2], im)) throw ParseError(lineno, "bad imaginary part '" + tokens[2] + "'");
    rows.push_back({idx.exact.get_num().get_si(), re, im, lineno});
  }
  if (N < 0) throw ParseError(lineno == 0 ? 1 : lineno, "missing header line with N");

  bool floating = false;
  for (const auto& r : rows) {
    if (r.re.kind == TokenKind::floating || r.im.kind == TokenKind::floating) floating = true;
    if (r.im.kind != TokenKind::floating && r.im.exact != 0) floating = true;
  }
  std::map<std::int64_t, mpq_class> exact_values;
  std::map<std::int64_t, Complex> complex_values_;
  for (const auto& r : rows) {
    if (r.n < -N || r.n > N)
      throw FormatError("line " + std::to_string(r.line) + ": index " + std::to_string(r.n) + " outside [-N, N]");
    bool fresh = floating ? complex_values_.count(r.n) == 0 : exact_values.count(r.n) == 0;
    if (!fresh) throw FormatError("line " + std::to_string(r.line) + ": duplicate index " + std::to_string(r.n));
    if (floating) {
      auto as_double = [](const Token& t) { return t.kind == TokenKind::floating ? t.value : t.exact.get_d(); };
      complex_values_[r.n] = Complex(as_double(r.re), as_double(r.im));
    } else {
      exact_values[r.n] = r.re.exact;
    }
  }
  if (floating) return WeightSequence::complex(N, std::move(complex_values_));
  bool any_rational =
      std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.re.kind == TokenKind::rational; });
  return WeightSequence::exact(N, std::move(exact_values), any_rational);
}

void format_weights(const WeightSequence& w, std::ostream& out) {
  out << w.N() << '\n';
  for (auto n : w.indices()) {
    if (w.exact()) {
      mpq_class q = w.rational(n);
      // Rational-mode files spell integers as p/1 so the mode survives a round trip.
      std::string re = q.get_str(10);
      if (w.mode() == Mode::rational && q.get_den() == 1) re += "/1";
      out << n << ' ' << re << " 0\n";
    } else {
      Complex c = w.complex_value(n);
      out << n << ' ' << float_token(c.real()) << ' ' << float_token(c.imag()) << '\n';
    }
  }
}

WeightSequence read_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open weight file " + path.string());
  return parse_weights(in);
}

void write_weights(const WeightSequence& w, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write weight file " + path.string());
  format_weights(w, out);
}

}  // namespace mcurve
