#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mcurve/number.hpp"

namespace mcurve {

using Complex = std::complex<double>;

enum class Mode { integer, rational, complex_float };

const char* to_string(Mode mode);

/// One coefficient alpha_n. Arithmetic promotes integer -> rational -> complex-float and
/// never rounds while both operands are exact.
class Amplitude {
 public:
  Amplitude() : value_(mpz_class(0)) {}
  Amplitude(mpz_class z) : value_(std::move(z)) {}
  Amplitude(mpq_class q);
  Amplitude(Complex c) : value_(c) {}

  Mode mode() const noexcept;
  bool exact() const noexcept { return mode() != Mode::complex_float; }
  bool is_zero() const;
  /// Exact value; throws std::bad_variant_access in complex mode.
  mpq_class rational() const;
  Complex to_complex() const;
  /// |value|^2, exact when the amplitude is.
  Number norm() const;
  Amplitude conj() const;

  friend Amplitude operator+(const Amplitude& a, const Amplitude& b);
  friend Amplitude operator*(const Amplitude& a, const Amplitude& b);
  friend bool operator==(const Amplitude& a, const Amplitude& b);

 private:
  std::variant<mpz_class, mpq_class, Complex> value_;
};

/// Coefficients (alpha_n)_{|n| <= N}. Absent indices are zero. Immutable.
class WeightSequence {
 public:
  WeightSequence() = default;
  /// Exact sequence; the mode is integer when every value is an integer (and
  /// force_rational is false), rational otherwise.
  static WeightSequence exact(std::int64_t N, std::map<std::int64_t, mpq_class> values,
                              bool force_rational = false);
  static WeightSequence complex(std::int64_t N, std::map<std::int64_t, Complex> values);

  std::int64_t N() const noexcept { return N_; }
  Mode mode() const noexcept { return mode_; }
  bool exact() const noexcept { return mode_ != Mode::complex_float; }

  Amplitude operator[](std::int64_t n) const;
  /// Only valid for exact sequences; zero for absent indices.
  mpq_class rational(std::int64_t n) const;
  Complex complex_value(std::int64_t n) const;

  /// Stored indices in increasing order.
  std::vector<std::int64_t> indices() const;
  std::size_t stored_count() const noexcept;
  bool is_stored(std::int64_t n) const;

  /// Every index in [-N, N] stored with a real value > 0.
  bool positive() const;
  bool all_zero() const;
  bool real_valued() const;

  friend bool operator==(const WeightSequence& a, const WeightSequence& b);

 private:
  std::int64_t N_ = 0;
  Mode mode_ = Mode::integer;
  std::map<std::int64_t, mpq_class> exact_;
  std::map<std::int64_t, Complex> complex_;
};

struct Rho {
  Number squared;  ///< sum |alpha_n|^2, or 1 for the zero sequence
  double value;    ///< sqrt(squared)
};

Rho rho(const WeightSequence& w);

enum class GeneratorKind { unit, single_spike, random_uniform, geometric_decay };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::unit;
  std::uint64_t seed = 0;      ///< random_uniform only
  mpq_class ratio = 1;         ///< geometric_decay only, in (0, 1]
};

/// Denominator grid of the random_uniform generator: values j / 2^16, 1 <= j <= 2^16.
inline constexpr std::uint64_t kRandomResolution = 1u << 16;

WeightSequence make_generator(const GeneratorSpec& spec, std::int64_t N);
GeneratorSpec parse_generator(const std::string& text);

WeightSequence restrict_to_class(const WeightSequence& w, std::int64_t modulus,
                                 std::int64_t residue);
WeightSequence scale(const WeightSequence& w, const mpq_class& gamma);
WeightSequence scale(const WeightSequence& w, Complex gamma);

/// Amplitudes as integers over one common denominator (exact modes only).
struct ExactLattice {
  std::int64_t N = 0;
  std::vector<mpz_class> numerators;  ///< index n + N
  mpz_class denominator = 1;
};

ExactLattice exact_lattice(const WeightSequence& w);
/// Dense complex amplitudes, index n + N.
std::vector<Complex> complex_values(const WeightSequence& w);

WeightSequence parse_weights(std::istream& in);
void format_weights(const WeightSequence& w, std::ostream& out);
WeightSequence read_weights(const std::filesystem::path& path);
void write_weights(const WeightSequence& w, const std::filesystem::path& path);

/// Non-negative residue of n modulo m (m >= 1).
inline std::int64_t floor_mod(std::int64_t n, std::int64_t m) {
  std::int64_t r = n % m;
  return r < 0 ? r + m : r;
}

}  // namespace mcurve
