#pragma once

#include <gmpxx.h>

#include <string>
#include <variant>

namespace mcurve {

/// A real value that is either exact (rational) or a double.
class Number {
 public:
  Number() : value_(mpq_class(0)) {}
  Number(mpq_class q) : value_(std::move(q)) { std::get<mpq_class>(value_).canonicalize(); }
  Number(const mpz_class& z) : value_(mpq_class(z)) {}
  Number(double d) : value_(d) {}

  bool exact() const noexcept { return std::holds_alternative<mpq_class>(value_); }
  const mpq_class& rational() const { return std::get<mpq_class>(value_); }
  double to_double() const;
  bool is_zero() const { return exact() ? sgn(rational()) == 0 : std::get<double>(value_) == 0.0; }
  /// "p" or "p/q" when exact, shortest round-trip decimal otherwise.
  std::string to_string() const;

  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);
  friend Number operator+(const Number& a, const Number& b);
  friend bool operator==(const Number& a, const Number& b);

 private:
  std::variant<mpq_class, double> value_;
};

Number pow(const Number& base, unsigned exponent);

std::string to_decimal(const mpz_class& z);
std::string format_double(double d);

}  // namespace mcurve
