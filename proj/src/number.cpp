#include "mcurve/number.hpp"

#include <charconv>
#include <cmath>

namespace mcurve {

double Number::to_double() const {
  if (exact()) return rational().get_d();
  return std::get<double>(value_);
}

std::string format_double(double d) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, end);
}

std::string to_decimal(const mpz_class& z) { return z.get_str(10); }

std::string Number::to_string() const {
  if (exact()) return rational().get_str(10);
  return format_double(std::get<double>(value_));
}

Number operator*(const Number& a, const Number& b) {
  if (a.exact() && b.exact()) return Number(mpq_class(a.rational() * b.rational()));
  return Number(a.to_double() * b.to_double());
}

Number operator/(const Number& a, const Number& b) {
  if (a.exact() && b.exact()) return Number(mpq_class(a.rational() / b.rational()));
  return Number(a.to_double() / b.to_double());
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact() && b.exact()) return Number(mpq_class(a.rational() + b.rational()));
  return Number(a.to_double() + b.to_double());
}

bool operator==(const Number& a, const Number& b) {
  if (a.exact() != b.exact()) return false;
  if (a.exact()) return a.rational() == b.rational();
  return a.to_double() == b.to_double();
}

Number pow(const Number& base, unsigned exponent) {
  if (base.exact()) {
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), base.rational().get_num_mpz_t(), exponent);
    mpz_pow_ui(den.get_mpz_t(), base.rational().get_den_mpz_t(), exponent);
    return Number(mpq_class(num, den));
  }
  return Number(std::pow(base.to_double(), static_cast<double>(exponent)));
}

}  // namespace mcurve
