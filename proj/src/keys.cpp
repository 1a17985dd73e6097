#include "mcurve/keys.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mcurve/errors.hpp"

namespace mcurve {

ExponentSet::ExponentSet(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  if (exponents_.empty()) throw ParameterError("exponent set must be non-empty");
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] < 1) throw ParameterError("exponents must be positive");
    if (i > 0 && exponents_[i] <= exponents_[i - 1])
      throw ParameterError("exponents must be strictly increasing");
  }
}

ExponentSet ExponentSet::full(int k) {
  if (k < 1) throw ParameterError("k must be >= 1");
  std::vector<int> e(static_cast<std::size_t>(k));
  std::iota(e.begin(), e.end(), 1);
  return ExponentSet(std::move(e));
}

ExponentSet ExponentSet::parse(const std::string& text) {
  std::vector<int> e;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      e.push_back(v);
    } catch (const std::exception&) {
      throw ParameterError("bad exponent list '" + text + "'");
    }
  }
  return ExponentSet(std::move(e));
}

int ExponentSet::K() const noexcept { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }

bool ExponentSet::contains(int e) const noexcept {
  return std::binary_search(exponents_.begin(), exponents_.end(), e);
}

std::string ExponentSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(exponents_[i]);
  }
  return out;
}

std::vector<std::uint8_t> PowerSumKey::canonical_bytes() const {
  std::vector<std::uint8_t> out;
  for (std::int64_t c : components) {
    std::vector<std::uint8_t> bytes;
    auto u = static_cast<std::uint64_t>(c);
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    // Drop redundant sign-extension bytes.
    while (bytes.size() > 1) {
      std::uint8_t last = bytes.back(), prev = bytes[bytes.size() - 2];
      bool redundant = (last == 0x00 && !(prev & 0x80)) || (last == 0xff && (prev & 0x80));
      if (!redundant) break;
      bytes.pop_back();
    }
    out.push_back(static_cast<std::uint8_t>(bytes.size()));
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

std::int64_t checked_power(std::int64_t n, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i)
    if (__builtin_mul_overflow(r, n, &r)) throw ParameterError("power-sum component overflows 64 bits");
  return r;
}

PowerSumKey power_sums(std::span<const std::int64_t> xs, const ExponentSet& es) {
  PowerSumKey key;
  for (int e : es.exponents()) {
    std::int64_t sum = 0;
    for (auto x : xs)
      if (__builtin_add_overflow(sum, checked_power(x, e), &sum))
        throw ParameterError("power-sum component overflows 64 bits");
    key.components.push_back(sum);
  }
  return key;
}

KeyCodec::KeyCodec(ExponentSet es, std::int64_t N, int max_factors)
    : es_(std::move(es)), N_(N), max_factors_(max_factors) {
  if (N < 0) throw ParameterError("support radius must be non-negative");
  if (max_factors < 1) throw ParameterError("factor count must be >= 1");
  const int t = es_.t();
  mpz_class total = 1;
  const mpz_class limit = mpz_class(1) << 126;
  const mpz_class component_limit = mpz_class(1) << 62;
  for (int j = 0; j < t; ++j) {
    int e = es_.exponents()[static_cast<std::size_t>(j)];
    mpz_class top;
    mpz_pow_ui(top.get_mpz_t(), mpz_class(static_cast<long>(N)).get_mpz_t(), static_cast<unsigned long>(e));
    mpz_class span = (e % 2 == 1) ? mpz_class(2 * top) : top;
    mpz_class radix = span * max_factors + 1;
    if (top * max_factors >= component_limit)
      throw ParameterError("power sums of " + std::to_string(max_factors) + " variables with |x| <= " +
                           std::to_string(N) + " overflow 64-bit components");
    lo_.push_back(e % 2 == 1 ? -top.get_si() : 0);
    span_.push_back(span.get_si());
    total *= radix;
    if (total >= limit) throw ParameterError("power-sum key space exceeds 2^126; reduce N, s or the exponents");
    u128 r = 0;
    mpz_class tmp = radix;
    r = static_cast<u128>(mpz_class(tmp >> 64).get_ui()) << 64 | static_cast<u128>(mpz_class(tmp & ((mpz_class(1) << 64) - 1)).get_ui());
    radix_.push_back(r);
  }
  weights_.assign(static_cast<std::size_t>(t), 1);
  for (int j = t - 2; j >= 0; --j)
    weights_[static_cast<std::size_t>(j)] = weights_[static_cast<std::size_t>(j + 1)] * radix_[static_cast<std::size_t>(j + 1)];
}

u128 KeyCodec::pack(const PowerSumKey& key, int factor_count) const {
  if (static_cast<int>(key.components.size()) != es_.t())
    throw ParameterError("key length does not match the exponent set");
  if (factor_count < 0 || factor_count > max_factors_) throw ParameterError("factor count outside codec range");
  u128 packed = 0;
  for (std::size_t j = 0; j < key.components.size(); ++j) {
    __int128 digit = static_cast<__int128>(key.components[j]) - static_cast<__int128>(factor_count) * lo_[j];
    if (digit < 0 || static_cast<u128>(digit) >= radix_[j]) throw ParameterError("key component outside codec range");
    packed += static_cast<u128>(digit) * weights_[j];
  }
  return packed;
}

PowerSumKey KeyCodec::unpack(u128 packed, int factor_count) const {
  PowerSumKey key;
  key.components.resize(radix_.size());
  for (std::size_t j = 0; j < radix_.size(); ++j) {
    u128 digit = packed / weights_[j];
    packed %= weights_[j];
    key.components[j] = static_cast<std::int64_t>(static_cast<__int128>(digit) + static_cast<__int128>(factor_count) * lo_[j]);
  }
  return key;
}

u128 KeyCodec::pack_single(std::int64_t x) const {
  if (x < -N_ || x > N_) throw ParameterError("variable outside [-N, N]");
  std::int64_t xs[1] = {x};
  return pack(power_sums(xs, es_), 1);
}

}  // namespace mcurve
