#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mcurve {

using u128 = unsigned __int128;

/// Strictly increasing positive exponents k_1 < ... < k_t. {1, ..., k} is the full
/// moment curve.
class ExponentSet {
 public:
  explicit ExponentSet(std::vector<int> exponents);
  static ExponentSet full(int k);
  /// "1,2,3" -> {1, 2, 3}
  static ExponentSet parse(const std::string& text);

  std::span<const int> exponents() const noexcept { return exponents_; }
  int t() const noexcept { return static_cast<int>(exponents_.size()); }
  int k() const noexcept { return exponents_.back(); }
  /// Sum of the exponents; k(k+1)/2 for the full set.
  int K() const noexcept;
  bool is_full() const noexcept { return k() == t(); }
  bool contains(int e) const noexcept;
  std::string to_string() const;

  friend bool operator==(const ExponentSet&, const ExponentSet&) = default;

 private:
  std::vector<int> exponents_;
};

/// The vector (sum x_i^{k_1}, ..., sum x_i^{k_t}).
struct PowerSumKey {
  std::vector<std::int64_t> components;

  /// Length-prefixed minimal two's-complement little-endian bytes per component.
  std::vector<std::uint8_t> canonical_bytes() const;

  friend auto operator<=>(const PowerSumKey&, const PowerSumKey&) = default;
};

/// n^e as int64; throws ParameterError on overflow.
std::int64_t checked_power(std::int64_t n, int e);

PowerSumKey power_sums(std::span<const std::int64_t> xs, const ExponentSet& es);

/// Packs power-sum keys of at most `max_factors` single-variable factors with
/// |x| <= N into one unsigned 128-bit integer. Digit j stores
/// p_j - f * lo_j (f = factor count, lo_j the single-factor minimum of x^{k_j}), so
/// the key of a product is the plain sum of the factors' packed keys. Component 0 is the
/// most significant digit, so sorting packed keys groups them by p_1.
class KeyCodec {
 public:
  KeyCodec(ExponentSet es, std::int64_t N, int max_factors);

  const ExponentSet& exponents() const noexcept { return es_; }
  std::int64_t radius() const noexcept { return N_; }
  int max_factors() const noexcept { return max_factors_; }

  u128 pack(const PowerSumKey& key, int factor_count) const;
  PowerSumKey unpack(u128 packed, int factor_count) const;
  /// Packed key of the single variable x.
  u128 pack_single(std::int64_t x) const;

  /// Weight of the most significant digit (product of the other radices).
  u128 top_weight() const noexcept { return weights_.front(); }
  std::int64_t top_digit(u128 packed) const noexcept {
    return static_cast<std::int64_t>(packed / weights_.front());
  }
  u128 low_part(u128 packed) const noexcept { return packed % weights_.front(); }
  /// Single-factor range width of component j.
  std::int64_t span(int j) const noexcept { return span_[static_cast<std::size_t>(j)]; }
  std::int64_t lower(int j) const noexcept { return lo_[static_cast<std::size_t>(j)]; }

  friend bool operator==(const KeyCodec& a, const KeyCodec& b) {
    return a.es_ == b.es_ && a.N_ == b.N_ && a.max_factors_ == b.max_factors_;
  }

 private:
  ExponentSet es_;
  std::int64_t N_;
  int max_factors_;
  std::vector<std::int64_t> lo_, span_;
  std::vector<u128> radix_, weights_;
};

/// Fixed, platform-independent 64-bit mix of a packed key.
inline std::uint64_t hash_key(u128 key) noexcept {
  std::uint64_t x = static_cast<std::uint64_t>(key) ^ (static_cast<std::uint64_t>(key >> 64) * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace mcurve
