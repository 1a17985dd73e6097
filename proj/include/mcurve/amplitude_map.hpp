#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcurve/errors.hpp"
#include "mcurve/keys.hpp"
#include "mcurve/parallel.hpp"

namespace mcurve {

inline constexpr std::size_t kDefaultEntryCap = 50'000'000;

struct ComputeOptions {
  unsigned threads = 1;  ///< 0 = machine parallelism
  std::size_t entry_cap = kDefaultEntryCap;
};

template <class S>
struct ScalarOps;

template <>
struct ScalarOps<std::int64_t> {
  static bool is_zero(std::int64_t v) { return v == 0; }
  static void add_product(std::int64_t& acc, std::int64_t a, std::int64_t b) { acc += a * b; }
  static void add(std::int64_t& acc, std::int64_t a) { acc += a; }
};

template <>
struct ScalarOps<mpz_class> {
  static bool is_zero(const mpz_class& v) { return sgn(v) == 0; }
  static void add_product(mpz_class& acc, const mpz_class& a, const mpz_class& b) {
    mpz_addmul(acc.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  }
  static void add(mpz_class& acc, const mpz_class& a) { acc += a; }
};

template <>
struct ScalarOps<std::complex<double>> {
  static bool is_zero(const std::complex<double>& v) { return v.real() == 0.0 && v.imag() == 0.0; }
  static void add_product(std::complex<double>& acc, const std::complex<double>& a,
                          const std::complex<double>& b) {
    acc += a * b;
  }
  static void add(std::complex<double>& acc, const std::complex<double>& a) { acc += a; }
};

template <class S>
struct MapEntry {
  u128 key;
  S value;
};

/// Open-addressing accumulator keyed by packed keys, deterministic probe sequence.
template <class S>
class KeyAccumulator {
 public:
  explicit KeyAccumulator(std::size_t cap, std::size_t expected = 16) : cap_(cap) {
    std::size_t capacity = 16;
    while (capacity < 2 * expected) capacity <<= 1;
    keys_.assign(capacity, kEmpty);
    values_.resize(capacity);
  }

  S& slot(u128 key) {
    std::size_t mask = keys_.size() - 1;
    std::size_t i = static_cast<std::size_t>(hash_key(key)) & mask;
    for (;;) {
      if (keys_[i] == key) return values_[i];
      if (keys_[i] == kEmpty) break;
      i = (i + 1) & mask;
    }
    if (size_ + 1 > cap_)
      throw ResourceError("amplitude map entry cap " + std::to_string(cap_) + " exceeded (attempted " +
                          std::to_string(size_ + 1) + " entries)");
    if (2 * (size_ + 1) > keys_.size()) {
      grow();
      return slot(key);
    }
    keys_[i] = key;
    ++size_;
    return values_[i];
  }

  std::size_t size() const noexcept { return size_; }

  /// Nonzero entries sorted by key; leaves the accumulator empty.
  std::vector<MapEntry<S>> drain_sorted() {
    std::vector<MapEntry<S>> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] != kEmpty && !ScalarOps<S>::is_zero(values_[i]))
        out.push_back({keys_[i], std::move(values_[i])});
    keys_.clear();
    keys_.shrink_to_fit();
    values_.clear();
    values_.shrink_to_fit();
    size_ = 0;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    return out;
  }

 private:
  static constexpr u128 kEmpty = ~static_cast<u128>(0);

  void grow() {
    std::vector<u128> old_keys = std::move(keys_);
    std::vector<S> old_values = std::move(values_);
    keys_.assign(old_keys.size() * 2, kEmpty);
    values_.clear();
    values_.resize(old_keys.size() * 2);
    std::size_t mask = keys_.size() - 1;
    for (std::size_t j = 0; j < old_keys.size(); ++j) {
      if (old_keys[j] == kEmpty) continue;
      std::size_t i = static_cast<std::size_t>(hash_key(old_keys[j])) & mask;
      while (keys_[i] != kEmpty) i = (i + 1) & mask;
      keys_[i] = old_keys[j];
      values_[i] = std::move(old_values[j]);
    }
  }

  std::vector<u128> keys_;
  std::vector<S> values_;
  std::size_t size_ = 0;
  std::size_t cap_;
};

/// Sparse map packed key -> amplitude. Entries sorted by key, none zero. Immutable.
template <class S>
class AmplitudeMap {
 public:
  AmplitudeMap(std::shared_ptr<const KeyCodec> codec, int factor_count, std::vector<MapEntry<S>> entries)
      : codec_(std::move(codec)), factor_count_(factor_count), entries_(std::move(entries)) {}

  /// The identity {(0,...,0): 1}.
  static AmplitudeMap delta(std::shared_ptr<const KeyCodec> codec) {
    std::vector<MapEntry<S>> e;
    e.push_back({0, S(1)});
    return AmplitudeMap(std::move(codec), 0, std::move(e));
  }

  const KeyCodec& codec() const noexcept { return *codec_; }
  const std::shared_ptr<const KeyCodec>& codec_ptr() const noexcept { return codec_; }
  int factor_count() const noexcept { return factor_count_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const MapEntry<S>> entries() const noexcept { return entries_; }

  PowerSumKey key(std::size_t i) const { return codec_->unpack(entries_[i].key, factor_count_); }

  /// Zero when the key is absent.
  S at(const PowerSumKey& key) const {
    u128 packed = codec_->pack(key, factor_count_);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), packed,
                               [](const MapEntry<S>& e, u128 k) { return e.key < k; });
    if (it != entries_.end() && it->key == packed) return it->value;
    return S(0);
  }

  S total_mass() const {
    S sum(0);
    for (const auto& e : entries_) ScalarOps<S>::add(sum, e.value);
    return sum;
  }

 private:
  std::shared_ptr<const KeyCodec> codec_;
  int factor_count_;
  std::vector<MapEntry<S>> entries_;
};

namespace detail {

template <class S>
std::vector<MapEntry<S>> convolve_entries(std::span<const MapEntry<S>> outer, std::span<const MapEntry<S>> inner,
                                          const ComputeOptions& opt) {
  const unsigned threads = resolve_threads(opt.threads);
  const std::size_t expected = std::min<std::size_t>(opt.entry_cap, outer.size() * inner.size());
  if (threads <= 1) {
    KeyAccumulator<S> acc(opt.entry_cap, std::min<std::size_t>(expected, 1u << 20));
    for (const auto& a : outer)
      for (const auto& b : inner) ScalarOps<S>::add_product(acc.slot(a.key + b.key), a.value, b.value);
    return acc.drain_sorted();
  }
  // Pairs are routed to shards by output-key hash. Each shard consumes its pairs in
  // row-major order, so every key sees the same summation order as the serial loop.
  const std::size_t shards = 2 * threads;
  std::vector<KeyAccumulator<S>> acc;
  acc.reserve(shards);
  for (std::size_t i = 0; i < shards; ++i) acc.emplace_back(opt.entry_cap, 16);
  const std::size_t block_pairs = std::size_t{1} << 22;
  const std::size_t rows_per_block = std::max<std::size_t>(1, block_pairs / std::max<std::size_t>(1, inner.size()));
  struct Pair {
    u128 key;
    std::uint32_t row, col;
  };
  for (std::size_t row0 = 0; row0 < outer.size(); row0 += rows_per_block) {
    const std::size_t row1 = std::min(outer.size(), row0 + rows_per_block);
    const std::size_t parts = std::min<std::size_t>(threads, row1 - row0);
    std::vector<std::vector<std::vector<Pair>>> buf(parts, std::vector<std::vector<Pair>>(shards));
    parallel_for(parts, threads, [&](std::size_t p) {
      std::size_t r0 = row0 + (row1 - row0) * p / parts, r1 = row0 + (row1 - row0) * (p + 1) / parts;
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = 0; c < inner.size(); ++c) {
          u128 key = outer[r].key + inner[c].key;
          buf[p][(hash_key(key) >> 32) % shards].push_back(
              {key, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)});
        }
    });
    parallel_for(shards, threads, [&](std::size_t sh) {
      for (std::size_t p = 0; p < parts; ++p)
        for (const Pair& pr : buf[p][sh])
          ScalarOps<S>::add_product(acc[sh].slot(pr.key), outer[pr.row].value, inner[pr.col].value);
    });
    std::size_t total = 0;
    for (auto& a : acc) total += a.size();
    if (total > opt.entry_cap)
      throw ResourceError("amplitude map entry cap " + std::to_string(opt.entry_cap) + " exceeded (attempted " +
                          std::to_string(total) + " entries)");
  }
  std::vector<std::vector<MapEntry<S>>> parts(shards);
  parallel_for(shards, threads, [&](std::size_t sh) { parts[sh] = acc[sh].drain_sorted(); });
  std::vector<MapEntry<S>> out;
  std::size_t n = 0;
  for (auto& p : parts) n += p.size();
  out.reserve(n);
  for (auto& p : parts)
    for (auto& e : p) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

}  // namespace detail

/// entries[key] = sum over u + v = key of a[u] b[v]. Throws ResourceError past the entry cap.
template <class S>
AmplitudeMap<S> convolve(const AmplitudeMap<S>& a, const AmplitudeMap<S>& b, const ComputeOptions& opt = {}) {
  if (!(a.codec() == b.codec())) throw ParameterError("convolve: maps use different exponent sets or radii");
  const int f = a.factor_count() + b.factor_count();
  if (f > a.codec().max_factors()) throw ParameterError("convolve: factor count exceeds the key codec range");
  // The smaller map drives the outer loop; ties keep a outside.
  const bool swap = b.size() < a.size();
  const auto& outer = swap ? b : a;
  const auto& inner = swap ? a : b;
  return AmplitudeMap<S>(a.codec_ptr(), f, detail::convolve_entries<S>(outer.entries(), inner.entries(), opt));
}

/// s-fold self-convolution by square-and-multiply.
template <class S>
AmplitudeMap<S> power(const AmplitudeMap<S>& a, int s, const ComputeOptions& opt = {}) {
  if (s < 1) throw ParameterError("power: s must be >= 1");
  std::unique_ptr<AmplitudeMap<S>> result;
  AmplitudeMap<S> base = a;
  for (;;) {
    if (s & 1) result = std::make_unique<AmplitudeMap<S>>(result ? convolve(*result, base, opt) : base);
    s >>= 1;
    if (!s) break;
    base = convolve(base, base, opt);
  }
  return std::move(*result);
}

}  // namespace mcurve
