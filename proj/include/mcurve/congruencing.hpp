#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcurve/amplitude_map.hpp"
#include "mcurve/meanvalue.hpp"
#include "mcurve/number.hpp"
#include "mcurve/weights.hpp"

namespace mcurve {

/// theta = p/q with 0 < theta < 1.
struct Theta {
  long p = 1, q = 4;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  std::string to_string() const { return std::to_string(p) + "/" + std::to_string(q); }
};

Theta parse_theta(const std::string& text);

struct PrimeSelection {
  std::int64_t prime = 0;              ///< min of the candidate set
  std::vector<std::int64_t> candidates;  ///< the floor(k^3/theta)+1 smallest primes > M
  double M = 0;                         ///< X^theta
  bool warning = false;                 ///< max candidate exceeds 2M
  std::string message;
};

inline constexpr std::size_t kDefaultCandidateCap = 1'000'000;

PrimeSelection select_prime(std::int64_t X, Theta theta, int k, std::size_t candidate_cap = kDefaultCandidateCap);

bool is_prime(std::int64_t n);
std::int64_t ipow(std::int64_t base, int e);  ///< throws ParameterError on overflow

/// rho_c(xi)^2 for xi = 1, ..., prime^c.
struct CongruenceProfile {
  std::int64_t prime = 0;
  int level = 0;
  std::int64_t X = 0;
  std::vector<Number> energies;  ///< index xi - 1

  const Number& energy(std::int64_t xi) const { return energies[static_cast<std::size_t>(xi - 1)]; }
  Number total() const;
};

CongruenceProfile class_profile(const WeightSequence& w, std::int64_t prime, int c);

/// Lifts of xi (mod prime^c) to [1, prime^{c+1}], increasing.
std::vector<std::int64_t> class_lifts(std::int64_t prime, int c, std::int64_t xi);

/// Xi_c(xi): ordered k-tuples of distinct lifts, lexicographic.
struct WellConditionedTuples {
  std::int64_t prime = 0;
  int level = 0;
  std::int64_t xi = 0;
  std::vector<std::vector<std::int64_t>> tuples;
};

WellConditionedTuples well_conditioned_tuples(std::int64_t prime, int c, std::int64_t xi, int k);
/// prime (prime-1) ... (prime-k+1), zero when prime < k.
mpz_class xi_count_formula(std::int64_t prime, int k);

/// Sum over Xi_c(xi) of the products of raw class-restricted single-factor maps.
/// The rho_c(xi)^{-k} prefactor is not applied.
AmplitudeMap<mpq_class> conditioned_amplitude(const WeightSequence& w, std::int64_t prime, int c,
                                              std::int64_t xi, int k, const ComputeOptions& opt = {});

struct MixedMomentResult {
  Number value;      ///< normalized by rho_a(xi)^{-2k} rho_b(eta)^{-2s}
  Number raw;        ///< sum |C|^2 before normalization
  std::int64_t prime = 0;
  int a = 0, b = 0, k = 0, s = 0;
  std::int64_t xi = 0, eta = 0;
  std::optional<std::uint64_t> distinct_keys;
};

MixedMomentResult mixed_moment_I(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi,
                                 std::int64_t eta, int s, int k, const ComputeOptions& opt = {});
/// s = u k.
MixedMomentResult mixed_moment_K(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi,
                                 std::int64_t eta, int u, int k, const ComputeOptions& opt = {});

enum class MixedKind { I, K };

struct AggregateResult {
  MixedKind kind = MixedKind::I;
  Number value;
  Number weight_sum;  ///< rho_0(1)^{-4} sum rho_a^2 rho_b^2, identically 1 for nonzero w
  std::vector<MixedMomentResult> terms;  ///< (xi, eta) lexicographic
  std::optional<double> bracket;  ///< needs a < b and theta
  std::optional<double> M;
};

/// `order` is s for I and u for K.
AggregateResult aggregate(MixedKind kind, const WeightSequence& w, std::int64_t prime, int a, int b, int order,
                          int k, std::optional<Theta> theta = std::nullopt, const ComputeOptions& opt = {});

/// (X/M^a)^{k - k(k+1)/2} (X/M^b)^s
double bracket_scale(std::int64_t X, double M, int a, int b, int s, int k);

inline constexpr double kDefaultBoxCap = 1e8;

struct CongruenceBox {
  std::int64_t prime = 0;
  int a = 0, b = 0, k = 0;
  std::int64_t xi = 0, eta = 0;
  std::vector<std::int64_t> m;
  std::vector<std::vector<std::int64_t>> solutions;
};

CongruenceBox enumerate_congruence_box(std::int64_t prime, int a, int b, std::int64_t xi, std::int64_t eta,
                                       const std::vector<std::int64_t>& m, int k, double cap = kDefaultBoxCap);

/// k! prime^{k(k-1)(a+b)/2}
mpz_class lemma51_bound(std::int64_t prime, int a, int b, int k);

struct Lemma51Audit {
  std::int64_t prime = 0;
  int a = 0, b = 0, k = 0;
  std::uint64_t max_cardinality = 0;
  mpz_class bound;
  std::int64_t argmax_xi = 0, argmax_eta = 0;
  std::vector<std::int64_t> argmax_m;
  std::uint64_t boxes = 0;  ///< nonempty boxes seen
  bool pass = false;
};

/// Largest card B_{a,b}(m; xi, eta) over every m, xi, eta.
Lemma51Audit lemma51_audit(std::int64_t prime, int a, int b, int k, double cap = kDefaultBoxCap);

struct TSplit {
  Number T1, T2, I;
  bool consistent = false;  ///< T1 + T2 == I
};

/// Enumerates the solutions counted by I_{a,b}(X; xi, eta) and splits them by whether
/// three of the v lie in one class modulo prime^{b+1}. Exact weights only.
TSplit audit_T_split(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi, std::int64_t eta,
                     int s, int k, double cap = kDefaultBoxCap, const ComputeOptions& opt = {});

}  // namespace mcurve
