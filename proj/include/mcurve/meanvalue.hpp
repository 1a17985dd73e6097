#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "mcurve/amplitude_map.hpp"
#include "mcurve/keys.hpp"
#include "mcurve/number.hpp"
#include "mcurve/weights.hpp"

namespace mcurve {

template <>
struct ScalarOps<mpq_class> {
  static bool is_zero(const mpq_class& v) { return sgn(v) == 0; }
  static void add_product(mpq_class& acc, const mpq_class& a, const mpq_class& b) { acc += a * b; }
  static void add(mpq_class& acc, const mpq_class& a) { acc += a; }
};

/// sparse: materialize power(single, s). sliced: meet in the middle, split by the top key
/// digit. spectral: aliasing-free torus grid with FFT (floating point, t <= 3).
enum class MeanValueMethod { automatic, sparse, sliced, spectral };

const char* to_string(MeanValueMethod m);
MeanValueMethod parse_method(const std::string& text);

struct MeanValueOptions : ComputeOptions {
  MeanValueMethod method = MeanValueMethod::automatic;
  /// Largest estimated pair count the automatic choice spends on an exact method.
  double exact_work_budget = 6e9;
};

struct MeanValueResult {
  int s = 0;
  ExponentSet exponents = ExponentSet::full(1);
  std::int64_t N = 0;
  Mode mode = Mode::integer;
  Number raw_moment;
  Number normalized;
  /// Support size of power(single, s); unknown on the spectral path.
  std::optional<std::uint64_t> distinct_keys;
  MeanValueMethod method = MeanValueMethod::sparse;
  bool exact = true;
};

/// Entry at (n^{k_1}, ..., n^{k_t}) is alpha_n, summed over colliding n.
AmplitudeMap<mpq_class> single_factor_map(const WeightSequence& w, const ExponentSet& es, int max_factors = 1);
AmplitudeMap<Complex> single_factor_map_complex(const WeightSequence& w, const ExponentSet& es,
                                                int max_factors = 1);

MeanValueResult mean_value(const WeightSequence& w, int s, const ExponentSet& es,
                           const MeanValueOptions& opt = {});

inline constexpr double kDefaultEnumerationCap = 1e9;

/// Direct enumeration of all 2s-tuples; independent of the convolution code.
MeanValueResult brute_force_mean_value(const WeightSequence& w, int s, const ExponentSet& es,
                                       double enumeration_cap = kDefaultEnumerationCap);

struct LowerBoundWitness {
  mpz_class diagonal_count;  ///< (2N+1)^s
  mpz_class box_bound;       ///< floor((2N+1)^{2s} / prod_j (2 s N^j + 1))
};

LowerBoundWitness lower_bound_witness(std::int64_t N, int s, int k);

struct NewtonCheck {
  bool holds = false;
  Number raw_moment;
  Number multiset_sum;  ///< sum over multisets of |ordering count * prod alpha|^2
};

/// s <= k with the full exponent set; compares the moment with the permutation-only count.
NewtonCheck newton_regime_check(const WeightSequence& w, int s, int k, const MeanValueOptions& opt = {});

/// Sum over the torus grid of |f|^{2s}, divided by the grid size. Exact up to rounding when
/// every grid side exceeds the key span of f^s.
double spectral_moment(const std::vector<Complex>& values, std::int64_t N, int s, const ExponentSet& es,
                       unsigned threads);

/// Mean of |f|^r over the grid with the given sides (last side should be FFT friendly).
double torus_power_mean(const std::vector<Complex>& values, std::int64_t N, const ExponentSet& es,
                        const std::vector<std::int64_t>& sides, double r, unsigned threads);

/// Smallest 7-smooth integer >= n.
std::int64_t smooth_size(std::int64_t n);

}  // namespace mcurve
