#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mcurve/meanvalue.hpp"

namespace mcurve {

struct StrichartzResult {
  int p = 2;
  std::int64_t N = 0;
  ExponentSet exponents = ExponentSet::full(1);
  /// Largest normalized mean value over the candidates.
  Number best_normalized;
  /// best_normalized^{1/p}
  double K_hat = 0;
  WeightSequence witness;
  /// "unit" or "random:<seed>"
  std::string witness_label;
  std::size_t candidates = 0;
  Number unit_normalized;
};

/// Lower bound for K_{p,N} over the unit sequence and search_budget seeded random ones.
StrichartzResult strichartz_constant(int p, std::int64_t N, const ExponentSet& es, int search_budget,
                                     std::uint64_t seed, const MeanValueOptions& opt = {});

struct ExtremalSearchState {
  WeightSequence weights;
  Number objective;
  int iterations = 0;  ///< sweeps run on the winning restart
  std::uint64_t restart_seed = 0;
  int restart = 0;
  std::size_t accepted = 0;
  Number unit_objective;
};

/// Multiplicative coordinate ascent on the normalized mean value. Restart 0 starts from the
/// unit sequence, later restarts from seeded random weights in (0, 1].
ExtremalSearchState extremal_search(int s, const ExponentSet& es, std::int64_t N, int restarts, int iters,
                                    std::uint64_t seed, const MeanValueOptions& opt = {});

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::vector<double> residuals;
  double loo_min = 0, loo_max = 0;  ///< slope range leaving out one point
};

/// Least squares of log y against log x.
LinearFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

struct FitSample {
  std::int64_t N = 0;
  Number raw_moment;
  Number normalized;
  MeanValueMethod method = MeanValueMethod::sparse;
};

struct ExponentFitReport {
  int s = 1;
  ExponentSet exponents = ExponentSet::full(1);
  std::vector<FitSample> samples;
  LinearFit fit;
  double target_theorem = 0;     ///< s - K
  double target_conjecture = 0;  ///< max(0, s - K)
  double lambda_hat = 0;
  double Lambda_hat = 0;  ///< lambda_hat - s + K
};

using WeightFactory = std::function<WeightSequence(std::int64_t N)>;

ExponentFitReport exponent_fit(const WeightFactory& make, int s, const ExponentSet& es,
                               const std::vector<std::int64_t>& N_list, const MeanValueOptions& opt = {});
ExponentFitReport exponent_fit(const GeneratorSpec& gen, int s, const ExponentSet& es,
                               const std::vector<std::int64_t>& N_list, const MeanValueOptions& opt = {});

inline constexpr double kDefaultNormTol = 1e-8;

struct RestrictionTrial {
  double ratio = 0;             ///< sum |g^|^2 / ||g||_{p'}^2
  double coefficient_mass = 0;  ///< sum over curve points of |g^|^2
  double pairing = 0;           ///< |int g_0 conj(g)| on the grid
  double norm_p = 0;            ///< ||g_0||_p from the exact mean value
  double norm_dual = 0;         ///< ||g||_{p'}
  double holder_bound = 0;      ///< norm_p * norm_dual
  double quadrature_error = 0;  ///< relative change of ||g||_{p'}^{p'} under grid refinement
};

struct RestrictionResult {
  int p = 2;
  std::int64_t N = 0;
  ExponentSet exponents = ExponentSet::full(1);
  double A_hat = 0;
  std::size_t best_trial = 0;
  std::vector<RestrictionTrial> trials;
  double K_hat_unit = 0;
  double duality_gap = 0;          ///< |log A_hat - 2 log K_hat|
  double max_pairing_error = 0;    ///< max |pairing - mass| / mass
  double max_chain_excess = 0;     ///< max (mass - holder_bound) / mass, <= 0 when the chain holds
  double max_quadrature_error = 0;
};

/// Random g with Fourier support on the curve points, coefficients drawn from seed.
RestrictionResult restriction_constant(int p, std::int64_t N, const ExponentSet& es, int trials,
                                       std::uint64_t seed, double tol = kDefaultNormTol,
                                       const MeanValueOptions& opt = {});

/// ||g||_r^r over [0,1)^t for g with the given coefficients, refined until two grids agree to tol.
struct GridNorm {
  double value = 0;
  double relative_change = 0;
  std::vector<std::int64_t> sides;
};
GridNorm torus_norm_power(const std::vector<Complex>& values, std::int64_t N, const ExponentSet& es, double r,
                          double tol, unsigned threads);

}  // namespace mcurve
