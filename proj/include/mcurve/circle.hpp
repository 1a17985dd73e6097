#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcurve/quadrature.hpp"

namespace mcurve {

/// F(alpha; X) = sum_{|n| <= X} e(alpha_1 n + ... + alpha_k n^k), compensated.
Complex weyl_sum(const std::vector<double>& alpha, double X);

/// F at alpha = a/q + beta; the a/q part of each phase is reduced exactly.
Complex weyl_sum_at(std::int64_t q, const std::vector<std::int64_t>& a, const std::vector<double>& beta, double X);

/// S(q, a) = sum_{r=1}^{q} e((a_1 r + ... + a_k r^k) / q) from integer residues.
Complex complete_sum(std::int64_t q, const std::vector<std::int64_t>& a);

/// Residue vectors with S(q1 q2, a) = S(q1, a') S(q2, a'') for coprime q1, q2, each in [1, q].
struct CrtSplit {
  std::vector<std::int64_t> a1, a2;
};
CrtSplit crt_split(std::int64_t q1, std::int64_t q2, const std::vector<std::int64_t>& a);

inline constexpr double kDefaultIntegralTol = 1e-10;
inline constexpr double kDefaultMomentTol = 1e-6;

/// I(beta; X) = int_{-X}^{X} e(beta_1 g + ... + beta_k g^k) dg.
QuadratureResult oscillatory_integral(const std::vector<double>& beta, double X, double tol = kDefaultIntegralTol,
                                      std::size_t budget = kDefaultPanelBudget);

struct Arc {
  std::int64_t q;
  std::vector<std::int64_t> a;
};

/// Major arcs M(q, a): 1 <= q <= L = X^{1/(2k)}, 1 <= a_j <= q, gcd(q, a) = 1,
/// |alpha_j - a_j/q| <= L X^{-j} on the torus. Ordered by q, then a lexicographically.
class ArcDecomposition {
 public:
  ArcDecomposition(double X, int k);

  double X() const noexcept { return X_; }
  int k() const noexcept { return k_; }
  double L() const noexcept { return L_; }
  double radius(int j) const { return radius_[static_cast<std::size_t>(j - 1)]; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

  /// Containing arc, smallest q first.
  std::optional<Arc> locate(const std::vector<double>& alpha) const;
  bool contains(const std::vector<double>& alpha) const { return locate(alpha).has_value(); }
  /// Pairwise box-intersection test over all arcs.
  bool disjoint() const;
  /// sum_q q^k prod_j 2 L X^{-j}
  double measure_bound() const;

 private:
  double X_, L_;
  int k_;
  std::vector<double> radius_;
  std::vector<Arc> arcs_;
};

/// Signed torus difference x - y in [-1/2, 1/2).
double torus_diff(double x, double y);

/// V(alpha; q, a) = q^{-1} S(q, a) I(alpha - a/q; X) on the arc containing alpha, else 0.
Complex major_arc_approximant(const std::vector<double>& alpha, const ArcDecomposition& arcs,
                              double tol = kDefaultIntegralTol);

struct MinorSample {
  double max_abs = 0;
  std::vector<double> location;
  std::size_t evaluated = 0;  ///< points outside the major arcs
  std::size_t skipped = 0;    ///< points that fell on a major arc
  double reference = 0;       ///< X^{1 - 1/(4k^2)}
};

/// 256 * grid_density points of a seeded Kronecker sequence in [0,1)^k.
MinorSample minor_arc_sup_sample(double X, int k, int grid_density, std::uint64_t seed, unsigned threads = 1);

/// sum over q <= Q and admissible a of |q^{-1} S(q, a)|^u
double singular_series_partial(int k, double u, std::int64_t Q, unsigned threads = 1);

struct ArcMomentRow {
  Arc arc;
  double value;
};

struct MajorArcMoment {
  double total = 0;             ///< sum over arcs of the arc integrals of |V|^u
  std::vector<ArcMomentRow> rows;
  double box_integral = 0;      ///< int over one arc box of |I(beta; X)|^u
  double singular_partial = 0;  ///< sum over the arcs of |S/q|^u
  double singular_integral = 0; ///< int_{|b_j| <= L} |I(b; 1)|^u db
  double factorized = 0;        ///< singular_partial * singular_integral * X^{u - k(k+1)/2}
  double relative_gap = 0;      ///< |total - factorized| / factorized
};

MajorArcMoment major_arc_moment(double X, int k, double u, double tol = kDefaultMomentTol, unsigned threads = 1);

}  // namespace mcurve
