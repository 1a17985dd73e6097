#include <fftw3.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <numbers>

#include "mcurve/errors.hpp"
#include "mcurve/meanvalue.hpp"
#include "mcurve/summation.hpp"

namespace mcurve {

namespace {

std::int64_t next_smooth(std::int64_t n) {
  for (std::int64_t m = std::max<std::int64_t>(n, 1);; ++m) {
    std::int64_t r = m;
    for (std::int64_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

std::vector<Complex> roots(std::int64_t M) {
  std::vector<Complex> r(static_cast<std::size_t>(M));
  for (std::int64_t m = 0; m < M; ++m) {
    double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(M);
    r[static_cast<std::size_t>(m)] = {std::cos(a), std::sin(a)};
  }
  return r;
}

std::int64_t mod_power(std::int64_t n, int e, std::int64_t M) {
  __int128 r = 1, b = floor_mod(n, M);
  for (int i = 0; i < e; ++i) r = r * b % M;
  return static_cast<std::int64_t>(r);
}

}  // namespace

namespace {

// Sum over the grid prod_j [0, M_j) of phi(|f|^2) at alpha_j = m_j / M_j. Rows are reduced in
// index order whatever the thread count.
template <class Phi>
double grid_sum(const std::vector<Complex>& values, std::int64_t N, const ExponentSet& es,
                const std::vector<std::int64_t>& M, Phi phi, unsigned threads) {
  const int t = es.t();
  if (t > 3) throw ParameterError("torus grid supports at most 3 exponents");
  bool real = true;
  struct Term {
    Complex value;
    std::vector<std::int64_t> residue;  // outer dimensions
    std::int64_t position;
  };
  std::vector<Term> terms;
  for (std::int64_t n = -N; n <= N; ++n) {
    Complex v = values[static_cast<std::size_t>(n + N)];
    if (v == Complex(0)) continue;
    if (v.imag() != 0) real = false;
    Term term{v, {}, mod_power(n, es.exponents().back(), M.back())};
    for (int j = 0; j + 1 < t; ++j)
      term.residue.push_back(mod_power(n, es.exponents()[static_cast<std::size_t>(j)], M[static_cast<std::size_t>(j)]));
    terms.push_back(std::move(term));
  }
  if (terms.empty()) return static_cast<double>(std::accumulate(M.begin(), M.end(), std::int64_t{1}, std::multiplies<>())) * phi(0.0);

  const int outer_dims = t - 1;
  std::vector<std::vector<Complex>> table;
  std::size_t rows = 1;
  for (int j = 0; j < outer_dims; ++j) {
    table.push_back(roots(M[static_cast<std::size_t>(j)]));
    rows *= static_cast<std::size_t>(M[static_cast<std::size_t>(j)]);
  }
  const auto L = static_cast<std::size_t>(M.back());
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), rows));

  auto decode = [&](std::size_t row, std::vector<std::int64_t>& o) {
    for (int j = outer_dims - 1; j >= 0; --j) {
      auto Mj = static_cast<std::size_t>(M[static_cast<std::size_t>(j)]);
      o[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(row % Mj);
      row /= Mj;
    }
  };
  // Row weight under alpha -> -alpha: 0 (covered by its mirror), 1 or 2.
  auto weight = [&](const std::vector<std::int64_t>& o) -> int {
    if (!real) return 1;
    for (int j = 0; j < outer_dims; ++j) {
      std::int64_t Mj = M[static_cast<std::size_t>(j)];
      std::int64_t a = o[static_cast<std::size_t>(j)], b = (Mj - a) % Mj;
      if (a < b) return 2;
      if (a > b) return 0;
    }
    return 1;
  };

  std::vector<fftw_complex*> buffers(workers);
  std::vector<fftw_plan> plans(workers);
  for (unsigned w = 0; w < workers; ++w) {
    buffers[w] = fftw_alloc_complex(L);
    if (!buffers[w]) throw ResourceError("cannot allocate spectral buffer");
    plans[w] = fftw_plan_dft_1d(static_cast<int>(L), buffers[w], buffers[w], FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  auto release = [&] {
    for (unsigned w = 0; w < workers; ++w) {
      fftw_destroy_plan(plans[w]);
      fftw_free(buffers[w]);
    }
  };
  std::vector<double> row_sum(rows, 0.0);
  try {
    parallel_for(workers, workers, [&](std::size_t w) {
      fftw_complex* buf = buffers[w];
      std::vector<std::int64_t> o(static_cast<std::size_t>(outer_dims));
      for (std::size_t row = w; row < rows; row += workers) {
        decode(row, o);
        int wt = weight(o);
        if (wt == 0) continue;
        std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * L, 0.0);
        for (const Term& term : terms) {
          Complex phase = term.value;
          for (int j = 0; j < outer_dims; ++j) {
            auto Mj = static_cast<__int128>(M[static_cast<std::size_t>(j)]);
            auto idx = static_cast<std::size_t>(static_cast<__int128>(o[static_cast<std::size_t>(j)]) *
                                                term.residue[static_cast<std::size_t>(j)] % Mj);
            phase *= table[static_cast<std::size_t>(j)][idx];
          }
          auto p = static_cast<std::size_t>(term.position);
          buf[p][0] += phase.real();
          buf[p][1] += phase.imag();
        }
        fftw_execute_dft(plans[w], buf, buf);
        CompensatedSum sum;
        for (std::size_t m = 0; m < L; ++m) sum.add(phi(buf[m][0] * buf[m][0] + buf[m][1] * buf[m][1]));
        row_sum[row] = wt * sum.value();
      }
    });
  } catch (...) {
    release();
    throw;
  }
  release();
  CompensatedSum total;
  for (double v : row_sum) total.add(v);
  return total.value();
}

double grid_points(const std::vector<std::int64_t>& M) {
  double points = 1;
  for (auto m : M) points *= static_cast<double>(m);
  if (points > 5e10) throw ResourceError("torus grid of " + format_double(points) + " points exceeds 5e10");
  return points;
}

}  // namespace

double spectral_moment(const std::vector<Complex>& values, std::int64_t N, int s, const ExponentSet& es,
                       unsigned threads) {
  if (s < 1) throw ParameterError("s must be >= 1");
  const int t = es.t();
  if (t > 3) throw ParameterError("spectral method supports at most 3 exponents");
  std::vector<std::int64_t> M(static_cast<std::size_t>(t));
  for (int j = 0; j < t; ++j) {
    int e = es.exponents()[static_cast<std::size_t>(j)];
    double top = std::pow(static_cast<double>(N), e);
    double span = (e % 2 ? 2 * top : top) * s + 1;
    if (span > 4e9) throw ResourceError("spectral grid side " + format_double(span) + " too large");
    auto side = static_cast<std::int64_t>(span);
    M[static_cast<std::size_t>(j)] = j == t - 1 ? next_smooth(side) : side;
  }
  const double points = grid_points(M);
  auto phi = [s](double a) {
    double v = 1.0;
    for (int i = 0; i < s; ++i) v *= a;
    return v;
  };
  return grid_sum(values, N, es, M, phi, threads) / points;
}

double torus_power_mean(const std::vector<Complex>& values, std::int64_t N, const ExponentSet& es,
                        const std::vector<std::int64_t>& sides, double r, unsigned threads) {
  if (static_cast<int>(sides.size()) != es.t()) throw ParameterError("one grid side per exponent required");
  for (auto m : sides)
    if (m < 1) throw ParameterError("grid sides must be positive");
  const double points = grid_points(sides);
  const double half = r / 2;
  return grid_sum(values, N, es, sides, [half](double a) { return std::pow(a, half); }, threads) / points;
}

std::int64_t smooth_size(std::int64_t n) { return next_smooth(n); }

}  // namespace mcurve
