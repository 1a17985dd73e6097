#include "mcurve/constants.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "mcurve/errors.hpp"

namespace mcurve {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Number normalized_value(const WeightSequence& w, int s, const ExponentSet& es, const MeanValueOptions& opt) {
  return mean_value(w, s, es, opt).normalized;
}

bool greater(const Number& a, const Number& b) {
  if (a.exact() && b.exact()) return a.rational() > b.rational();
  return a.to_double() > b.to_double();
}

int half_exponent(int p) {
  if (p < 2 || p % 2 != 0) throw ParameterError("p must be an even integer >= 2");
  return p / 2;
}

}  // namespace

StrichartzResult strichartz_constant(int p, std::int64_t N, const ExponentSet& es, int search_budget,
                                     std::uint64_t seed, const MeanValueOptions& opt) {
  const int s = half_exponent(p);
  if (N < 0) throw ParameterError("N must be >= 0");
  if (search_budget < 0) throw ParameterError("search budget must be >= 0");
  StrichartzResult out;
  out.p = p;
  out.N = N;
  out.exponents = es;
  out.witness = make_generator({}, N);
  out.witness_label = "unit";
  out.unit_normalized = normalized_value(out.witness, s, es, opt);
  out.best_normalized = out.unit_normalized;
  out.candidates = 1;
  for (int i = 0; i < search_budget; ++i) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::random_uniform;
    spec.seed = mix(seed, static_cast<std::uint64_t>(i));
    WeightSequence w = make_generator(spec, N);
    Number v = normalized_value(w, s, es, opt);
    ++out.candidates;
    if (greater(v, out.best_normalized)) {
      out.best_normalized = v;
      out.witness = std::move(w);
      out.witness_label = "random:" + std::to_string(spec.seed);
    }
  }
  out.K_hat = s == 1 && out.best_normalized.exact() && out.best_normalized.rational() == 1
                  ? 1.0
                  : std::pow(out.best_normalized.to_double(), 1.0 / p);
  return out;
}

ExtremalSearchState extremal_search(int s, const ExponentSet& es, std::int64_t N, int restarts, int iters,
                                    std::uint64_t seed, const MeanValueOptions& opt) {
  if (s < 1) throw ParameterError("s must be >= 1");
  if (N < 0) throw ParameterError("N must be >= 0");
  if (restarts < 1 || iters < 1) throw ParameterError("restarts and iterations must be >= 1");
  const mpq_class factors[] = {mpq_class(1, 2), mpq_class(3, 4), mpq_class(9, 8)};
  const Number unit = normalized_value(make_generator({}, N), s, es, opt);

  std::vector<ExtremalSearchState> states(static_cast<std::size_t>(restarts));
  for (int r = 0; r < restarts; ++r) {
    ExtremalSearchState& st = states[static_cast<std::size_t>(r)];
    st.restart = r;
    st.unit_objective = unit;
    std::map<std::int64_t, mpq_class> current;
    if (r == 0) {
      for (std::int64_t n = -N; n <= N; ++n) current[n] = 1;
    } else {
      st.restart_seed = mix(seed, static_cast<std::uint64_t>(r));
      GeneratorSpec spec;
      spec.kind = GeneratorKind::random_uniform;
      spec.seed = st.restart_seed;
      WeightSequence w = make_generator(spec, N);
      for (std::int64_t n = -N; n <= N; ++n) current[n] = w.rational(n);
    }
    auto objective = [&](const std::map<std::int64_t, mpq_class>& v) {
      return normalized_value(WeightSequence::exact(N, v, true), s, es, opt);
    };
    st.objective = objective(current);
    for (int it = 0; it < iters; ++it) {
      ++st.iterations;
      bool moved = false;
      for (std::int64_t n = -N; n <= N; ++n) {
        const mpq_class old = current[n];
        std::optional<mpq_class> best_value;
        Number best = st.objective;
        for (const auto& f : factors) {
          mpq_class trial = old * f;
          if (trial > 1) trial = 1;
          if (trial == old) continue;
          current[n] = trial;
          Number v = objective(current);
          if (greater(v, best)) {
            best = v;
            best_value = trial;
          }
        }
        current[n] = best_value ? *best_value : old;
        if (best_value) {
          st.objective = best;
          ++st.accepted;
          moved = true;
        }
      }
      if (!moved) break;
    }
    st.weights = WeightSequence::exact(N, current, true);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (greater(states[i].objective, states[best].objective)) best = i;
  return states[best];
}

LinearFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ParameterError("fit needs at least two paired points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0)) throw ParameterError("power-law fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  auto solve = [&](std::size_t skip, double& slope, double& intercept) {
    double mx = 0, my = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip) {
        mx += lx[i];
        my += ly[i];
        ++m;
      }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
      }
    if (sxx == 0) throw ParameterError("fit needs distinct abscissae");
    slope = sxy / sxx;
    intercept = my - slope * mx;
  };
  LinearFit fit;
  solve(n, fit.slope, fit.intercept);
  double my = 0;
  for (double v : ly) my += v;
  my /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
    ss_tot += (ly[i] - my) * (ly[i] - my);
  }
  fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  fit.loo_min = fit.loo_max = fit.slope;
  if (n >= 3) {
    fit.loo_min = std::numeric_limits<double>::infinity();
    fit.loo_max = -fit.loo_min;
    for (std::size_t skip = 0; skip < n; ++skip) {
      double sl, ic;
      solve(skip, sl, ic);
      fit.loo_min = std::min(fit.loo_min, sl);
      fit.loo_max = std::max(fit.loo_max, sl);
    }
  }
  return fit;
}

ExponentFitReport exponent_fit(const WeightFactory& make, int s, const ExponentSet& es,
                               const std::vector<std::int64_t>& N_list, const MeanValueOptions& opt) {
  if (N_list.size() < 3) throw ParameterError("exponent fit needs at least three values of N");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 1) throw ParameterError("N values must be >= 1");
    if (i && N_list[i] <= N_list[i - 1]) throw ParameterError("N values must be strictly increasing");
  }
  ExponentFitReport out;
  out.s = s;
  out.exponents = es;
  std::vector<double> xs, ys;
  for (std::int64_t N : N_list) {
    MeanValueResult mv = mean_value(make(N), s, es, opt);
    out.samples.push_back({N, mv.raw_moment, mv.normalized, mv.method});
    xs.push_back(static_cast<double>(N));
    ys.push_back(mv.normalized.to_double());
  }
  out.fit = fit_power_law(xs, ys);
  const double K = es.K();
  out.target_theorem = s - K;
  out.target_conjecture = std::max(0.0, s - K);
  out.lambda_hat = out.fit.slope;
  out.Lambda_hat = out.fit.slope - s + K;
  return out;
}

ExponentFitReport exponent_fit(const GeneratorSpec& gen, int s, const ExponentSet& es,
                               const std::vector<std::int64_t>& N_list, const MeanValueOptions& opt) {
  return exponent_fit([&](std::int64_t N) { return make_generator(gen, N); }, s, es, N_list, opt);
}

GridNorm torus_norm_power(const std::vector<Complex>& values, std::int64_t N, const ExponentSet& es, double r,
                          double tol, unsigned threads) {
  if (!(tol > 0)) throw ParameterError("tolerance must be positive");
  const int t = es.t();
  std::vector<std::int64_t> sides(static_cast<std::size_t>(t));
  for (int j = 0; j < t; ++j) {
    int e = es.exponents()[static_cast<std::size_t>(j)];
    double top = std::pow(static_cast<double>(N), e);
    sides[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(2 * (e % 2 ? 2 * top : top) + 1);
  }
  sides.back() = smooth_size(sides.back());
  GridNorm out;
  out.value = torus_power_mean(values, N, es, sides, r, threads);
  out.sides = sides;
  out.relative_change = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 8; ++round) {
    for (auto& m : sides) m *= 2;
    double refined;
    try {
      refined = torus_power_mean(values, N, es, sides, r, threads);
    } catch (const ResourceError&) {
      break;
    }
    out.relative_change = out.value == 0 ? std::abs(refined) : std::abs(refined - out.value) / out.value;
    out.value = refined;
    out.sides = sides;
    if (out.relative_change <= tol) return out;
  }
  throw NumericError("grid norm did not settle to " + format_double(tol) + " (last relative change " +
                         format_double(out.relative_change) + ")",
                     out.relative_change);
}

RestrictionResult restriction_constant(int p, std::int64_t N, const ExponentSet& es, int trials,
                                       std::uint64_t seed, double tol, const MeanValueOptions& opt) {
  const int s = half_exponent(p);
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (N < 0) throw ParameterError("N must be >= 0");
  if (es.t() > 3) throw ParameterError("restriction quadrature supports at most 3 exponents");
  const double dual = static_cast<double>(p) / (p - 1);
  RestrictionResult out;
  out.p = p;
  out.N = N;
  out.exponents = es;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < trials; ++i) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(i)));
    std::map<std::int64_t, Complex> coeffs;
    for (std::int64_t n = -N; n <= N; ++n) {
      double re = unit(rng), im = unit(rng);
      coeffs[n] = {re, im};
    }
    WeightSequence g = WeightSequence::complex(N, coeffs);
    std::vector<Complex> values = complex_values(g);
    RestrictionTrial tr;
    tr.coefficient_mass = mean_value(g, 1, es, opt).raw_moment.to_double();
    tr.norm_p = std::pow(mean_value(g, s, es, opt).raw_moment.to_double(), 1.0 / p);
    double dual_power = tr.coefficient_mass;
    if (p == 2) {
      tr.pairing = tr.coefficient_mass;
      tr.norm_dual = std::sqrt(tr.coefficient_mass);
    } else {
      std::vector<std::int64_t> sides;
      for (int j = 0; j < es.t(); ++j) {
        int e = es.exponents()[static_cast<std::size_t>(j)];
        double top = std::pow(static_cast<double>(N), e);
        sides.push_back(static_cast<std::int64_t>((e % 2 ? 2 * top : top) + 1));
      }
      sides.back() = smooth_size(sides.back());
      tr.pairing = torus_power_mean(values, N, es, sides, 2.0, opt.threads);
      GridNorm norm = torus_norm_power(values, N, es, dual, tol, opt.threads);
      dual_power = norm.value;
      tr.norm_dual = std::pow(norm.value, 1.0 / dual);
      tr.quadrature_error = norm.relative_change;
    }
    tr.holder_bound = tr.norm_p * tr.norm_dual;
    tr.ratio = tr.coefficient_mass / std::pow(dual_power, 2.0 / dual);
    out.max_pairing_error =
        std::max(out.max_pairing_error, std::abs(tr.pairing - tr.coefficient_mass) / tr.coefficient_mass);
    double excess = (tr.coefficient_mass - tr.holder_bound) / tr.coefficient_mass;
    out.max_chain_excess = i == 0 ? excess : std::max(out.max_chain_excess, excess);
    out.max_quadrature_error = std::max(out.max_quadrature_error, tr.quadrature_error);
    if (i == 0 || tr.ratio > out.A_hat) {
      out.A_hat = tr.ratio;
      out.best_trial = static_cast<std::size_t>(i);
    }
    out.trials.push_back(tr);
  }
  out.K_hat_unit = strichartz_constant(p, N, es, 0, seed, opt).K_hat;
  out.duality_gap = std::abs(std::log(out.A_hat) - 2 * std::log(out.K_hat_unit));
  return out;
}

}  // namespace mcurve
