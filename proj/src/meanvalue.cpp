#include "mcurve/meanvalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mcurve/summation.hpp"

namespace mcurve {

const char* to_string(MeanValueMethod m) {
  switch (m) {
    case MeanValueMethod::automatic: return "auto";
    case MeanValueMethod::sparse: return "sparse";
    case MeanValueMethod::sliced: return "sliced";
    case MeanValueMethod::spectral: return "spectral";
  }
  return "?";
}

MeanValueMethod parse_method(const std::string& text) {
  if (text == "auto") return MeanValueMethod::automatic;
  if (text == "sparse") return MeanValueMethod::sparse;
  if (text == "sliced") return MeanValueMethod::sliced;
  if (text == "spectral") return MeanValueMethod::spectral;
  throw ParameterError("unknown mean-value method '" + text + "'");
}

namespace {

mpz_class to_mpz(u128 v) {
  mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(v >> 64)));
  mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(v)));
  return (hi << 64) + lo;
}

// Sum of |C|^2 in the natural accumulator of each scalar type.
template <class S>
struct Square;

template <>
struct Square<std::int64_t> {
  using Sum = u128;
  static void add(Sum& acc, std::int64_t v) {
    __int128 x = v;
    acc += static_cast<u128>(x * x);
  }
  static void merge(Sum& acc, const Sum& part) { acc += part; }
};

template <>
struct Square<mpz_class> {
  using Sum = mpz_class;
  static void add(Sum& acc, const mpz_class& v) { mpz_addmul(acc.get_mpz_t(), v.get_mpz_t(), v.get_mpz_t()); }
  static void merge(Sum& acc, const Sum& part) { acc += part; }
};

template <>
struct Square<Complex> {
  using Sum = CompensatedSum;
  static void add(Sum& acc, const Complex& v) { acc.add(std::norm(v)); }
  static void merge(Sum& acc, const Sum& part) { acc.add(part.value()); }
};

struct Outcome {
  mpz_class exact_sum;  // lattice scale
  double float_sum = 0.0;
  std::optional<std::uint64_t> keys;
};

template <class S>
void finish(Outcome& out, const typename Square<S>::Sum& sum) {
  if constexpr (std::is_same_v<S, std::int64_t>) out.exact_sum = to_mpz(sum);
  else if constexpr (std::is_same_v<S, mpz_class>) out.exact_sum = sum;
  else out.float_sum = sum.value();
}

template <class S>
AmplitudeMap<S> lattice_single(const std::vector<S>& values, std::int64_t N,
                               std::shared_ptr<const KeyCodec> codec, std::size_t cap) {
  KeyAccumulator<S> acc(cap, values.size());
  for (std::int64_t n = -N; n <= N; ++n) {
    const S& v = values[static_cast<std::size_t>(n + N)];
    if (!ScalarOps<S>::is_zero(v)) ScalarOps<S>::add(acc.slot(codec->pack_single(n)), v);
  }
  return AmplitudeMap<S>(std::move(codec), 1, acc.drain_sorted());
}

template <class S>
Outcome run_sparse(const AmplitudeMap<S>& single, int s, const ComputeOptions& opt) {
  AmplitudeMap<S> full = power(single, s, opt);
  typename Square<S>::Sum sum{};
  for (const auto& e : full.entries()) Square<S>::add(sum, e.value);
  Outcome out;
  finish<S>(out, sum);
  out.keys = full.size();
  return out;
}

struct Group {
  std::int64_t top;
  std::size_t begin, end;
};

template <class S>
std::vector<Group> group_by_top(const AmplitudeMap<S>& m) {
  std::vector<Group> g;
  const auto e = m.entries();
  for (std::size_t i = 0; i < e.size();) {
    std::int64_t top = m.codec().top_digit(e[i].key);
    std::size_t j = i;
    while (j < e.size() && m.codec().top_digit(e[j].key) == top) ++j;
    g.push_back({top, i, j});
    i = j;
  }
  return g;
}

// C = A * B evaluated one output top digit at a time; only one slice of C is alive.
template <class S>
Outcome run_sliced(const AmplitudeMap<S>& single, int s, const ComputeOptions& opt) {
  const int sa = (s + 1) / 2, sb = s / 2;
  AmplitudeMap<S> A = power(single, sa, opt);
  AmplitudeMap<S> B = sb > 0 ? power(single, sb, opt) : AmplitudeMap<S>::delta(single.codec_ptr());
  const KeyCodec& codec = single.codec();
  const auto ga = group_by_top(A), gb = group_by_top(B);
  Outcome out;
  if (ga.empty() || gb.empty()) {
    out.keys = 0;
    return out;
  }
  const std::int64_t max_b = gb.back().top;
  std::vector<std::int64_t> b_index(static_cast<std::size_t>(max_b + 1), -1);
  for (std::size_t i = 0; i < gb.size(); ++i) b_index[static_cast<std::size_t>(gb[i].top)] = static_cast<std::int64_t>(i);
  const std::int64_t t_max = ga.back().top + max_b;
  const u128 width = codec.top_weight();
  const bool dense = width <= (u128(1) << 24);

  const auto ea = A.entries(), eb = B.entries();
  std::vector<u128> low_a(ea.size()), low_b(eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) low_a[i] = codec.low_part(ea[i].key);
  for (std::size_t i = 0; i < eb.size(); ++i) low_b[i] = codec.low_part(eb[i].key);

  const std::size_t slices = static_cast<std::size_t>(t_max + 1);
  std::vector<typename Square<S>::Sum> slice_sum(slices);
  std::vector<std::uint64_t> slice_keys(slices, 0);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(opt.threads), slices));

  parallel_for(workers, workers, [&](std::size_t w) {
    std::vector<S> acc;
    std::vector<std::size_t> touched;
    if (dense) acc.assign(static_cast<std::size_t>(width), S(0));
    for (std::size_t T = w; T < slices; T += workers) {
      typename Square<S>::Sum sum{};
      std::uint64_t keys = 0;
      auto pairs = [&](auto&& add) {
        for (const Group& a : ga) {
          std::int64_t tb = static_cast<std::int64_t>(T) - a.top;
          if (tb < 0) break;
          if (tb > max_b || b_index[static_cast<std::size_t>(tb)] < 0) continue;
          const Group& b = gb[static_cast<std::size_t>(b_index[static_cast<std::size_t>(tb)])];
          for (std::size_t i = a.begin; i < a.end; ++i)
            for (std::size_t j = b.begin; j < b.end; ++j) add(low_a[i] + low_b[j], ea[i].value, eb[j].value);
        }
      };
      if (dense) {
        pairs([&](u128 low, const S& x, const S& y) {
          auto idx = static_cast<std::size_t>(low);
          if (ScalarOps<S>::is_zero(acc[idx])) touched.push_back(idx);
          ScalarOps<S>::add_product(acc[idx], x, y);
        });
        for (std::size_t idx : touched) {
          if (ScalarOps<S>::is_zero(acc[idx])) continue;
          Square<S>::add(sum, acc[idx]);
          ++keys;
          acc[idx] = S(0);
        }
        touched.clear();
      } else {
        KeyAccumulator<S> h(opt.entry_cap);
        pairs([&](u128 low, const S& x, const S& y) { ScalarOps<S>::add_product(h.slot(low), x, y); });
        for (const auto& e : h.drain_sorted()) {
          Square<S>::add(sum, e.value);
          ++keys;
        }
      }
      slice_sum[T] = std::move(sum);
      slice_keys[T] = keys;
    }
  });
  typename Square<S>::Sum total{};
  std::uint64_t keys = 0;
  for (std::size_t T = 0; T < slices; ++T) {
    Square<S>::merge(total, slice_sum[T]);
    keys += slice_keys[T];
  }
  finish<S>(out, total);
  out.keys = keys;
  return out;
}

// Work estimates used by the automatic method choice.
struct Estimate {
  double sparse_work = 0, sparse_peak = 0, sliced_work = 0, sliced_peak = 0;
};

double support_estimate(double stored, int f, const std::vector<double>& spans) {
  double multisets = 1;
  for (int i = 1; i <= f; ++i) multisets = multisets * (stored + i - 1) / i;
  double box = 1;
  for (double sp : spans) box *= f * sp + 1;
  return std::min(multisets, box);
}

Estimate estimate(double stored, int s, const std::vector<double>& spans) {
  Estimate e;
  auto power_cost = [&](int f, double& work, double& peak) {
    int result = 0, base = 1;
    peak = std::max(peak, support_estimate(stored, 1, spans));
    for (int r = f;;) {
      if (r & 1) {
        if (result) work += support_estimate(stored, result, spans) * support_estimate(stored, base, spans);
        result += base;
        peak = std::max(peak, support_estimate(stored, result, spans));
      }
      r >>= 1;
      if (!r) break;
      work += std::pow(support_estimate(stored, base, spans), 2);
      base *= 2;
      peak = std::max(peak, support_estimate(stored, base, spans));
    }
  };
  power_cost(s, e.sparse_work, e.sparse_peak);
  const int sa = (s + 1) / 2, sb = s / 2;
  power_cost(sa, e.sliced_work, e.sliced_peak);
  if (sb > 0) power_cost(sb, e.sliced_work, e.sliced_peak);
  e.sliced_work += support_estimate(stored, sa, spans) * (sb > 0 ? support_estimate(stored, sb, spans) : 1.0);
  return e;
}

template <class S>
Outcome run_exact(const std::vector<S>& values, std::int64_t N, int s, std::shared_ptr<const KeyCodec> codec,
                  MeanValueMethod method, const ComputeOptions& opt) {
  AmplitudeMap<S> single = lattice_single(values, N, std::move(codec), opt.entry_cap);
  return method == MeanValueMethod::sliced ? run_sliced(single, s, opt) : run_sparse(single, s, opt);
}

}  // namespace

AmplitudeMap<mpq_class> single_factor_map(const WeightSequence& w, const ExponentSet& es, int max_factors) {
  if (!w.exact()) throw ParameterError("single_factor_map: use single_factor_map_complex for float weights");
  std::vector<mpq_class> values(static_cast<std::size_t>(2 * w.N() + 1), mpq_class(0));
  for (auto n : w.indices()) values[static_cast<std::size_t>(n + w.N())] = w.rational(n);
  return lattice_single(values, w.N(), std::make_shared<const KeyCodec>(es, w.N(), max_factors), kDefaultEntryCap);
}

AmplitudeMap<Complex> single_factor_map_complex(const WeightSequence& w, const ExponentSet& es, int max_factors) {
  return lattice_single(complex_values(w), w.N(), std::make_shared<const KeyCodec>(es, w.N(), max_factors),
                        kDefaultEntryCap);
}

MeanValueResult mean_value(const WeightSequence& w, int s, const ExponentSet& es, const MeanValueOptions& opt) {
  if (s < 1) throw ParameterError("s must be >= 1");
  const std::int64_t N = w.N();
  MeanValueResult r;
  r.s = s;
  r.exponents = es;
  r.N = N;
  r.mode = w.mode();

  std::shared_ptr<const KeyCodec> codec;
  std::string codec_error;
  try {
    codec = std::make_shared<const KeyCodec>(es, N, s);
  } catch (const ParameterError& e) {
    codec_error = e.what();
  }

  MeanValueMethod method = opt.method;
  if (method == MeanValueMethod::automatic) {
    if (!codec) {
      method = MeanValueMethod::spectral;
    } else {
      std::vector<double> spans;
      for (int j = 0; j < es.t(); ++j) spans.push_back(static_cast<double>(codec->span(j)));
      Estimate e = estimate(static_cast<double>(w.stored_count()), s, spans);
      const double cap = static_cast<double>(opt.entry_cap);
      bool sparse_ok = e.sparse_peak <= cap, sliced_ok = e.sliced_peak <= cap;
      double best = std::numeric_limits<double>::infinity();
      if (sparse_ok) best = e.sparse_work, method = MeanValueMethod::sparse;
      if (sliced_ok && e.sliced_work < best) best = e.sliced_work, method = MeanValueMethod::sliced;
      if (best > opt.exact_work_budget && es.t() <= 3) method = MeanValueMethod::spectral;
      if (!w.exact() && es.t() <= 3) {
        double points = 1;
        for (double sp : spans) points *= s * sp + 1;
        if (points <= 1e9 && 4 * points < best) method = MeanValueMethod::spectral;
      }
      if (method == MeanValueMethod::automatic)
        throw ResourceError("no mean-value method fits the entry cap " + std::to_string(opt.entry_cap));
    }
  }
  r.method = method;
  if (method != MeanValueMethod::spectral && !codec) throw ParameterError(codec_error);

  const Rho rh = rho(w);
  if (method == MeanValueMethod::spectral) {
    double raw = spectral_moment(complex_values(w), N, s, es, opt.threads);
    r.raw_moment = Number(raw);
    r.normalized = Number(raw / std::pow(rh.squared.to_double(), s));
    r.exact = false;
    return r;
  }

  if (w.exact()) {
    ExactLattice lat = exact_lattice(w);
    mpz_class l1 = 0, l2 = 0;
    for (const auto& v : lat.numerators) {
      l1 += abs(v);
      l2 += v * v;
    }
    mpz_class bound;
    mpz_pow_ui(bound.get_mpz_t(), l1.get_mpz_t(), static_cast<unsigned long>(s));
    Outcome o;
    if (bound < (mpz_class(1) << 62)) {
      std::vector<std::int64_t> v(lat.numerators.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = lat.numerators[i].get_si();
      o = run_exact(v, N, s, codec, method, opt);
    } else {
      o = run_exact(lat.numerators, N, s, codec, method, opt);
    }
    mpz_class den;
    mpz_pow_ui(den.get_mpz_t(), lat.denominator.get_mpz_t(), static_cast<unsigned long>(2 * s));
    r.raw_moment = Number(mpq_class(o.exact_sum, den));
    if (sgn(l2) == 0) {
      r.normalized = Number(mpq_class(0));
    } else {
      mpz_class rho_pow;
      mpz_pow_ui(rho_pow.get_mpz_t(), l2.get_mpz_t(), static_cast<unsigned long>(s));
      r.normalized = Number(mpq_class(o.exact_sum, rho_pow));
    }
    r.distinct_keys = o.keys;
    return r;
  }

  Outcome o = run_exact(complex_values(w), N, s, codec, method, opt);
  r.raw_moment = Number(o.float_sum);
  r.normalized = Number(o.float_sum / std::pow(rh.squared.to_double(), s));
  r.distinct_keys = o.keys;
  r.exact = false;
  return r;
}

MeanValueResult brute_force_mean_value(const WeightSequence& w, int s, const ExponentSet& es,
                                       double enumeration_cap) {
  if (s < 1) throw ParameterError("s must be >= 1");
  const std::int64_t N = w.N();
  const double count = std::pow(static_cast<double>(2 * N + 1), 2 * s);
  if (count > enumeration_cap)
    throw ResourceError("brute force needs " + format_double(count) + " tuples, cap " + format_double(enumeration_cap));
  const int t = es.t();
  const std::vector<std::int64_t> support = w.indices();
  const std::size_t m = support.size();
  std::vector<std::vector<std::int64_t>> pw(m, std::vector<std::int64_t>(static_cast<std::size_t>(t)));
  for (std::size_t i = 0; i < m; ++i)
    for (int j = 0; j < t; ++j) {
      pw[i][static_cast<std::size_t>(j)] = checked_power(support[i], es.exponents()[static_cast<std::size_t>(j)]);
      if (std::abs(static_cast<double>(pw[i][static_cast<std::size_t>(j)])) * 2 * s > 4e18)
        throw ParameterError("brute force: power sums overflow 64 bits");
    }

  MeanValueResult r;
  r.s = s;
  r.exponents = es;
  r.N = N;
  r.mode = w.mode();
  r.method = MeanValueMethod::sparse;

  // Odometer over 2s indices into `support`: positions < s are x, the rest are y.
  const int len = 2 * s;
  std::vector<std::size_t> pos(static_cast<std::size_t>(len), 0);
  std::vector<std::vector<std::int64_t>> partial(static_cast<std::size_t>(len + 1), std::vector<std::int64_t>(static_cast<std::size_t>(t), 0));
  mpq_class exact_sum = 0;
  CompensatedComplexSum float_sum;
  std::map<std::vector<std::int64_t>, Amplitude> x_keys;

  if (m > 0) {
    auto refresh = [&](int from) {
      for (int d = from; d < len; ++d) {
        const auto& p = pw[pos[static_cast<std::size_t>(d)]];
        for (int j = 0; j < t; ++j) {
          auto jj = static_cast<std::size_t>(j);
          partial[static_cast<std::size_t>(d + 1)][jj] = partial[static_cast<std::size_t>(d)][jj] + (d < s ? p[jj] : -p[jj]);
        }
      }
    };
    refresh(0);
    for (;;) {
      const auto& fin = partial[static_cast<std::size_t>(len)];
      if (std::all_of(fin.begin(), fin.end(), [](std::int64_t v) { return v == 0; })) {
        if (w.exact()) {
          mpq_class prod = 1;
          for (int d = 0; d < len; ++d) prod *= w.rational(support[pos[static_cast<std::size_t>(d)]]);
          exact_sum += prod;
        } else {
          Complex prod = 1;
          for (int d = 0; d < len; ++d) {
            Complex a = w.complex_value(support[pos[static_cast<std::size_t>(d)]]);
            prod *= d < s ? a : std::conj(a);
          }
          float_sum.add(prod);
        }
      }
      int d = len - 1;
      while (d >= 0 && ++pos[static_cast<std::size_t>(d)] == m) pos[static_cast<std::size_t>(d--)] = 0;
      if (d < 0) break;
      refresh(d);
    }
    // Support of the s-fold product: distinct x-tuple keys with nonzero total amplitude.
    std::vector<std::size_t> xp(static_cast<std::size_t>(s), 0);
    for (;;) {
      std::vector<std::int64_t> key(static_cast<std::size_t>(t), 0);
      Amplitude prod = w.exact() ? Amplitude(mpz_class(1)) : Amplitude(Complex(1.0));
      for (int d = 0; d < s; ++d) {
        for (int j = 0; j < t; ++j) key[static_cast<std::size_t>(j)] += pw[xp[static_cast<std::size_t>(d)]][static_cast<std::size_t>(j)];
        prod = prod * w[support[xp[static_cast<std::size_t>(d)]]];
      }
      auto it = x_keys.find(key);
      if (it == x_keys.end()) x_keys.emplace(std::move(key), prod);
      else it->second = it->second + prod;
      int d = s - 1;
      while (d >= 0 && ++xp[static_cast<std::size_t>(d)] == m) xp[static_cast<std::size_t>(d--)] = 0;
      if (d < 0) break;
    }
  }
  std::uint64_t keys = 0;
  for (const auto& kv : x_keys) keys += kv.second.is_zero() ? 0 : 1;
  r.distinct_keys = keys;

  const Rho rh = rho(w);
  if (w.exact()) {
    r.raw_moment = Number(exact_sum);
    r.normalized = w.all_zero() ? Number(mpq_class(0)) : Number(exact_sum) / pow(rh.squared, static_cast<unsigned>(s));
  } else {
    double raw = float_sum.value().real();
    r.raw_moment = Number(raw);
    r.normalized = Number(raw / std::pow(rh.squared.to_double(), s));
    r.exact = false;
  }
  return r;
}

LowerBoundWitness lower_bound_witness(std::int64_t N, int s, int k) {
  if (N < 0 || s < 1 || k < 1) throw ParameterError("lower_bound_witness needs N >= 0, s >= 1, k >= 1");
  LowerBoundWitness out;
  mpz_class base = 2 * N + 1;
  mpz_pow_ui(out.diagonal_count.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(s));
  mpz_class all = out.diagonal_count * out.diagonal_count;
  mpz_class box = 1;
  for (int j = 1; j <= k; ++j) {
    mpz_class nj;
    mpz_pow_ui(nj.get_mpz_t(), mpz_class(static_cast<long>(N)).get_mpz_t(), static_cast<unsigned long>(j));
    box *= 2 * s * nj + 1;
  }
  mpz_fdiv_q(out.box_bound.get_mpz_t(), all.get_mpz_t(), box.get_mpz_t());
  return out;
}

NewtonCheck newton_regime_check(const WeightSequence& w, int s, int k, const MeanValueOptions& opt) {
  if (s < 1 || s > k) throw ParameterError("newton_regime_check needs 1 <= s <= k");
  NewtonCheck out;
  MeanValueResult mv = mean_value(w, s, ExponentSet::full(k), opt);
  out.raw_moment = mv.raw_moment;

  const std::vector<std::int64_t> support = w.indices();
  const std::size_t m = support.size();
  mpz_class s_fact;
  mpz_fac_ui(s_fact.get_mpz_t(), static_cast<unsigned long>(s));
  mpq_class exact_sum = 0;
  CompensatedSum float_sum;
  if (m > 0) {
    // Nondecreasing s-tuples of support positions.
    std::vector<std::size_t> idx(static_cast<std::size_t>(s), 0);
    for (;;) {
      mpz_class orderings = s_fact;
      for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && idx[j] == idx[i]) ++j;
        mpz_class f;
        mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(j - i));
        orderings /= f;
        i = j;
      }
      if (w.exact()) {
        mpq_class a = orderings;
        for (auto i : idx) a *= w.rational(support[i]);
        exact_sum += a * a;
      } else {
        Complex a = orderings.get_d();
        for (auto i : idx) a *= w.complex_value(support[i]);
        float_sum.add(std::norm(a));
      }
      int d = s - 1;
      while (d >= 0 && idx[static_cast<std::size_t>(d)] == m - 1) --d;
      if (d < 0) break;
      ++idx[static_cast<std::size_t>(d)];
      for (int e = d + 1; e < s; ++e) idx[static_cast<std::size_t>(e)] = idx[static_cast<std::size_t>(d)];
    }
  }
  if (w.exact() && mv.exact) {
    out.multiset_sum = Number(exact_sum);
    out.holds = out.raw_moment == out.multiset_sum;
  } else {
    double ref = w.exact() ? exact_sum.get_d() : float_sum.value();
    out.multiset_sum = Number(ref);
    double raw = mv.raw_moment.to_double();
    out.holds = std::abs(raw - ref) <= 1e-10 * std::max(1.0, std::abs(ref));
  }
  return out;
}

}  // namespace mcurve
