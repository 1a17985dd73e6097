#include "mcurve/congruencing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "mcurve/summation.hpp"

namespace mcurve {

Theta parse_theta(const std::string& text) {
  Theta t;
  try {
    mpq_class q(text);
    q.canonicalize();
    if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p()) throw std::invalid_argument(text);
    t.p = q.get_num().get_si();
    t.q = q.get_den().get_si();
  } catch (const std::invalid_argument&) {
    throw ParameterError("theta must be a rational p/q, got '" + text + "'");
  }
  if (t.p <= 0 || t.p >= t.q) throw ParameterError("theta must lie strictly between 0 and 1 (M = X^theta < X)");
  return t;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i)
    if (__builtin_mul_overflow(r, base, &r)) throw ParameterError("prime power overflows 64 bits");
  return r;
}

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  for (a %= m; e; e >>= 1, a = mulmod(a, a, m))
    if (e & 1) r = mulmod(r, a, m);
  return r;
}

}  // namespace

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  // Deterministic Miller-Rabin for 64-bit n.
  auto u = static_cast<std::uint64_t>(n);
  std::uint64_t d = u - 1;
  int r = 0;
  while (!(d & 1)) d >>= 1, ++r;
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, u);
    if (x == 1 || x == u - 1) continue;
    bool composite = true;
    for (int i = 1; i < r && composite; ++i) {
      x = mulmod(x, x, u);
      if (x == u - 1) composite = false;
    }
    if (composite) return false;
  }
  return true;
}

PrimeSelection select_prime(std::int64_t X, Theta theta, int k, std::size_t candidate_cap) {
  if (X < 2) throw ParameterError("X must be >= 2");
  if (k < 1) throw ParameterError("k must be >= 1");
  if (theta.p <= 0 || theta.p >= theta.q) throw ParameterError("theta must lie strictly between 0 and 1");
  // floor(k^3 / theta) + 1 = floor(k^3 q / p) + 1
  mpz_class count = mpz_class(k) * k * k * theta.q / theta.p + 1;
  if (count > static_cast<unsigned long>(candidate_cap))
    throw ParameterError("candidate set of " + count.get_str() + " primes exceeds cap " + std::to_string(candidate_cap));
  PrimeSelection out;
  out.M = std::pow(static_cast<double>(X), theta.value());
  // l > M  <=>  l^q > X^p; start from floor(X^{p/q}) + 1.
  mpz_class xp, root;
  mpz_pow_ui(xp.get_mpz_t(), mpz_class(static_cast<long>(X)).get_mpz_t(), static_cast<unsigned long>(theta.p));
  mpz_root(root.get_mpz_t(), xp.get_mpz_t(), static_cast<unsigned long>(theta.q));
  if (!root.fits_slong_p()) throw ParameterError("M too large");
  std::int64_t l = root.get_si() + 1;
  const auto wanted = count.get_ui();
  while (out.candidates.size() < wanted) {
    if (is_prime(l)) out.candidates.push_back(l);
    ++l;
  }
  out.prime = out.candidates.front();
  mpz_class mx, lhs, rhs;
  mpz_pow_ui(lhs.get_mpz_t(), mpz_class(static_cast<long>(out.candidates.back())).get_mpz_t(), static_cast<unsigned long>(theta.q));
  mpz_pow_ui(rhs.get_mpz_t(), mpz_class(2).get_mpz_t(), static_cast<unsigned long>(theta.q));
  rhs *= xp;
  if (lhs > rhs) {
    out.warning = true;
    out.message = "largest candidate " + std::to_string(out.candidates.back()) + " exceeds 2M = " + format_double(2 * out.M);
  }
  return out;
}

Number CongruenceProfile::total() const {
  Number sum(mpq_class(0));
  for (const auto& e : energies) sum = sum + e;
  return sum;
}

CongruenceProfile class_profile(const WeightSequence& w, std::int64_t prime, int c) {
  if (prime < 1) throw ParameterError("modulus base must be >= 1");
  if (c < 0) throw ParameterError("level must be >= 0");
  const std::int64_t mod = ipow(prime, c);
  if (mod > 100'000'000) throw ResourceError("prime^c = " + std::to_string(mod) + " classes exceeds 1e8");
  CongruenceProfile p;
  p.prime = prime;
  p.level = c;
  p.X = w.N();
  const auto size = static_cast<std::size_t>(mod);
  if (w.exact()) {
    std::vector<mpq_class> e(size, mpq_class(0));
    for (auto n : w.indices()) {
      mpq_class q = w.rational(n);
      // class xi in [1, mod]: xi = ((n - 1) mod mod) + 1
      e[static_cast<std::size_t>(floor_mod(n - 1, mod))] += q * q;
    }
    for (auto& v : e) p.energies.emplace_back(std::move(v));
  } else {
    std::vector<CompensatedSum> e(size);
    for (auto n : w.indices()) e[static_cast<std::size_t>(floor_mod(n - 1, mod))].add(std::norm(w.complex_value(n)));
    for (auto& v : e) p.energies.emplace_back(v.value());
  }
  return p;
}

std::vector<std::int64_t> class_lifts(std::int64_t prime, int c, std::int64_t xi) {
  const std::int64_t mod = ipow(prime, c);
  const std::int64_t base = floor_mod(xi - 1, mod) + 1;
  std::vector<std::int64_t> out;
  for (std::int64_t t = 0; t < prime; ++t) out.push_back(base + t * mod);
  return out;
}

WellConditionedTuples well_conditioned_tuples(std::int64_t prime, int c, std::int64_t xi, int k) {
  if (!is_prime(prime)) throw ParameterError(std::to_string(prime) + " is not prime");
  if (k < 1) throw ParameterError("k must be >= 1");
  WellConditionedTuples out{prime, c, xi, {}};
  if (prime < k) return out;
  const auto lifts = class_lifts(prime, c, xi);
  std::vector<std::int64_t> cur;
  std::vector<bool> used(lifts.size(), false);
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == k) {
      out.tuples.push_back(cur);
      return;
    }
    for (std::size_t i = 0; i < lifts.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      cur.push_back(lifts[i]);
      rec();
      cur.pop_back();
      used[i] = false;
    }
  };
  rec();
  return out;
}

mpz_class xi_count_formula(std::int64_t prime, int k) {
  mpz_class r = 1;
  for (int i = 0; i < k; ++i) r *= std::max<std::int64_t>(0, prime - i);
  return r;
}

namespace {

template <class S>
AmplitudeMap<S> class_map(const std::vector<S>& values, std::int64_t X, std::int64_t mod, std::int64_t residue,
                          const std::shared_ptr<const KeyCodec>& codec, std::size_t cap) {
  KeyAccumulator<S> acc(cap, values.size());
  const std::int64_t r = floor_mod(residue, mod);
  for (std::int64_t n = -X; n <= X; ++n) {
    const S& v = values[static_cast<std::size_t>(n + X)];
    if (floor_mod(n, mod) == r && !ScalarOps<S>::is_zero(v)) ScalarOps<S>::add(acc.slot(codec->pack_single(n)), v);
  }
  return AmplitudeMap<S>(codec, 1, acc.drain_sorted());
}

template <class S>
AmplitudeMap<S> conditioned(const std::vector<S>& values, std::int64_t X, std::int64_t prime, int c, std::int64_t xi,
                            int k, const std::shared_ptr<const KeyCodec>& codec, const ComputeOptions& opt) {
  if (!is_prime(prime)) throw ParameterError(std::to_string(prime) + " is not prime");
  if (prime < k) return AmplitudeMap<S>(codec, k, {});
  const auto lifts = class_lifts(prime, c, xi);
  const std::int64_t mod = ipow(prime, c + 1);
  std::vector<AmplitudeMap<S>> g;
  for (auto l : lifts) g.push_back(class_map(values, X, mod, l, codec, opt.entry_cap));
  KeyAccumulator<S> total(opt.entry_cap);
  std::vector<bool> used(lifts.size(), false);
  // Lexicographic over ordered tuples; partial products are shared by common prefixes.
  std::function<void(int, const AmplitudeMap<S>*)> rec = [&](int depth, const AmplitudeMap<S>* partial) {
    if (depth == k) {
      for (const auto& e : partial->entries()) ScalarOps<S>::add(total.slot(e.key), e.value);
      return;
    }
    for (std::size_t i = 0; i < lifts.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      if (depth == 0) {
        rec(1, &g[i]);
      } else if (!partial->empty() && !g[i].empty()) {
        AmplitudeMap<S> next = convolve(*partial, g[i], opt);
        rec(depth + 1, &next);
      }
      used[i] = false;
    }
  };
  rec(0, nullptr);
  return AmplitudeMap<S>(codec, k, total.drain_sorted());
}

// Lattice view of the weights: exact numerators over one denominator, or complex values.
struct Lattice {
  bool exact;
  std::vector<mpz_class> num;
  std::vector<Complex> cv;
  std::int64_t X;

  explicit Lattice(const WeightSequence& w) : exact(w.exact()), X(w.N()) {
    if (exact) num = exact_lattice(w).numerators;
    else cv = complex_values(w);
  }

  Number energy(std::int64_t mod, std::int64_t residue) const {
    const std::int64_t r = floor_mod(residue, mod);
    if (exact) {
      mpz_class e = 0;
      for (std::int64_t n = -X; n <= X; ++n)
        if (floor_mod(n, mod) == r) e += num[static_cast<std::size_t>(n + X)] * num[static_cast<std::size_t>(n + X)];
      return Number(e);
    }
    CompensatedSum e;
    for (std::int64_t n = -X; n <= X; ++n)
      if (floor_mod(n, mod) == r) e.add(std::norm(cv[static_cast<std::size_t>(n + X)]));
    return Number(e.value());
  }
};

Number sum_squares(const AmplitudeMap<mpz_class>& m) {
  mpz_class s = 0;
  for (const auto& e : m.entries()) mpz_addmul(s.get_mpz_t(), e.value.get_mpz_t(), e.value.get_mpz_t());
  return Number(s);
}

Number sum_squares(const AmplitudeMap<Complex>& m) {
  CompensatedSum s;
  for (const auto& e : m.entries()) s.add(std::norm(e.value));
  return Number(s.value());
}

void check_levels(std::int64_t prime, int a, int b, int k, int order) {
  if (!is_prime(prime)) throw ParameterError(std::to_string(prime) + " is not prime");
  if (a < 0 || b < a) throw ParameterError("levels must satisfy 0 <= a <= b");
  if (k < 1 || order < 1) throw ParameterError("k and s (or u) must be >= 1");
}

// Right-hand factor for one eta: power(f_b(eta), s) for I or power(F_b(eta), u) for K.
template <class S>
AmplitudeMap<S> right_factor(MixedKind kind, const std::vector<S>& v, std::int64_t X, std::int64_t prime, int b,
                             std::int64_t eta, int order, int k, const std::shared_ptr<const KeyCodec>& codec,
                             const ComputeOptions& opt) {
  AmplitudeMap<S> base = kind == MixedKind::I ? class_map(v, X, ipow(prime, b), eta, codec, opt.entry_cap)
                                              : conditioned(v, X, prime, b, eta, k, codec, opt);
  if (base.empty()) return AmplitudeMap<S>(codec, base.factor_count() * order, {});
  return power(base, order, opt);
}

template <class S>
MixedMomentResult combine(const AmplitudeMap<S>& Fa, const AmplitudeMap<S>& G, const Number& Ea, const Number& Eb,
                          int k, int s, const Number& den_pow, const ComputeOptions& opt) {
  MixedMomentResult r;
  r.k = k;
  r.s = s;
  if (Fa.empty() || G.empty() || Ea.is_zero() || Eb.is_zero()) {
    r.raw = Ea.exact() ? Number(mpq_class(0)) : Number(0.0);
    r.value = r.raw;
    r.distinct_keys = 0;
    return r;
  }
  AmplitudeMap<S> C = convolve(Fa, G, opt);
  Number sq = sum_squares(C);
  r.raw = sq / den_pow;
  r.value = sq / (pow(Ea, static_cast<unsigned>(k)) * pow(Eb, static_cast<unsigned>(s)));
  r.distinct_keys = C.size();
  return r;
}

struct MomentSetup {
  Lattice lat;
  Number den_pow;
  std::shared_ptr<const KeyCodec> codec;
};

MomentSetup setup(const WeightSequence& w, int k, int s) {
  MomentSetup m{Lattice(w), Number(1.0), std::make_shared<const KeyCodec>(ExponentSet::full(k), w.N(), k + s)};
  if (w.exact()) {
    mpz_class d = exact_lattice(w).denominator, dp;
    mpz_pow_ui(dp.get_mpz_t(), d.get_mpz_t(), static_cast<unsigned long>(2 * (k + s)));
    m.den_pow = Number(dp);
  }
  return m;
}

template <class S>
const std::vector<S>& values_of(const Lattice& l) {
  if constexpr (std::is_same_v<S, mpz_class>) return l.num;
  else return l.cv;
}

template <class S>
MixedMomentResult mixed_single(MixedKind kind, const MomentSetup& m, std::int64_t prime, int a, int b,
                               std::int64_t xi, std::int64_t eta, int order, int k, const ComputeOptions& opt) {
  const int s = kind == MixedKind::I ? order : order * k;
  const auto& v = values_of<S>(m.lat);
  AmplitudeMap<S> Fa = conditioned(v, m.lat.X, prime, a, xi, k, m.codec, opt);
  AmplitudeMap<S> G = right_factor(kind, v, m.lat.X, prime, b, eta, order, k, m.codec, opt);
  Number Ea = m.lat.energy(ipow(prime, a), xi), Eb = m.lat.energy(ipow(prime, b), eta);
  return combine(Fa, G, Ea, Eb, k, s, m.den_pow, opt);
}

MixedMomentResult mixed(MixedKind kind, const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi,
                        std::int64_t eta, int order, int k, const ComputeOptions& opt) {
  check_levels(prime, a, b, k, order);
  const int s = kind == MixedKind::I ? order : order * k;
  MomentSetup m = setup(w, k, s);
  MixedMomentResult r = w.exact() ? mixed_single<mpz_class>(kind, m, prime, a, b, xi, eta, order, k, opt)
                                  : mixed_single<Complex>(kind, m, prime, a, b, xi, eta, order, k, opt);
  r.prime = prime;
  r.a = a;
  r.b = b;
  r.xi = floor_mod(xi - 1, ipow(prime, a)) + 1;
  r.eta = floor_mod(eta - 1, ipow(prime, b)) + 1;
  return r;
}

}  // namespace

AmplitudeMap<mpq_class> conditioned_amplitude(const WeightSequence& w, std::int64_t prime, int c, std::int64_t xi,
                                              int k, const ComputeOptions& opt) {
  if (!w.exact()) throw ParameterError("conditioned_amplitude: exact weights required");
  std::vector<mpq_class> v(static_cast<std::size_t>(2 * w.N() + 1), mpq_class(0));
  for (auto n : w.indices()) v[static_cast<std::size_t>(n + w.N())] = w.rational(n);
  auto codec = std::make_shared<const KeyCodec>(ExponentSet::full(k), w.N(), k);
  return conditioned(v, w.N(), prime, c, xi, k, codec, opt);
}

MixedMomentResult mixed_moment_I(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi,
                                 std::int64_t eta, int s, int k, const ComputeOptions& opt) {
  return mixed(MixedKind::I, w, prime, a, b, xi, eta, s, k, opt);
}

MixedMomentResult mixed_moment_K(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi,
                                 std::int64_t eta, int u, int k, const ComputeOptions& opt) {
  return mixed(MixedKind::K, w, prime, a, b, xi, eta, u, k, opt);
}

double bracket_scale(std::int64_t X, double M, int a, int b, int s, int k) {
  const double x = static_cast<double>(X);
  return std::pow(x / std::pow(M, a), k - k * (k + 1) / 2.0) * std::pow(x / std::pow(M, b), s);
}

namespace {

template <class S>
AggregateResult aggregate_impl(MixedKind kind, const WeightSequence& w, std::int64_t prime, int a, int b, int order,
                               int k, const ComputeOptions& opt) {
  const int s = kind == MixedKind::I ? order : order * k;
  MomentSetup m = setup(w, k, s);
  const auto& v = values_of<S>(m.lat);
  const std::int64_t qa = ipow(prime, a), qb = ipow(prime, b);
  if (static_cast<double>(qa) * static_cast<double>(qb) > 1e6) throw ResourceError("too many (xi, eta) class pairs");
  ComputeOptions inner = opt;
  inner.threads = 1;
  std::vector<AmplitudeMap<S>> F(static_cast<std::size_t>(qa), AmplitudeMap<S>(m.codec, k, {}));
  std::vector<AmplitudeMap<S>> G(static_cast<std::size_t>(qb), AmplitudeMap<S>(m.codec, s, {}));
  parallel_for(static_cast<std::size_t>(qa), opt.threads, [&](std::size_t i) {
    F[i] = conditioned(v, m.lat.X, prime, a, static_cast<std::int64_t>(i) + 1, k, m.codec, inner);
  });
  parallel_for(static_cast<std::size_t>(qb), opt.threads, [&](std::size_t j) {
    G[j] = right_factor(kind, v, m.lat.X, prime, b, static_cast<std::int64_t>(j) + 1, order, k, m.codec, inner);
  });
  std::vector<Number> Ea, Eb;
  for (std::int64_t xi = 1; xi <= qa; ++xi) Ea.push_back(m.lat.energy(qa, xi));
  for (std::int64_t eta = 1; eta <= qb; ++eta) Eb.push_back(m.lat.energy(qb, eta));

  AggregateResult out;
  out.kind = kind;
  out.terms.resize(static_cast<std::size_t>(qa * qb));
  parallel_for(out.terms.size(), opt.threads, [&](std::size_t idx) {
    std::size_t i = idx / static_cast<std::size_t>(qb), j = idx % static_cast<std::size_t>(qb);
    MixedMomentResult r = combine(F[i], G[j], Ea[i], Eb[j], k, s, m.den_pow, inner);
    r.prime = prime;
    r.a = a;
    r.b = b;
    r.xi = static_cast<std::int64_t>(i) + 1;
    r.eta = static_cast<std::int64_t>(j) + 1;
    out.terms[idx] = std::move(r);
  });
  Number total = w.exact() ? Number(mpq_class(0)) : Number(0.0);
  Number wsum = total;
  Number rho0 = m.lat.energy(1, 0);
  for (std::size_t idx = 0; idx < out.terms.size(); ++idx) {
    std::size_t i = idx / static_cast<std::size_t>(qb), j = idx % static_cast<std::size_t>(qb);
    Number weight = Ea[i] * Eb[j];
    wsum = wsum + weight;
    total = total + weight * out.terms[idx].value;
  }
  if (rho0.is_zero()) {
    out.value = total;
    out.weight_sum = wsum;
  } else {
    Number r4 = rho0 * rho0;
    out.value = total / r4;
    out.weight_sum = wsum / r4;
  }
  return out;
}

}  // namespace

AggregateResult aggregate(MixedKind kind, const WeightSequence& w, std::int64_t prime, int a, int b, int order, int k,
                          std::optional<Theta> theta, const ComputeOptions& opt) {
  check_levels(prime, a, b, k, order);
  AggregateResult out = w.exact() ? aggregate_impl<mpz_class>(kind, w, prime, a, b, order, k, opt)
                                  : aggregate_impl<Complex>(kind, w, prime, a, b, order, k, opt);
  if (theta && a < b) {
    const int s = kind == MixedKind::I ? order : order * k;
    out.M = std::pow(static_cast<double>(w.N()), theta->value());
    out.bracket = out.value.to_double() / bracket_scale(w.N(), *out.M, a, b, s, k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Congruence boxes

namespace {

std::int64_t mod_pow(std::int64_t base, int e, std::int64_t mod) {
  __int128 r = 1 % mod, b = floor_mod(base, mod);
  for (int i = 0; i < e; ++i) r = r * b % mod;
  return static_cast<std::int64_t>(r);
}

struct BoxSpace {
  std::int64_t prime;
  int a, b, k;
  std::int64_t range;                  // prime^{kb}
  std::vector<std::int64_t> moduli;    // prime^{jb}
  std::int64_t lift_mod;               // prime^{a+1}

  BoxSpace(std::int64_t p, int a_, int b_, int k_, double cap) : prime(p), a(a_), b(b_), k(k_) {
    if (!is_prime(p)) throw ParameterError(std::to_string(p) + " is not prime");
    if (a < 0 || b <= a) throw ParameterError("levels must satisfy 0 <= a < b");
    if (k < 1) throw ParameterError("k must be >= 1");
    range = ipow(p, k * b);
    if (std::pow(static_cast<double>(range), k) > cap)
      throw ResourceError("congruence box enumeration of " + format_double(std::pow(static_cast<double>(range), k)) +
                          " tuples exceeds cap " + format_double(cap));
    for (int j = 1; j <= k; ++j) moduli.push_back(ipow(p, j * b));
    lift_mod = ipow(p, a + 1);
  }

  // Visits every z in [1, range]^k with z_i == xi (mod prime^a), pairwise distinct mod prime^{a+1}.
  template <class Visit>
  void for_each(std::int64_t xi, Visit&& visit) const {
    const std::int64_t qa = ipow(prime, a);
    std::vector<std::int64_t> cand;
    for (std::int64_t z = 1; z <= range; ++z)
      if (floor_mod(z - xi, qa) == 0) cand.push_back(z);
    std::vector<std::int64_t> z(static_cast<std::size_t>(k));
    std::function<void(int)> rec = [&](int d) {
      if (d == k) {
        visit(z);
        return;
      }
      for (auto c : cand) {
        bool clash = false;
        for (int i = 0; i < d && !clash; ++i) clash = floor_mod(z[static_cast<std::size_t>(i)] - c, lift_mod) == 0;
        if (clash) continue;
        z[static_cast<std::size_t>(d)] = c;
        rec(d + 1);
      }
    };
    rec(0);
  }

  std::vector<std::int64_t> residues(const std::vector<std::int64_t>& z, std::int64_t eta) const {
    std::vector<std::int64_t> m(static_cast<std::size_t>(k), 0);
    for (int j = 1; j <= k; ++j) {
      std::int64_t mod = moduli[static_cast<std::size_t>(j - 1)];
      __int128 acc = 0;
      for (auto zi : z) acc += mod_pow(zi - eta, j, mod);
      m[static_cast<std::size_t>(j - 1)] = static_cast<std::int64_t>(acc % mod);
    }
    return m;
  }
};

}  // namespace

CongruenceBox enumerate_congruence_box(std::int64_t prime, int a, int b, std::int64_t xi, std::int64_t eta,
                                       const std::vector<std::int64_t>& m, int k, double cap) {
  BoxSpace space(prime, a, b, k, cap);
  if (static_cast<int>(m.size()) != k) throw ParameterError("target vector m must have k entries");
  CongruenceBox box{prime, a, b, k, xi, eta, {}, {}};
  for (int j = 0; j < k; ++j) box.m.push_back(floor_mod(m[static_cast<std::size_t>(j)], space.moduli[static_cast<std::size_t>(j)]));
  space.for_each(xi, [&](const std::vector<std::int64_t>& z) {
    if (space.residues(z, eta) == box.m) box.solutions.push_back(z);
  });
  return box;
}

mpz_class lemma51_bound(std::int64_t prime, int a, int b, int k) {
  mpz_class f, p;
  mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(k));
  mpz_pow_ui(p.get_mpz_t(), mpz_class(static_cast<long>(prime)).get_mpz_t(),
             static_cast<unsigned long>(k * (k - 1) * (a + b) / 2));
  return f * p;
}

Lemma51Audit lemma51_audit(std::int64_t prime, int a, int b, int k, double cap) {
  BoxSpace space(prime, a, b, k, cap);
  Lemma51Audit out;
  out.prime = prime;
  out.a = a;
  out.b = b;
  out.k = k;
  out.bound = lemma51_bound(prime, a, b, k);
  const std::int64_t qa = ipow(prime, a), qb = ipow(prime, b);
  for (std::int64_t xi = 1; xi <= qa; ++xi)
    for (std::int64_t eta = 1; eta <= qb; ++eta) {
      std::map<std::vector<std::int64_t>, std::uint64_t> count;
      space.for_each(xi, [&](const std::vector<std::int64_t>& z) { ++count[space.residues(z, eta)]; });
      out.boxes += count.size();
      for (const auto& [m, c] : count)
        if (c > out.max_cardinality) {
          out.max_cardinality = c;
          out.argmax_xi = xi;
          out.argmax_eta = eta;
          out.argmax_m = m;
        }
    }
  out.pass = mpz_class(static_cast<unsigned long>(out.max_cardinality)) <= out.bound;
  return out;
}

// ---------------------------------------------------------------------------
// T-split

TSplit audit_T_split(const WeightSequence& w, std::int64_t prime, int a, int b, std::int64_t xi, std::int64_t eta,
                     int s, int k, double cap, const ComputeOptions& opt) {
  if (!w.exact()) throw ParameterError("audit_T_split: exact weights required");
  check_levels(prime, a, b, k, s);
  const std::int64_t X = w.N();
  const std::int64_t qa = ipow(prime, a), qa1 = ipow(prime, a + 1), qb = ipow(prime, b), qb1 = ipow(prime, b + 1);
  std::vector<std::int64_t> xs, vs;
  for (std::int64_t n = -X; n <= X; ++n) {
    if (!w.is_stored(n) || sgn(w.rational(n)) == 0) continue;
    if (floor_mod(n - xi, qa) == 0) xs.push_back(n);
    if (floor_mod(n - eta, qb) == 0) vs.push_back(n);
  }
  if (std::pow(static_cast<double>(xs.size()), k) > cap || std::pow(static_cast<double>(vs.size()), s) > cap)
    throw ResourceError("T-split enumeration exceeds cap " + format_double(cap));

  using Key = std::vector<std::int64_t>;
  auto key_of = [&](const std::vector<std::int64_t>& t) {
    Key key(static_cast<std::size_t>(k), 0);
    for (auto x : t)
      for (int j = 1; j <= k; ++j) key[static_cast<std::size_t>(j - 1)] += checked_power(x, j);
    return key;
  };
  auto weight_of = [&](const std::vector<std::int64_t>& t) {
    mpq_class p = 1;
    for (auto x : t) p *= w.rational(x);
    return p;
  };
  // x-block: well-conditioned modulo prime^{a+1}.
  std::map<Key, mpq_class> P;
  {
    std::vector<std::int64_t> t;
    std::function<void()> rec = [&] {
      if (static_cast<int>(t.size()) == k) {
        P[key_of(t)] += weight_of(t);
        return;
      }
      for (auto x : xs) {
        bool clash = false;
        for (auto y : t) clash = clash || floor_mod(x - y, qa1) == 0;
        if (clash) continue;
        t.push_back(x);
        rec();
        t.pop_back();
      }
    };
    rec();
  }
  // v-block split by three-in-a-class modulo prime^{b+1}; w-block unsplit.
  std::map<Key, mpq_class> V1, V2, W;
  {
    std::vector<std::int64_t> t;
    std::function<void()> rec = [&] {
      if (static_cast<int>(t.size()) == s) {
        std::map<std::int64_t, int> classes;
        bool three = false;
        for (auto v : t) three = three || ++classes[floor_mod(v, qb1)] >= 3;
        Key key = key_of(t);
        mpq_class wt = weight_of(t);
        (three ? V1 : V2)[key] += wt;
        W[key] += wt;
        return;
      }
      for (auto v : vs) {
        t.push_back(v);
        rec();
        t.pop_back();
      }
    };
    rec();
  }
  // sum x - sum y = sum v - sum w  <=>  sum x + sum w = sum y + sum v.
  std::map<Key, mpq_class> left;
  for (const auto& [kx, px] : P)
    for (const auto& [kw, pw] : W) {
      Key key = kx;
      for (int j = 0; j < k; ++j) key[static_cast<std::size_t>(j)] += kw[static_cast<std::size_t>(j)];
      left[key] += px * pw;
    }
  mpq_class t1 = 0, t2 = 0;
  for (const auto& [ky, py] : P) {
    auto join = [&](const std::map<Key, mpq_class>& V, mpq_class& acc) {
      for (const auto& [kv, pv] : V) {
        Key key = ky;
        for (int j = 0; j < k; ++j) key[static_cast<std::size_t>(j)] += kv[static_cast<std::size_t>(j)];
        auto it = left.find(key);
        if (it != left.end()) acc += it->second * py * pv;
      }
    };
    join(V1, t1);
    join(V2, t2);
  }
  CongruenceProfile pa = class_profile(w, prime, a), pb = class_profile(w, prime, b);
  const Number Ea = pa.energy(floor_mod(xi - 1, qa) + 1), Eb = pb.energy(floor_mod(eta - 1, qb) + 1);
  TSplit out;
  if (Ea.is_zero() || Eb.is_zero()) {
    out.T1 = Number(mpq_class(0));
    out.T2 = Number(mpq_class(0));
  } else {
    Number scale = pow(Ea, static_cast<unsigned>(k)) * pow(Eb, static_cast<unsigned>(s));
    out.T1 = Number(t1) / scale;
    out.T2 = Number(t2) / scale;
  }
  out.I = mixed_moment_I(w, prime, a, b, xi, eta, s, k, opt).value;
  out.consistent = out.T1 + out.T2 == out.I;
  return out;
}

}  // namespace mcurve
