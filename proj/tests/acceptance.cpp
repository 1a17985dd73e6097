// Acceptance suite. One PASS/FAIL line per criterion; pass criterion numbers to run a subset.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mcurve/circle.hpp"
#include "mcurve/congruencing.hpp"
#include "mcurve/constants.hpp"
#include "mcurve/report.hpp"

using namespace mcurve;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) { return format_double(v); }

std::vector<std::pair<std::string, WeightSequence>> grid_weights(std::int64_t N) {
  std::vector<std::pair<std::string, WeightSequence>> out;
  for (const char* g : {"unit", "spike", "geometric:1/2", "random:1", "random:2", "random:3", "random:4", "random:5"})
    out.emplace_back(g, make_generator(parse_generator(g), N));
  return out;
}

// (k, s, N) of the oracle grid.
template <class F>
void for_grid(F&& f) {
  for (int k = 2; k <= 3; ++k)
    for (int s = 1; s <= 3; ++s)
      for (std::int64_t N = 1; N <= 5; ++N)
        if (std::pow(2.0 * N + 1, 2 * s) <= 1e8) f(k, s, N);
}

Verdict criterion1() {
  std::size_t cases = 0, bad = 0;
  std::string first;
  for_grid([&](int k, int s, std::int64_t N) {
    for (const auto& [name, w] : grid_weights(N)) {
      ExponentSet es = ExponentSet::full(k);
      MeanValueResult bf = brute_force_mean_value(w, s, es);
      for (auto m : {MeanValueMethod::automatic, MeanValueMethod::sparse, MeanValueMethod::sliced}) {
        MeanValueOptions o;
        o.method = m;
        MeanValueResult mv = mean_value(w, s, es, o);
        ++cases;
        if (!(mv.raw_moment == bf.raw_moment) || mv.distinct_keys != bf.distinct_keys || !mv.exact) {
          ++bad;
          if (first.empty())
            first = " first mismatch k=" + std::to_string(k) + " s=" + std::to_string(s) + " N=" +
                    std::to_string(N) + " " + name;
        }
      }
    }
  });
  return {bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) + " exact matches" + first};
}

Verdict criterion2() {
  std::size_t parseval = 0, newton = 0, newton_cases = 0;
  for (int i = 0; i < 100; ++i) {
    GeneratorSpec g;
    g.kind = GeneratorKind::random_uniform;
    g.seed = 1000 + static_cast<std::uint64_t>(i);
    WeightSequence w = make_generator(g, 1 + i % 20);
    MeanValueResult r = mean_value(w, 1, ExponentSet::full(2 + i % 2));
    if (r.raw_moment == rho(w).squared) ++parseval;
  }
  for_grid([&](int k, int s, std::int64_t N) {
    if (s > k) return;
    for (const auto& [name, w] : grid_weights(N)) {
      ++newton_cases;
      NewtonCheck c = newton_regime_check(w, s, k);
      mpz_class fact;
      mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(s));
      mpq_class bound = mpq_class(fact) * pow(rho(w).squared, static_cast<unsigned>(s)).rational();
      if (c.holds && c.raw_moment.rational() <= bound) ++newton;
    }
  });
  return {parseval == 100 && newton == newton_cases,
          "Parseval " + std::to_string(parseval) + "/100, permutation regime " + std::to_string(newton) + "/" +
              std::to_string(newton_cases)};
}

Verdict criterion3() {
  bool closed_form_ok = true;
  for (std::int64_t N = 1; N <= 3; ++N) {
    long n = 2 * N + 1;
    MeanValueResult bf = brute_force_mean_value(make_generator({}, N), 2, ExponentSet::full(2));
    closed_form_ok = closed_form_ok && bf.raw_moment == Number(mpz_class(2 * n * n - n));
  }
  int matches = 0;
  for (std::int64_t N = 1; N <= 50; ++N) {
    long n = 2 * N + 1;
    MeanValueResult r = mean_value(make_generator({}, N), 2, ExponentSet::full(2));
    if (r.raw_moment == Number(mpz_class(2 * n * n - n))) ++matches;
  }
  return {closed_form_ok && matches == 50,
          "closed form vs brute force N<=3: " + std::string(closed_form_ok ? "ok" : "mismatch") +
              ", mean_value N<=50: " + std::to_string(matches) + "/50"};
}

Verdict criterion4() {
  ExponentFitReport r = exponent_fit(GeneratorSpec{}, 6, ExponentSet::full(2), {50, 100, 200, 400});
  std::string methods;
  for (const auto& s : r.samples) methods += std::string(methods.empty() ? "" : ",") + to_string(s.method);
  return {std::abs(r.fit.slope - 3.0) <= 0.15,
          "slope " + fmt(r.fit.slope) + " (target 3 +- 0.15), R^2 " + fmt(r.fit.r_squared) + ", methods " + methods};
}

Verdict criterion5() {
  const std::vector<std::int64_t> Ns{50, 100, 200, 400, 800};
  ExponentFitReport r = exponent_fit(GeneratorSpec{}, 3, ExponentSet::full(2), Ns);
  bool increasing = true;
  double last = 0;
  std::string ratios;
  for (const auto& s : r.samples) {
    double v = s.raw_moment.to_double() / std::pow(static_cast<double>(s.N), 3);
    if (!(v > last)) increasing = false;
    last = v;
    ratios += (ratios.empty() ? "" : ",") + fmt(v);
  }
  bool slope_ok = r.fit.slope <= 0.1;
  return {slope_ok && increasing, "slope " + fmt(r.fit.slope) + " (cap 0.1), loo [" + fmt(r.fit.loo_min) + ", " +
                                      fmt(r.fit.loo_max) + "], J/N^3 " + ratios +
                                      (increasing ? " increasing" : " not increasing")};
}

Verdict criterion6() {
  struct Case {
    int k;
    std::int64_t p;
    int a, b;
  };
  bool all = true;
  std::string detail;
  for (Case c : {Case{2, 3, 0, 1}, Case{2, 5, 0, 1}, Case{2, 3, 0, 2}, Case{3, 5, 0, 1}}) {
    Lemma51Audit r = lemma51_audit(c.p, c.a, c.b, c.k);
    all = all && r.pass;
    detail += (detail.empty() ? "" : "; ") + std::string("(") + std::to_string(c.k) + "," + std::to_string(c.p) +
              "," + std::to_string(c.a) + "," + std::to_string(c.b) + ") max " + std::to_string(r.max_cardinality) +
              " bound " + to_decimal(r.bound);
  }
  return {all, detail};
}

Verdict criterion7() {
  std::size_t partition = 0, partition_cases = 0, weights = 0, weight_cases = 0, split = 0, split_cases = 0;
  for (std::int64_t X = 1; X <= 6; ++X) {
    for (const char* g : {"unit", "geometric:1/2", "random:7"}) {
      WeightSequence w = make_generator(parse_generator(g), X);
      for (int c = 0; c <= 2; ++c) {
        ++partition_cases;
        if (class_profile(w, 3, c).total() == rho(w).squared) ++partition;
      }
      for (auto kind : {MixedKind::I, MixedKind::K}) {
        ++weight_cases;
        if (aggregate(kind, w, 3, 0, 1, kind == MixedKind::I ? 2 : 1, 2).weight_sum == Number(mpq_class(1)))
          ++weights;
      }
      for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        for (std::int64_t xi = 1; xi <= ipow(3, a); ++xi)
          for (std::int64_t eta = 1; eta <= ipow(3, b); ++eta) {
            ++split_cases;
            if (audit_T_split(w, 3, a, b, xi, eta, 4, 2).consistent) ++split;
          }
      }
    }
  }
  return {partition == partition_cases && weights == weight_cases && split == split_cases,
          "energy partition " + std::to_string(partition) + "/" + std::to_string(partition_cases) +
              ", aggregated weight " + std::to_string(weights) + "/" + std::to_string(weight_cases) +
              ", T1+T2=I " + std::to_string(split) + "/" + std::to_string(split_cases)};
}

Verdict criterion8() {
  std::ostringstream d;
  // (a)
  double zero_err = 0, lin_err = 0;
  for (double X : {1.0, 10.0, 123.5, 1e3, 1e4}) {
    zero_err = std::max(zero_err, std::abs(oscillatory_integral({0.0, 0.0}, X).value - Complex(2 * X, 0)));
    for (double c : {0.5, 1.3, std::pow(X, 0.25), 2.75}) {
      const double b = c / X;
      Complex exact(std::sin(2 * M_PI * b * X) / (M_PI * b), 0.0);
      lin_err = std::max(lin_err, std::abs(oscillatory_integral({b, 0.0}, X).value - exact));
    }
  }
  bool a_ok = zero_err <= 1e-10 && lin_err <= kDefaultIntegralTol;
  d << "(a) |I(0)-2X| " << fmt(zero_err) << ", linear " << fmt(lin_err) << (a_ok ? " ok" : " FAIL");

  // (b)
  double worst = 0;
  for (std::int64_t q = 1; q <= 200; ++q)
    for (std::int64_t a1 = 1; a1 <= q; ++a1)
      for (std::int64_t a2 = 1; a2 <= q; ++a2)
        worst = std::max(worst, std::abs(complete_sum(q, {a1, a2})) / static_cast<double>(q));
  std::mt19937_64 rng(8);
  const std::pair<std::int64_t, std::int64_t> moduli[] = {{3, 4}, {4, 5}, {5, 7}, {7, 8}, {8, 9},
                                                          {9, 11}, {11, 13}, {3, 16}, {25, 4}, {27, 5}};
  double crt_err = 0;
  int crt_cases = 0;
  for (int i = 0; i < 50; ++i) {
    auto [q1, q2] = moduli[i % 10];
    const std::int64_t q = q1 * q2;
    std::vector<std::int64_t> a;
    for (int j = 0; j < 2 + i % 2; ++j) a.push_back(1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(q)));
    CrtSplit c = crt_split(q1, q2, a);
    double lhs = std::abs(complete_sum(q, a)), rhs = std::abs(complete_sum(q1, c.a1)) * std::abs(complete_sum(q2, c.a2));
    crt_err = std::max(crt_err, std::abs(lhs - rhs) / std::max(1.0, lhs));
    ++crt_cases;
  }
  bool b_ok = worst <= 1 + 1e-12 && crt_err <= 1e-9;
  d << "; (b) max|S|/q " << fmt(worst) << ", CRT rel err " << fmt(crt_err) << " on " << crt_cases
    << (b_ok ? " ok" : " FAIL");

  // (c)
  bool c_ok = true;
  for (double X : {1e3, 1e4}) {
    ArcDecomposition arcs(X, 2);
    std::mt19937_64 gen(static_cast<std::uint64_t>(X));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double C = 0;
    for (int i = 0; i < 1000; ++i) {
      const Arc& arc = arcs.arcs()[gen() % arcs.arcs().size()];
      std::vector<double> alpha(2), beta(2);
      for (int j = 0; j < 2; ++j) {
        beta[static_cast<std::size_t>(j)] = unit(gen) * arcs.radius(j + 1);
        double v = static_cast<double>(arc.a[static_cast<std::size_t>(j)]) / static_cast<double>(arc.q) +
                   beta[static_cast<std::size_t>(j)];
        alpha[static_cast<std::size_t>(j)] = v - std::floor(v);
      }
      Complex F = weyl_sum_at(arc.q, arc.a, beta, X);
      Complex V = major_arc_approximant(alpha, arcs);
      double scale = static_cast<double>(arc.q);
      for (int j = 0; j < 2; ++j)
        scale += std::pow(X, j + 1) * std::abs(static_cast<double>(arc.q) * beta[static_cast<std::size_t>(j)]);
      C = std::max(C, std::abs(F - V) / scale);
    }
    c_ok = c_ok && C <= 10;
    d << (X == 1e3 ? "; (c) C(1e3) " : ", C(1e4) ") << fmt(C);
  }
  d << (c_ok ? " ok" : " FAIL");

  // (d)
  double s50 = singular_series_partial(2, 6, 50), s100 = singular_series_partial(2, 6, 100);
  double rel = std::abs(s100 - s50) / s100;
  bool d_ok = rel < 1e-3;
  d << "; (d) S(50) " << fmt(s50) << ", S(100) " << fmt(s100) << ", rel change " << fmt(rel)
    << (d_ok ? " ok" : " FAIL");
  return {a_ok && b_ok && c_ok && d_ok, d.str()};
}

Verdict criterion9() {
  std::ostringstream d;
  bool p2 = true;
  for (std::int64_t N : {1, 5, 20})
    for (int k : {2, 3}) {
      StrichartzResult r = strichartz_constant(2, N, ExponentSet::full(k), 5, 3);
      p2 = p2 && r.K_hat == 1.0 && r.best_normalized == Number(mpq_class(1));
    }
  d << "K_hat(p=2) " << (p2 ? "= 1" : "!= 1");

  RestrictionResult rs = restriction_constant(12, 25, ExponentSet::full(2), 100, 1, 1e-7);
  bool chain = rs.max_chain_excess <= 1e-6 && rs.max_pairing_error <= 1e-6;
  d << "; chain on " << rs.trials.size() << " g: pairing err " << fmt(rs.max_pairing_error) << ", max excess "
    << fmt(rs.max_chain_excess) << ", quadrature " << fmt(rs.max_quadrature_error) << ", A_hat " << fmt(rs.A_hat)
    << ", gap " << fmt(rs.duality_gap);

  std::vector<double> xs, ys;
  for (std::int64_t N : {50, 100, 200, 400}) {
    StrichartzResult r = strichartz_constant(12, N, ExponentSet::full(2), 0, 0);
    xs.push_back(static_cast<double>(N));
    ys.push_back(r.K_hat);
  }
  LinearFit fit = fit_power_law(xs, ys);
  bool sweep = std::abs(fit.slope - 0.25) <= 0.05;
  d << "; K_hat slope " << fmt(fit.slope) << " (target 0.25 +- 0.05)";
  return {p2 && chain && sweep, d.str()};
}

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  std::string cmd = std::string(MCURVE_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string csv_body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

std::string comparable(const Run& r, bool csv) {
  if (r.code != 0) return "exit " + std::to_string(r.code) + ": " + r.out;
  if (csv) return csv_body(r.out);
  try {
    return Json::parse(r.out).at("payload").dump();
  } catch (const std::exception&) {
    return "unparsable: " + r.out;
  }
}

Verdict criterion10() {
  const std::vector<std::string> commands = {
      "mean-value --k 2 --s 3 --N 12 --weights random:4",
      "mean-value --k 2 --s 3 --N 12 --method sliced --weights geometric:2/3",
      "mean-value --k 2 --s 4 --N 10 --method spectral",
      "brute-check --k 3 --s 2 --N 4 --weights random:2",
      "exponent-fit --k 2 --s 3 --N-list 10,20,40",
      "extremal-search --k 2 --s 2 --N 3 --restarts 2 --iters 2 --seed 5",
      "strichartz --p 6 --k 2 --N 6 --budget 3 --seed 2",
      "restriction --p 4 --k 2 --N 4 --trials 2 --seed 3 --tol 1e-6",
      "congruence-audit classes --X 6 --prime 3 --c 1 --weights random:1",
      "congruence-audit xi-count --prime 5 --c 1 --xi 2 --k 3",
      "congruence-audit lemma51 --k 2 --prime 3 --a 0 --b 1",
      "congruence-audit t-split --X 4 --prime 3 --a 0 --b 1 --eta 2 --s 4 --k 2",
      "congruence-audit mixed-moments --X 6 --params 0,1,1/4, --s 2 --k 2",
      "circle weyl --X 1000 --alpha 0.123,0.456",
      "circle complete-sum --q 12 --a 5,7",
      "circle arcs --X 1000 --k 2 --list",
      "circle minor-sup --X 1000 --k 2 --density 2 --seed 1",
      "circle major-moment --X 50 --k 2 --u 6",
      "primes --X 100 --theta 1/4 --k 2",
      "circle arcs --X 1000 --k 2 --format csv",
      "exponent-fit --k 2 --s 2 --N-list 5,10,20 --format csv",
  };
  std::size_t same = 0;
  std::string first;
  for (const auto& c : commands) {
    const bool csv = c.find("--format csv") != std::string::npos;
    std::string a = comparable(run_cli("--threads 1 " + c), csv);
    std::string b = comparable(run_cli("--threads 1 " + c), csv);
    std::string e = comparable(run_cli("--threads 8 " + c), csv);
    const bool ok = a == b && a == e && a.rfind("exit ", 0) != 0 && a.rfind("unparsable", 0) != 0;
    if (ok) ++same;
    else if (first.empty()) first = "; first difference: " + c + " -> " + a.substr(0, 200);
  }
  return {same == commands.size(),
          std::to_string(same) + "/" + std::to_string(commands.size()) + " invocations byte-identical" + first};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  int failures = 0;
  for (int c : selected) {
    if (c < 1 || c > 10) {
      std::cerr << "unknown criterion " << c << "\n";
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << c << ": " << v.detail << " [" << fmt(secs)
              << " s]" << std::endl;
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
