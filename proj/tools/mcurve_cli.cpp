// mcurve: mean values, congruencing audits and circle-method quantities for the moment curve.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <new>
#include <optional>
#include <set>
#include <sstream>

#include "mcurve/errors.hpp"
#include "mcurve/report.hpp"

using namespace mcurve;

namespace {

struct Output {
  Json payload;
  std::optional<Table> table;
};

struct Context {
  unsigned threads = 0;
  bool dry = false;
};

using Handler = std::function<std::optional<Output>(const Context&)>;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!text.empty() && text.back() == sep) out.push_back("");
  return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (!in || !in.eof()) throw ParameterError("bad " + what + " '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<T>(part, what));
  return out;
}

// Values settled after parsing (from --params or prime selection) replace the raw flags.
std::map<std::string, std::string>& resolved_values() {
  static std::map<std::string, std::string> values;
  return values;
}

std::set<const CLI::Option*>& flag_options() {
  static std::set<const CLI::Option*> flags;
  return flags;
}

struct ExponentArgs {
  int k = 0;
  std::string exponents;
  void attach(CLI::App* app) {
    app->add_option("--k", k, "degree; selects the exponent set 1..k");
    app->add_option("--exponents", exponents, "comma-separated exponent set, overrides --k");
  }
  ExponentSet resolve() const {
    if (!exponents.empty()) return ExponentSet::parse(exponents);
    if (k < 1) throw ParameterError("--k >= 1 or --exponents required");
    return ExponentSet::full(k);
  }
};

struct WeightArgs {
  std::string generator = "unit";
  std::string file;
  void attach(CLI::App* app) {
    app->add_option("--weights", generator, "unit | spike | random:SEED | geometric:P/Q");
    app->add_option("--weights-file", file, "weight file, overrides --weights");
  }
  WeightSequence resolve(std::int64_t N, bool N_given) const {
    if (!file.empty()) {
      WeightSequence w = read_weights(file);
      if (N_given && w.N() != N) throw ParameterError("--N disagrees with the weight file");
      return w;
    }
    if (N < 0) throw ParameterError("N must be >= 0");
    return make_generator(parse_generator(generator), N);
  }
};

struct ComputeArgs {
  std::string method = "auto";
  std::size_t entry_cap = kDefaultEntryCap;
  double work_budget = 6e9;
  void attach(CLI::App* app, bool with_method = true) {
    if (with_method) app->add_option("--method", method, "auto | sparse | sliced | spectral");
    app->add_option("--entry-cap", entry_cap, "largest amplitude map");
    if (with_method) app->add_option("--work-budget", work_budget, "largest exact pair count for auto");
  }
  MeanValueOptions resolve(const Context& ctx) const {
    MeanValueOptions o;
    o.threads = ctx.threads;
    o.entry_cap = entry_cap;
    o.method = parse_method(method);
    o.exact_work_budget = work_budget;
    if (entry_cap < 1) throw ParameterError("--entry-cap must be positive");
    return o;
  }
};

/// a, b, theta, prime; explicit flags win over --params.
struct AuditParams {
  std::string params;
  int a = 0, b = 1;
  std::string theta;
  std::int64_t prime = 0;
  CLI::Option *a_opt = nullptr, *b_opt = nullptr, *theta_opt = nullptr, *prime_opt = nullptr;
  void attach(CLI::App* app, bool with_theta = true) {
    app->add_option("--params", params, "a,b,theta,prime (empty fields allowed)");
    a_opt = app->add_option("--a", a, "lower level a");
    b_opt = app->add_option("--b", b, "upper level b");
    if (with_theta) theta_opt = app->add_option("--theta", theta, "theta as p/q");
    prime_opt = app->add_option("--prime", prime, "prime modulus");
  }
  void resolve() {
    if (params.empty()) return;
    auto f = split(params, ',');
    if (f.size() > 4) throw ParameterError("--params takes at most a,b,theta,prime");
    f.resize(4);
    if (!f[0].empty() && a_opt->count() == 0) a = parse_number<int>(f[0], "a");
    if (!f[1].empty() && b_opt->count() == 0) b = parse_number<int>(f[1], "b");
    if (!f[2].empty() && (!theta_opt || theta_opt->count() == 0)) theta = f[2];
    if (!f[3].empty() && prime_opt->count() == 0) prime = parse_number<std::int64_t>(f[3], "prime");
    resolved_values()["a"] = std::to_string(a);
    resolved_values()["b"] = std::to_string(b);
    resolved_values()["prime"] = std::to_string(prime);
    if (theta_opt) resolved_values()["theta"] = theta;
  }
  std::optional<Theta> theta_value() const {
    if (theta.empty()) return std::nullopt;
    return parse_theta(theta);
  }
  void check_levels() const {
    if (a < 0 || b < 0) throw ParameterError("levels a, b must be >= 0");
  }
};

void require_prime(std::int64_t p) {
  if (p < 2 || !is_prime(p)) throw ParameterError("--prime must be a prime");
}

std::string join_config_value(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  std::string out;
  for (const auto& r : opt->results()) {
    if (!out.empty()) out += ",";
    out += r;
  }
  return out;
}

void collect_options(const CLI::App* app, Json& config) {
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (flag_options().count(opt)) {
      config[name] = opt->count() > 0 && opt->as<bool>();
    } else if (auto it = resolved_values().find(name); it != resolved_values().end()) {
      config[name] = it->second;
    } else {
      config[name] = join_config_value(opt);
    }
  }
}

// Config file lines "key = value" become "--key=value" unless the flag is already present.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file '" + path + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw ParameterError("config line " + std::to_string(number) + ": empty key");
    const std::string flag = "--" + key;
    bool present = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean values of exponential sums over the moment curve"};
  app.name("mcurve");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Context ctx;
  std::string output = "-", format = "json", config_path;
  app.add_option("--threads", ctx.threads, "worker threads, 0 = machine parallelism");
  flag_options().insert(app.add_flag("--dry-run", ctx.dry, "print the resolved configuration and stop"));
  app.add_option("--output", output, "output path, - for standard output");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--config", config_path, "key = value file merged under the flags");

  std::map<const CLI::App*, Handler> handlers;

  // mean-value / brute-check
  ExponentArgs mv_es;
  WeightArgs mv_w;
  ComputeArgs mv_c;
  int mv_s = 1;
  std::int64_t mv_N = 0;
  double bf_cap = kDefaultEnumerationCap;
  CLI::Option* mv_N_opt = nullptr;
  auto* mean = app.add_subcommand("mean-value", "weighted mean value of |f|^{2s}");
  auto* brute = app.add_subcommand("brute-check", "mean value against direct enumeration");
  for (auto* sub : {mean, brute}) {
    mv_es.attach(sub);
    mv_w.attach(sub);
    mv_c.attach(sub, sub == mean);
    sub->add_option("--s", mv_s, "moment order s")->required();
    mv_N_opt = sub->add_option("--N", mv_N, "radius N");
  }
  brute->add_option("--cap", bf_cap, "enumeration cap");
  handlers[mean] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = mv_es.resolve();
    WeightSequence w = mv_w.resolve(mv_N, mean->count("--N") > 0);
    MeanValueOptions opt = mv_c.resolve(c);
    if (mv_s < 1) throw ParameterError("--s must be >= 1");
    if (c.dry) return std::nullopt;
    return Output{to_json(mean_value(w, mv_s, es, opt)), std::nullopt};
  };
  handlers[brute] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = mv_es.resolve();
    WeightSequence w = mv_w.resolve(mv_N, brute->count("--N") > 0);
    MeanValueOptions opt = mv_c.resolve(c);
    if (mv_s < 1) throw ParameterError("--s must be >= 1");
    if (!w.exact()) throw ParameterError("brute-check needs exact weights");
    if (c.dry) return std::nullopt;
    MeanValueResult bf = brute_force_mean_value(w, mv_s, es, bf_cap);
    MeanValueResult mv = mean_value(w, mv_s, es, opt);
    Json j;
    j["mean_value"] = to_json(mv);
    j["brute_force"] = to_json(bf);
    j["equal"] = mv.raw_moment == bf.raw_moment && mv.distinct_keys == bf.distinct_keys;
    return Output{j, std::nullopt};
  };
  (void)mv_N_opt;

  // exponent-fit
  ExponentArgs ef_es;
  WeightArgs ef_w;
  ComputeArgs ef_c;
  int ef_s = 1;
  std::string ef_list;
  auto* fit = app.add_subcommand("exponent-fit", "growth exponent of the normalized mean value");
  ef_es.attach(fit);
  fit->add_option("--weights", ef_w.generator, "unit | spike | random:SEED | geometric:P/Q");
  ef_c.attach(fit);
  fit->add_option("--s", ef_s, "moment order s")->required();
  fit->add_option("--N-list", ef_list, "comma-separated, strictly increasing")->required();
  handlers[fit] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = ef_es.resolve();
    GeneratorSpec gen = parse_generator(ef_w.generator);
    auto Ns = parse_list<std::int64_t>(ef_list, "N");
    MeanValueOptions opt = ef_c.resolve(c);
    if (ef_s < 1) throw ParameterError("--s must be >= 1");
    if (Ns.size() < 3) throw ParameterError("--N-list needs at least three values");
    for (std::size_t i = 1; i < Ns.size(); ++i)
      if (Ns[i] <= Ns[i - 1]) throw ParameterError("--N-list must be strictly increasing");
    if (c.dry) return std::nullopt;
    ExponentFitReport r = exponent_fit(gen, ef_s, es, Ns, opt);
    return Output{to_json(r), sweep_table(r)};
  };

  // extremal-search
  ExponentArgs xs_es;
  ComputeArgs xs_c;
  int xs_s = 1, xs_restarts = 1, xs_iters = 1;
  std::int64_t xs_N = 0;
  std::uint64_t xs_seed = 0;
  std::string xs_out;
  auto* search = app.add_subcommand("extremal-search", "coordinate ascent on the normalized mean value");
  xs_es.attach(search);
  xs_c.attach(search);
  search->add_option("--s", xs_s, "moment order s")->required();
  search->add_option("--N", xs_N, "radius N")->required();
  search->add_option("--restarts", xs_restarts, "restarts, the first from unit weights");
  search->add_option("--iters", xs_iters, "sweeps per restart");
  search->add_option("--seed", xs_seed, "seed for random restarts");
  search->add_option("--witness-out", xs_out, "write the best weights to this file");
  handlers[search] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = xs_es.resolve();
    MeanValueOptions opt = xs_c.resolve(c);
    if (xs_s < 1 || xs_N < 0 || xs_restarts < 1 || xs_iters < 1)
      throw ParameterError("need s >= 1, N >= 0, restarts >= 1, iters >= 1");
    if (c.dry) return std::nullopt;
    ExtremalSearchState st = extremal_search(xs_s, es, xs_N, xs_restarts, xs_iters, xs_seed, opt);
    if (!xs_out.empty()) write_weights(st.weights, xs_out);
    return Output{to_json(st), std::nullopt};
  };

  // strichartz
  ExponentArgs st_es;
  ComputeArgs st_c;
  int st_p = 2, st_budget = 0;
  std::int64_t st_N = 0;
  std::uint64_t st_seed = 0;
  auto* strich = app.add_subcommand("strichartz", "lower bound for the Strichartz constant");
  st_es.attach(strich);
  st_c.attach(strich);
  strich->add_option("--p", st_p, "even exponent p")->required();
  strich->add_option("--N", st_N, "radius N")->required();
  strich->add_option("--budget", st_budget, "random candidates besides the unit sequence");
  strich->add_option("--seed", st_seed, "candidate seed");
  handlers[strich] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = st_es.resolve();
    MeanValueOptions opt = st_c.resolve(c);
    if (st_p < 2 || st_p % 2) throw ParameterError("--p must be an even integer >= 2");
    if (st_N < 0 || st_budget < 0) throw ParameterError("need N >= 0 and budget >= 0");
    if (c.dry) return std::nullopt;
    return Output{to_json(strichartz_constant(st_p, st_N, es, st_budget, st_seed, opt)), std::nullopt};
  };

  // restriction
  ExponentArgs rs_es;
  int rs_p = 2, rs_trials = 1;
  std::int64_t rs_N = 0;
  std::uint64_t rs_seed = 0;
  double rs_tol = kDefaultNormTol;
  auto* restr = app.add_subcommand("restriction", "lower bound for the restriction constant");
  rs_es.attach(restr);
  restr->add_option("--p", rs_p, "even exponent p")->required();
  restr->add_option("--N", rs_N, "radius N")->required();
  restr->add_option("--trials", rs_trials, "random curve-supported functions");
  restr->add_option("--seed", rs_seed, "coefficient seed");
  restr->add_option("--tol", rs_tol, "relative tolerance of the dual norm");
  handlers[restr] = [&](const Context& c) -> std::optional<Output> {
    ExponentSet es = rs_es.resolve();
    if (rs_p < 2 || rs_p % 2) throw ParameterError("--p must be an even integer >= 2");
    if (rs_N < 0 || rs_trials < 1) throw ParameterError("need N >= 0 and trials >= 1");
    if (es.t() > 3) throw ParameterError("restriction supports at most 3 exponents");
    if (!(rs_tol > 0)) throw ParameterError("--tol must be positive");
    if (c.dry) return std::nullopt;
    MeanValueOptions opt;
    opt.threads = c.threads;
    return Output{to_json(restriction_constant(rs_p, rs_N, es, rs_trials, rs_seed, rs_tol, opt)), std::nullopt};
  };

  // congruence-audit
  auto* audit = app.add_subcommand("congruence-audit", "efficient-congruencing quantities");
  audit->require_subcommand(1);

  AuditParams cl_p;
  WeightArgs cl_w;
  std::int64_t cl_X = 1;
  int cl_c = 0;
  auto* classes = audit->add_subcommand("classes", "class energies rho_c(xi)^2");
  cl_p.attach(classes, false);
  cl_w.attach(classes);
  classes->add_option("--X", cl_X, "radius X")->required();
  classes->add_option("--c", cl_c, "level c");
  handlers[classes] = [&](const Context& c) -> std::optional<Output> {
    cl_p.resolve();
    require_prime(cl_p.prime);
    if (cl_c < 0) throw ParameterError("--c must be >= 0");
    WeightSequence w = cl_w.resolve(cl_X, true);
    if (c.dry) return std::nullopt;
    CongruenceProfile prof = class_profile(w, cl_p.prime, cl_c);
    Json j = to_json(prof);
    j["rho0_squared"] = to_json(rho(w).squared);
    j["partition_holds"] = w.all_zero() || prof.total() == rho(w).squared;
    return Output{j, std::nullopt};
  };

  AuditParams xc_p;
  int xc_c = 0, xc_k = 2;
  std::int64_t xc_xi = 1;
  auto* xicount = audit->add_subcommand("xi-count", "well-conditioned k-tuples of lifts");
  xc_p.attach(xicount, false);
  xicount->add_option("--c", xc_c, "level c");
  xicount->add_option("--xi", xc_xi, "class xi");
  xicount->add_option("--k", xc_k, "tuple length k");
  handlers[xicount] = [&](const Context& c) -> std::optional<Output> {
    xc_p.resolve();
    require_prime(xc_p.prime);
    if (xc_c < 0 || xc_k < 1) throw ParameterError("need c >= 0 and k >= 1");
    if (c.dry) return std::nullopt;
    WellConditionedTuples t = well_conditioned_tuples(xc_p.prime, xc_c, xc_xi, xc_k);
    Json j = to_json(t);
    j["formula"] = to_json(xi_count_formula(xc_p.prime, xc_k));
    j["matches"] = mpz_class(static_cast<unsigned long>(t.tuples.size())) == xi_count_formula(xc_p.prime, xc_k);
    return Output{j, std::nullopt};
  };

  AuditParams lm_p;
  int lm_k = 2;
  double lm_cap = kDefaultBoxCap;
  auto* lemma = audit->add_subcommand("lemma51", "exhaustive box cardinalities against k! prime^{k(k-1)(a+b)/2}");
  lm_p.attach(lemma, false);
  lemma->add_option("--k", lm_k, "degree k");
  lemma->add_option("--cap", lm_cap, "enumeration cap");
  handlers[lemma] = [&](const Context& c) -> std::optional<Output> {
    lm_p.resolve();
    require_prime(lm_p.prime);
    lm_p.check_levels();
    if (lm_k < 1) throw ParameterError("--k must be >= 1");
    if (c.dry) return std::nullopt;
    return Output{to_json(lemma51_audit(lm_p.prime, lm_p.a, lm_p.b, lm_k, lm_cap)), std::nullopt};
  };

  AuditParams ts_p;
  WeightArgs ts_w;
  std::int64_t ts_X = 1, ts_xi = 1, ts_eta = 1;
  int ts_s = 1, ts_k = 2;
  double ts_cap = kDefaultBoxCap;
  auto* tsplit = audit->add_subcommand("t-split", "T1 + T2 = I by enumeration");
  ts_p.attach(tsplit, false);
  ts_w.attach(tsplit);
  tsplit->add_option("--X", ts_X, "radius X")->required();
  tsplit->add_option("--xi", ts_xi, "class xi modulo prime^a");
  tsplit->add_option("--eta", ts_eta, "class eta modulo prime^b");
  tsplit->add_option("--s", ts_s, "order s");
  tsplit->add_option("--k", ts_k, "degree k");
  tsplit->add_option("--cap", ts_cap, "enumeration cap");
  handlers[tsplit] = [&](const Context& c) -> std::optional<Output> {
    ts_p.resolve();
    require_prime(ts_p.prime);
    ts_p.check_levels();
    WeightSequence w = ts_w.resolve(ts_X, true);
    if (ts_s < 1 || ts_k < 1) throw ParameterError("need s >= 1 and k >= 1");
    if (c.dry) return std::nullopt;
    ComputeOptions opt;
    opt.threads = c.threads;
    return Output{to_json(audit_T_split(w, ts_p.prime, ts_p.a, ts_p.b, ts_xi, ts_eta, ts_s, ts_k, ts_cap, opt)),
                  std::nullopt};
  };

  AuditParams mm_p;
  WeightArgs mm_w;
  std::string mm_kind = "I";
  std::int64_t mm_X = 1;
  int mm_s = 1, mm_u = 1, mm_k = 2;
  std::int64_t mm_xi = 0, mm_eta = 0;
  auto* mixed = audit->add_subcommand("mixed-moments", "I_{a,b} or K_{a,b} per class pair and aggregated");
  mm_p.attach(mixed, true);
  mm_w.attach(mixed);
  mixed->add_option("--kind", mm_kind, "I | K")->check(CLI::IsMember({"I", "K"}));
  mixed->add_option("--X", mm_X, "radius X")->required();
  mixed->add_option("--s", mm_s, "order s for I");
  mixed->add_option("--u", mm_u, "order u for K (s = u k)");
  mixed->add_option("--k", mm_k, "degree k");
  mixed->add_option("--xi", mm_xi, "single class xi (with --eta)");
  mixed->add_option("--eta", mm_eta, "single class eta (with --xi)");
  handlers[mixed] = [&](const Context& c) -> std::optional<Output> {
    mm_p.resolve();
    mm_p.check_levels();
    std::optional<Theta> theta = mm_p.theta_value();
    WeightSequence w = mm_w.resolve(mm_X, true);
    if (mm_k < 1 || mm_s < 1 || mm_u < 1) throw ParameterError("need k, s, u >= 1");
    if ((mm_xi == 0) != (mm_eta == 0)) throw ParameterError("--xi and --eta go together");
    std::optional<PrimeSelection> selection;
    std::int64_t prime = mm_p.prime;
    if (prime == 0) {
      if (!theta) throw ParameterError("--prime or --theta required");
      selection = select_prime(mm_X, *theta, mm_k);
      prime = selection->prime;
      resolved_values()["prime"] = std::to_string(prime);
    }
    require_prime(prime);
    if (c.dry) return std::nullopt;
    ComputeOptions opt;
    opt.threads = c.threads;
    const MixedKind kind = mm_kind == "K" ? MixedKind::K : MixedKind::I;
    Json j;
    j["prime"] = prime;
    if (selection) j["selection"] = to_json(*selection);
    if (mm_xi != 0) {
      MixedMomentResult r = kind == MixedKind::I
                                ? mixed_moment_I(w, prime, mm_p.a, mm_p.b, mm_xi, mm_eta, mm_s, mm_k, opt)
                                : mixed_moment_K(w, prime, mm_p.a, mm_p.b, mm_xi, mm_eta, mm_u, mm_k, opt);
      j["moment"] = to_json(r);
    } else {
      j["aggregate"] = to_json(aggregate(kind, w, prime, mm_p.a, mm_p.b, kind == MixedKind::I ? mm_s : mm_u, mm_k,
                                         theta, opt));
    }
    return Output{j, std::nullopt};
  };

  // circle
  auto* circle = app.add_subcommand("circle", "circle-method quantities");
  circle->require_subcommand(1);

  std::string wy_alpha, wy_a, wy_beta;
  double wy_X = 1;
  std::int64_t wy_q = 0;
  auto* weyl = circle->add_subcommand("weyl", "F(alpha; X)");
  weyl->add_option("--X", wy_X, "length X")->required();
  weyl->add_option("--alpha", wy_alpha, "comma-separated alpha_1..alpha_k");
  weyl->add_option("--q", wy_q, "denominator for alpha = a/q + beta");
  weyl->add_option("--a", wy_a, "comma-separated numerators a_1..a_k");
  weyl->add_option("--beta", wy_beta, "comma-separated beta_1..beta_k");
  handlers[weyl] = [&](const Context& c) -> std::optional<Output> {
    if (!(wy_X >= 0)) throw ParameterError("--X must be >= 0");
    Json j;
    if (wy_q > 0) {
      auto a = parse_list<std::int64_t>(wy_a, "a");
      auto beta = parse_list<double>(wy_beta, "beta");
      if (beta.empty()) beta.assign(a.size(), 0.0);
      if (a.empty() || a.size() != beta.size()) throw ParameterError("--a and --beta need equal, positive length");
      if (c.dry) return std::nullopt;
      j["F"] = complex_json(weyl_sum_at(wy_q, a, beta, wy_X));
    } else {
      auto alpha = parse_list<double>(wy_alpha, "alpha");
      if (alpha.empty()) throw ParameterError("--alpha or --q/--a required");
      if (c.dry) return std::nullopt;
      j["F"] = complex_json(weyl_sum(alpha, wy_X));
    }
    j["abs"] = std::hypot(j["F"][0].get<double>(), j["F"][1].get<double>());
    return Output{j, std::nullopt};
  };

  std::int64_t cs_q = 1;
  std::string cs_a;
  auto* complete = circle->add_subcommand("complete-sum", "S(q, a)");
  complete->add_option("--q", cs_q, "modulus q")->required();
  complete->add_option("--a", cs_a, "comma-separated a_1..a_k")->required();
  handlers[complete] = [&](const Context& c) -> std::optional<Output> {
    auto a = parse_list<std::int64_t>(cs_a, "a");
    if (cs_q < 1 || a.empty()) throw ParameterError("need q >= 1 and a non-empty");
    if (c.dry) return std::nullopt;
    Complex S = complete_sum(cs_q, a);
    Json j;
    j["S"] = complex_json(S);
    j["abs"] = std::abs(S);
    j["abs_over_q"] = std::abs(S) / static_cast<double>(cs_q);
    return Output{j, std::nullopt};
  };

  double ar_X = 1;
  int ar_k = 2;
  bool ar_list = false;
  auto* arcs = circle->add_subcommand("arcs", "major-arc decomposition");
  arcs->add_option("--X", ar_X, "length X")->required();
  arcs->add_option("--k", ar_k, "degree k");
  flag_options().insert(arcs->add_flag("--list", ar_list, "include every arc"));
  handlers[arcs] = [&](const Context& c) -> std::optional<Output> {
    if (!(ar_X >= 1) || ar_k < 1) throw ParameterError("need X >= 1 and k >= 1");
    if (c.dry) return std::nullopt;
    ArcDecomposition d(ar_X, ar_k);
    return Output{to_json(d, ar_list), arc_table(d)};
  };

  double ms_X = 1;
  int ms_k = 2, ms_density = 4;
  std::uint64_t ms_seed = 0;
  auto* minor = circle->add_subcommand("minor-sup", "sampled sup of |F| off the major arcs");
  minor->add_option("--X", ms_X, "length X")->required();
  minor->add_option("--k", ms_k, "degree k");
  minor->add_option("--density", ms_density, "samples / 256");
  minor->add_option("--seed", ms_seed, "sample offset seed");
  handlers[minor] = [&](const Context& c) -> std::optional<Output> {
    if (!(ms_X >= 1) || ms_k < 1 || ms_density < 1) throw ParameterError("need X >= 1, k >= 1, density >= 1");
    if (c.dry) return std::nullopt;
    return Output{to_json(minor_arc_sup_sample(ms_X, ms_k, ms_density, ms_seed, c.threads)), std::nullopt};
  };

  double mj_X = 1, mj_u = 6, mj_tol = kDefaultMomentTol;
  int mj_k = 2;
  auto* major = circle->add_subcommand("major-moment", "major-arc moment of |V|^u");
  major->add_option("--X", mj_X, "length X")->required();
  major->add_option("--k", mj_k, "degree k");
  major->add_option("--u", mj_u, "moment u");
  major->add_option("--tol", mj_tol, "relative tolerance");
  handlers[major] = [&](const Context& c) -> std::optional<Output> {
    if (!(mj_X >= 1) || mj_k < 1 || !(mj_tol > 0)) throw ParameterError("need X >= 1, k >= 1, tol > 0");
    if (c.dry) return std::nullopt;
    MajorArcMoment m = major_arc_moment(mj_X, mj_k, mj_u, mj_tol, c.threads);
    return Output{to_json(m), moment_table(m)};
  };

  // primes
  std::int64_t pr_X = 2;
  std::string pr_theta = "1/4";
  int pr_k = 2;
  std::size_t pr_cap = kDefaultCandidateCap;
  auto* primes = app.add_subcommand("primes", "candidate primes above M = X^theta");
  primes->add_option("--X", pr_X, "X")->required();
  primes->add_option("--theta", pr_theta, "theta as p/q");
  primes->add_option("--k", pr_k, "degree k");
  primes->add_option("--cap", pr_cap, "largest candidate set");
  handlers[primes] = [&](const Context& c) -> std::optional<Output> {
    Theta theta = parse_theta(pr_theta);
    if (pr_k < 1 || pr_X < 2) throw ParameterError("need k >= 1 and X >= 2");
    if (c.dry) return std::nullopt;
    return Output{to_json(select_prime(pr_X, theta, pr_k, pr_cap)), std::nullopt};
  };

  try {
    std::vector<std::string> args = merge_config(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  }

  // Deepest parsed subcommand and the command path.
  const CLI::App* leaf = &app;
  std::string command;
  for (;;) {
    auto subs = leaf->get_subcommands();
    if (subs.empty()) break;
    leaf = subs.front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto it = handlers.find(leaf);
    if (it == handlers.end()) throw ParameterError("no runnable subcommand");
    std::optional<Output> out = it->second(ctx);

    Json config;
    config["command"] = command;
    for (const CLI::App* a = &app;;) {
      collect_options(a, config);
      auto subs = a->get_subcommands();
      if (subs.empty()) break;
      a = subs.front();
    }

    std::ostringstream text;
    if (format == "json") {
      Json doc;
      doc["header"] = {{"config", config}, {"wall_ms", elapsed_ms(t0)}, {"dry_run", ctx.dry}};
      doc["payload"] = out ? out->payload : Json(nullptr);
      text << doc.dump(2) << "\n";
    } else {
      for (auto e = config.begin(); e != config.end(); ++e) text << "# " << e.key() << " = " << cell(e.value()) << "\n";
      text << "# wall_ms = " << elapsed_ms(t0) << "\n";
      if (out) text << to_csv(out->table ? *out->table : flatten_table(out->payload));
    }
    if (output == "-") {
      std::cout << text.str();
      std::cout.flush();
    } else {
      std::ofstream file(output);
      if (!file) throw ParameterError("cannot write '" + output + "'");
      file << text.str();
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: resource: " << one_line(e.what()) << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << one_line(e.what()) << "\n";
    return 3;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: resource: out of memory\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: parameter: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << one_line(e.what()) << "\n";
    return 3;
  }
  return 0;
}
