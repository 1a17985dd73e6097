#include "mcurve/report.hpp"

#include <cmath>
#include <sstream>

namespace mcurve {

Json to_json(const Number& v) {
  if (v.exact()) return v.to_string();
  return v.to_double();
}

Json to_json(const mpz_class& v) { return to_decimal(v); }

Json to_json(const ExponentSet& es) { return es.exponents(); }

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const WeightSequence& w) {
  Json j;
  j["N"] = w.N();
  j["mode"] = to_string(w.mode());
  Json values = Json::array();
  for (auto n : w.indices()) {
    if (w.exact())
      values.push_back(Json::array({n, w.rational(n).get_str()}));
    else
      values.push_back(Json::array({n, w.complex_value(n).real(), w.complex_value(n).imag()}));
  }
  j["values"] = std::move(values);
  return j;
}

Json to_json(const MeanValueResult& r) {
  Json j;
  j["s"] = r.s;
  j["k"] = r.exponents.k();
  j["exponents"] = to_json(r.exponents);
  j["N"] = r.N;
  j["mode"] = to_string(r.mode);
  j["method"] = to_string(r.method);
  j["exact"] = r.exact;
  j["raw_moment"] = to_json(r.raw_moment);
  j["normalized"] = to_json(r.normalized);
  j["normalized_float"] = r.normalized.to_double();
  j["distinct_keys"] = r.distinct_keys ? Json(*r.distinct_keys) : Json(nullptr);
  return j;
}

Json to_json(const StrichartzResult& r) {
  Json j;
  j["p"] = r.p;
  j["N"] = r.N;
  j["exponents"] = to_json(r.exponents);
  j["K_hat"] = r.K_hat;
  j["best_normalized"] = to_json(r.best_normalized);
  j["unit_normalized"] = to_json(r.unit_normalized);
  j["candidates"] = r.candidates;
  j["witness_label"] = r.witness_label;
  j["witness"] = to_json(r.witness);
  return j;
}

Json to_json(const ExtremalSearchState& r) {
  Json j;
  j["objective"] = to_json(r.objective);
  j["objective_float"] = r.objective.to_double();
  j["unit_objective"] = to_json(r.unit_objective);
  j["gain_over_unit"] = r.objective.to_double() / r.unit_objective.to_double();
  j["restart"] = r.restart;
  j["restart_seed"] = r.restart_seed;
  j["iterations"] = r.iterations;
  j["accepted_moves"] = r.accepted;
  j["weights"] = to_json(r.weights);
  return j;
}

Json to_json(const LinearFit& f) {
  Json j;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r_squared"] = f.r_squared;
  j["residuals"] = f.residuals;
  j["loo_slope_min"] = f.loo_min;
  j["loo_slope_max"] = f.loo_max;
  return j;
}

Json to_json(const ExponentFitReport& r) {
  Json j;
  j["s"] = r.s;
  j["exponents"] = to_json(r.exponents);
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"N", s.N},
                       {"raw_moment", to_json(s.raw_moment)},
                       {"normalized", to_json(s.normalized)},
                       {"method", to_string(s.method)}});
  j["samples"] = std::move(samples);
  j["fit"] = to_json(r.fit);
  j["target_theorem"] = r.target_theorem;
  j["target_conjecture"] = r.target_conjecture;
  j["slope_minus_target"] = r.fit.slope - r.target_theorem;
  j["lambda_hat"] = r.lambda_hat;
  j["Lambda_hat"] = r.Lambda_hat;
  return j;
}

Json to_json(const RestrictionResult& r) {
  Json j;
  j["p"] = r.p;
  j["N"] = r.N;
  j["exponents"] = to_json(r.exponents);
  j["A_hat"] = r.A_hat;
  j["best_trial"] = r.best_trial;
  j["K_hat_unit"] = r.K_hat_unit;
  j["duality_gap"] = r.duality_gap;
  j["max_pairing_error"] = r.max_pairing_error;
  j["max_chain_excess"] = r.max_chain_excess;
  j["max_quadrature_error"] = r.max_quadrature_error;
  Json trials = Json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"ratio", t.ratio},
                      {"coefficient_mass", t.coefficient_mass},
                      {"pairing", t.pairing},
                      {"norm_p", t.norm_p},
                      {"norm_dual", t.norm_dual},
                      {"holder_bound", t.holder_bound},
                      {"quadrature_error", t.quadrature_error}});
  j["trials"] = std::move(trials);
  return j;
}

Json to_json(const PrimeSelection& r) {
  Json j;
  j["prime"] = r.prime;
  j["M"] = r.M;
  j["candidates"] = r.candidates;
  j["warning"] = r.warning;
  j["message"] = r.message;
  return j;
}

Json to_json(const CongruenceProfile& r) {
  Json j;
  j["prime"] = r.prime;
  j["level"] = r.level;
  j["X"] = r.X;
  Json e = Json::array();
  for (const auto& v : r.energies) e.push_back(to_json(v));
  j["energies"] = std::move(e);
  j["total"] = to_json(r.total());
  return j;
}

Json to_json(const WellConditionedTuples& r) {
  Json j;
  j["prime"] = r.prime;
  j["level"] = r.level;
  j["xi"] = r.xi;
  j["count"] = r.tuples.size();
  j["tuples"] = r.tuples;
  return j;
}

Json to_json(const MixedMomentResult& r) {
  Json j;
  j["xi"] = r.xi;
  j["eta"] = r.eta;
  j["value"] = to_json(r.value);
  j["raw"] = to_json(r.raw);
  j["distinct_keys"] = r.distinct_keys ? Json(*r.distinct_keys) : Json(nullptr);
  return j;
}

Json to_json(const AggregateResult& r) {
  Json j;
  j["kind"] = r.kind == MixedKind::I ? "I" : "K";
  j["value"] = to_json(r.value);
  j["value_float"] = r.value.to_double();
  j["weight_sum"] = to_json(r.weight_sum);
  j["bracket"] = r.bracket ? Json(*r.bracket) : Json(nullptr);
  j["M"] = r.M ? Json(*r.M) : Json(nullptr);
  if (r.bracket && *r.bracket > 0) j["ratio_to_bracket"] = r.value.to_double() / *r.bracket;
  Json terms = Json::array();
  for (const auto& t : r.terms) terms.push_back(to_json(t));
  j["terms"] = std::move(terms);
  return j;
}

Json to_json(const Lemma51Audit& r) {
  Json j;
  j["k"] = r.k;
  j["prime"] = r.prime;
  j["a"] = r.a;
  j["b"] = r.b;
  j["max_cardinality"] = r.max_cardinality;
  j["bound"] = to_json(r.bound);
  j["argmax"] = {{"xi", r.argmax_xi}, {"eta", r.argmax_eta}, {"m", r.argmax_m}};
  j["nonempty_boxes"] = r.boxes;
  j["pass"] = r.pass;
  return j;
}

Json to_json(const TSplit& r) {
  Json j;
  j["T1"] = to_json(r.T1);
  j["T2"] = to_json(r.T2);
  j["I"] = to_json(r.I);
  j["consistent"] = r.consistent;
  return j;
}

Json to_json(const Arc& a) { return {{"q", a.q}, {"a", a.a}}; }

Json to_json(const ArcDecomposition& d, bool with_arcs) {
  Json j;
  j["X"] = d.X();
  j["k"] = d.k();
  j["L"] = d.L();
  Json radii = Json::array();
  for (int i = 1; i <= d.k(); ++i) radii.push_back(d.radius(i));
  j["radii"] = std::move(radii);
  j["arc_count"] = d.arcs().size();
  j["measure_bound"] = d.measure_bound();
  j["disjoint"] = d.disjoint();
  if (with_arcs) {
    Json arcs = Json::array();
    for (const auto& a : d.arcs()) arcs.push_back(to_json(a));
    j["arcs"] = std::move(arcs);
  }
  return j;
}

Json to_json(const MinorSample& r) {
  Json j;
  j["max_abs"] = r.max_abs;
  j["location"] = r.location;
  j["evaluated"] = r.evaluated;
  j["skipped"] = r.skipped;
  j["reference"] = r.reference;
  j["ratio"] = r.reference > 0 ? r.max_abs / r.reference : 0.0;
  return j;
}

Json to_json(const MajorArcMoment& r) {
  Json j;
  j["total"] = r.total;
  j["box_integral"] = r.box_integral;
  j["singular_partial"] = r.singular_partial;
  j["singular_integral"] = r.singular_integral;
  j["factorized"] = r.factorized;
  j["relative_gap"] = r.relative_gap;
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"q", row.arc.q}, {"a", row.arc.a}, {"value", row.value}});
  j["arcs"] = std::move(rows);
  return j;
}

std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!out.empty()) out += ' ';
      out += cell(e);
    }
    return out;
  }
  return v.dump();
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += quote(cells[i]);
  }
  return out + "\n";
}

std::string fmt(double v) {
  return Json(v).dump();
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out = join_row(t.columns);
  for (const auto& r : t.rows) out += join_row(r);
  return out;
}

Table flatten_table(const Json& doc) {
  Table t{{"field", "value"}, {}};
  const Json flat = doc.flatten();
  for (auto it = flat.begin(); it != flat.end(); ++it) t.rows.push_back({it.key(), cell(it.value())});
  return t;
}

Table sweep_table(const ExponentFitReport& r) {
  Table t{{"N", "raw", "normalized", "target_power", "ratio"}, {}};
  for (const auto& s : r.samples) {
    double power = std::pow(static_cast<double>(s.N), r.target_theorem);
    t.rows.push_back({std::to_string(s.N), s.raw_moment.to_string(), s.normalized.to_string(), fmt(power),
                      fmt(s.normalized.to_double() / power)});
  }
  return t;
}

Table arc_table(const ArcDecomposition& d) {
  Table t{{"q", "a"}, {}};
  for (const auto& a : d.arcs()) t.rows.push_back({std::to_string(a.q), cell(Json(a.a))});
  return t;
}

Table moment_table(const MajorArcMoment& m) {
  Table t{{"q", "a", "arc_integral"}, {}};
  for (const auto& r : m.rows) t.rows.push_back({std::to_string(r.arc.q), cell(Json(r.arc.a)), fmt(r.value)});
  t.rows.push_back({"total", "", fmt(m.total)});
  t.rows.push_back({"factorized", "", fmt(m.factorized)});
  return t;
}

}  // namespace mcurve
