#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "mcurve/circle.hpp"
#include "mcurve/congruencing.hpp"
#include "mcurve/constants.hpp"
#include "mcurve/meanvalue.hpp"

namespace mcurve {

using Json = nlohmann::ordered_json;

/// Exact numbers become decimal strings ("p" or "p/q"), floats stay numbers.
Json to_json(const Number& v);
Json to_json(const mpz_class& v);
Json to_json(const ExponentSet& es);
Json to_json(const WeightSequence& w);
Json to_json(const MeanValueResult& r);
Json to_json(const StrichartzResult& r);
Json to_json(const ExtremalSearchState& r);
Json to_json(const LinearFit& f);
Json to_json(const ExponentFitReport& r);
Json to_json(const RestrictionResult& r);
Json to_json(const PrimeSelection& r);
Json to_json(const CongruenceProfile& r);
Json to_json(const WellConditionedTuples& r);
Json to_json(const MixedMomentResult& r);
Json to_json(const AggregateResult& r);
Json to_json(const Lemma51Audit& r);
Json to_json(const TSplit& r);
Json to_json(const Arc& a);
Json to_json(const ArcDecomposition& d, bool with_arcs);
Json to_json(const MinorSample& r);
Json to_json(const MajorArcMoment& r);
Json complex_json(Complex z);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 quoting where needed, "\n" line ends.
std::string to_csv(const Table& t);
/// Two columns (field, value), one row per leaf of the flattened document.
Table flatten_table(const Json& doc);
std::string cell(const Json& v);

Table sweep_table(const ExponentFitReport& r);
Table arc_table(const ArcDecomposition& d);
Table moment_table(const MajorArcMoment& m);

}  // namespace mcurve
