#pragma once

#include "rumdp/model.hpp"
#include "rumdp/relax.hpp"
#include "rumdp/rvi.hpp"
#include "rumdp/sampling.hpp"
#include "rumdp/stats.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rumdp {

using Json = nlohmann::ordered_json;

/// Raw counts per choice (labelled) and, when present, pooled counts per expression.
Json counts_to_json(const Pmdp& m, const ExpressionIndex& idx, const CountTable& t);
/// Reads the raw counts back; the layout must match the model.
CountTable counts_from_json(const Pmdp& m, const Json& j);

/// Intervals keyed by the printed expression, in index order.
Json intervals_to_json(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals);
IntervalTable intervals_from_json(const Pmdp& m, const ExpressionIndex& idx, const Json& j);

/// Provenance, fallback flag, expression bounds and per-transition intervals; region models list the polytope.
Json uncertain_model_to_json(const Pmdp& m, const ExpressionIndex& idx, const UncertainModel& u);

Json solve_result_to_json(const Mdp& skeleton, const SolveResult& r);

/// Parameter name to value.
Json truth_to_json(const ParameterSpace& ps, const std::vector<double>& values);
std::vector<double> truth_from_json(const ParameterSpace& ps, const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace rumdp
