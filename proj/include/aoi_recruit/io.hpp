#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "aoi_recruit/core_model.hpp"
#include "aoi_recruit/mdp_solver.hpp"
#include "aoi_recruit/policy_eval.hpp"
#include "aoi_recruit/policy_structure.hpp"

namespace aoi_recruit {

using Json = nlohmann::json;

// Instance documents:
//   { "label": str, "beta": num, "epsilon_unit": num,
//     "types": [ { "arrival_prob": num, "mean_cost": num, "mean_sensing": num }, ... ] }
// "label" and "epsilon_unit" are optional; any other key is rejected.
ProblemInstance instance_from_json(const Json& doc);
Json to_json(const ProblemInstance& instance);
ProblemInstance load_instance(const std::filesystem::path& path);

Json to_json(ActionSet action);
ActionSet action_from_json(const Json& ids, std::size_t type_count);

Json to_json(const ActionOrder& order);
Json to_json(const ThresholdBounds& bounds, const ActionOrder& order);
Json to_json(const StructureClass& cls);

/// [{ "from": [ids], "to": [ids], "theta": int|null }, ...]; null marks kNever.
Json thresholds_to_json(const ThresholdPolicy& policy);
/// Accepts either a bare threshold array or any object holding a "thresholds" key
/// (a saved solve result, for instance). Q and E are recomputed from the instance.
ThresholdPolicy policy_from_json(const Json& doc, const ProblemInstance& instance);

Json to_json(const SolverResult& result);
Json to_json(const EvaluationReport& report);
Json to_json(const SimResult& result);

Json read_json_file(const std::filesystem::path& path);

/// Decimal with 12 significant digits.
std::string format_number(double x);

}  // namespace aoi_recruit
