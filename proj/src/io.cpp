#include "aoi_recruit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace aoi_recruit {

namespace {

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw Error(Errc::invalid_instance, where + ": unknown key '" + key + "'");
    }
  }
}

double number_at(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(Errc::invalid_instance, where + ": missing key '" + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw Error(Errc::invalid_instance, where + ": '" + key + "' must be a number");
  }
  return v.get<double>();
}

Json theta_json(Age theta) { return theta == kNever ? Json(nullptr) : Json(theta); }

}  // namespace

ProblemInstance instance_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(Errc::invalid_instance, "instance must be a JSON object");
  reject_unknown_keys(doc, {"label", "beta", "epsilon_unit", "types"}, "instance");
  ProblemInstance instance;
  if (doc.contains("label")) {
    if (!doc.at("label").is_string()) {
      throw Error(Errc::invalid_instance, "instance: 'label' must be a string");
    }
    instance.label = doc.at("label").get<std::string>();
  }
  instance.beta = number_at(doc, "beta", "instance");
  if (doc.contains("epsilon_unit")) {
    instance.epsilon_unit = number_at(doc, "epsilon_unit", "instance");
  }
  if (!doc.contains("types") || !doc.at("types").is_array()) {
    throw Error(Errc::invalid_instance, "instance: 'types' must be an array");
  }
  std::size_t id = 0;
  for (const auto& t : doc.at("types")) {
    const auto where = "types[" + std::to_string(id) + "]";
    if (!t.is_object()) throw Error(Errc::invalid_instance, where + " must be an object");
    reject_unknown_keys(t, {"arrival_prob", "mean_cost", "mean_sensing"}, where);
    instance.types.push_back(VehicleType{id, number_at(t, "arrival_prob", where),
                                         number_at(t, "mean_cost", where),
                                         number_at(t, "mean_sensing", where)});
    ++id;
  }
  validate(instance);
  return instance;
}

Json to_json(const ProblemInstance& instance) {
  Json types = Json::array();
  for (const auto& t : instance.types) {
    types.push_back({{"arrival_prob", t.arrival_prob},
                     {"mean_cost", t.mean_cost},
                     {"mean_sensing", t.mean_sensing}});
  }
  return {{"label", instance.label},
          {"beta", instance.beta},
          {"epsilon_unit", instance.epsilon_unit},
          {"types", types}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::parameter, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::invalid_instance, path.string() + ": " + e.what());
  }
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

Json to_json(ActionSet action) {
  Json ids = Json::array();
  for (auto id : action.members()) ids.push_back(id);
  return ids;
}

ActionSet action_from_json(const Json& ids, std::size_t type_count) {
  if (!ids.is_array()) throw Error(Errc::invalid_action, "action must be an array of type ids");
  ActionSet a;
  for (const auto& id : ids) {
    if (!id.is_number_unsigned() || id.get<std::size_t>() >= type_count) {
      throw Error(Errc::invalid_action, "type id " + id.dump() + " is out of range");
    }
    a = a.with(id.get<std::size_t>());
  }
  return a;
}

Json to_json(const ActionOrder& order) {
  Json steps = Json::array();
  for (const auto& s : order.steps) {
    steps.push_back({{"action", to_json(s.action)},
                     {"success_prob", s.success_prob},
                     {"expected_cost", s.expected_cost}});
  }
  return {{"steps", steps}, {"gammas", order.gammas}};
}

Json to_json(const ThresholdBounds& bounds, const ActionOrder& order) {
  Json out = Json::array();
  for (std::size_t k = 0; k < bounds.bounds.size(); ++k) {
    out.push_back({{"from", to_json(order.steps[k].action)},
                   {"to", to_json(order.steps[k + 1].action)},
                   {"gamma", order.gammas[k]},
                   {"bound", theta_json(bounds.bounds[k])}});
  }
  return out;
}

Json to_json(const StructureClass& cls) {
  return {{"structure", std::string(to_string(cls.kind))},
          {"rho", cls.rho},
          {"kappa", cls.kappa},
          {"low_type", cls.low_type},
          {"high_type", cls.high_type},
          {"degenerate", cls.degenerate},
          {"sensing_tie", cls.sensing_tie}};
}

Json thresholds_to_json(const ThresholdPolicy& policy) {
  Json out = Json::array();
  for (std::size_t k = 0; k < policy.thresholds.size(); ++k) {
    out.push_back({{"from", to_json(policy.order.steps[k].action)},
                   {"to", to_json(policy.order.steps[k + 1].action)},
                   {"theta", theta_json(policy.thresholds[k])}});
  }
  return out;
}

ThresholdPolicy policy_from_json(const Json& doc, const ProblemInstance& instance) {
  const Json& list = doc.is_object() && doc.contains("thresholds") ? doc.at("thresholds") : doc;
  if (!list.is_array() || list.empty()) {
    throw Error(Errc::parameter, "policy must hold a non-empty 'thresholds' array");
  }
  ThresholdPolicy policy;
  const auto n = instance.size();
  for (std::size_t k = 0; k < list.size(); ++k) {
    const auto& entry = list[k];
    if (!entry.is_object() || !entry.contains("from") || !entry.contains("to") ||
        !entry.contains("theta")) {
      throw Error(Errc::parameter, "threshold entries need 'from', 'to' and 'theta'");
    }
    const auto from = action_from_json(entry.at("from"), n);
    const auto to = action_from_json(entry.at("to"), n);
    if (k == 0) {
      policy.order.steps.push_back(action_stats(instance, from));
    } else if (!(policy.order.steps.back().action == from)) {
      throw Error(Errc::parameter, "threshold entries must chain: 'from' of entry " +
                                       std::to_string(k) + " differs from the previous 'to'");
    }
    policy.order.steps.push_back(action_stats(instance, to));
    const auto& theta = entry.at("theta");
    Age value = kNever;
    if (!theta.is_null()) {
      if (!theta.is_number_unsigned() || theta.get<Age>() < 1) {
        throw Error(Errc::parameter, "theta must be a positive integer or null");
      }
      value = theta.get<Age>();
    }
    if (!policy.thresholds.empty() && value < policy.thresholds.back()) {
      throw Error(Errc::parameter, "thresholds must be nondecreasing");
    }
    policy.thresholds.push_back(value);
  }
  for (std::size_t k = 0; k + 1 < policy.order.steps.size(); ++k) {
    const auto& a = policy.order.steps[k];
    const auto& b = policy.order.steps[k + 1];
    policy.order.gammas.push_back(b.success_prob > a.success_prob
                                      ? marginal_cost_effectiveness(a, b)
                                      : std::numeric_limits<double>::quiet_NaN());
  }
  return policy;
}

Json to_json(const SolverResult& result) {
  Json out = {{"solver_id", std::string(to_string(result.solver))},
              {"M_used", result.truncation},
              {"iterations", result.iterations},
              {"wall_time_ns", result.wall_time.count()},
              {"thresholds", thresholds_to_json(result.thresholds)},
              {"average_cost_estimate", result.average_cost_estimate}};
  if (!result.adaptation.empty()) {
    Json trace = Json::array();
    for (const auto& r : result.adaptation) {
      trace.push_back({{"M", r.truncation},
                       {"iterations", r.iterations},
                       {"theta_last", theta_json(r.last_threshold)},
                       {"satisfied", r.satisfied}});
    }
    out["adaptation"] = trace;
  }
  return out;
}

Json to_json(const EvaluationReport& report) {
  return {{"average_aoi", report.average_aoi},
          {"average_recruit_cost", report.average_recruit_cost},
          {"payoff", report.payoff},
          {"tail_mass_dropped", report.tail_mass_dropped}};
}

Json to_json(const SimResult& r) {
  return {{"horizon", r.horizon},
          {"seed", r.seed},
          {"empirical_payoff", r.empirical_payoff},
          {"payoff_se", r.payoff_se},
          {"empirical_avg_aoi", r.empirical_avg_aoi},
          {"aoi_se", r.aoi_se},
          {"empirical_avg_cost", r.empirical_avg_cost},
          {"cost_se", r.cost_se},
          {"update_count", r.update_count}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace aoi_recruit
