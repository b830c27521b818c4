#include "aoi_recruit/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace aoi_recruit {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void check_action(const ProblemInstance& instance, ActionSet action) {
  const auto n = instance.size();
  if (n < 32 && (action.bits() >> n) != 0) {
    throw Error(Errc::invalid_action,
                "action " + action.to_string() + " names a type outside 0.." +
                    std::to_string(n == 0 ? 0 : n - 1));
  }
}

void check_age(Age aoi) {
  if (aoi < 1) throw Error(Errc::domain, "age of information must be >= 1");
}

// Q and E are accumulated from the highest member down so that the incremental
// enumeration (which strips the lowest bit) reproduces them bit for bit.
double no_update_prob(const ProblemInstance& instance, ActionSet action) {
  double keep = 1.0;
  for (std::size_t i = instance.size(); i-- > 0;) {
    if (action.contains(i)) {
      const auto& t = instance.types[i];
      keep *= 1.0 - t.mean_sensing * t.arrival_prob;
    }
  }
  return keep;
}

}  // namespace

ProblemInstance make_instance(const std::vector<TypeParams>& types, double beta,
                              double epsilon_unit, std::string label) {
  ProblemInstance instance;
  instance.beta = beta;
  instance.epsilon_unit = epsilon_unit;
  instance.label = std::move(label);
  for (std::size_t i = 0; i < types.size(); ++i) {
    instance.types.push_back(
        VehicleType{i, types[i].arrival_prob, types[i].mean_cost, types[i].mean_sensing});
  }
  validate(instance);
  return instance;
}

void validate(const ProblemInstance& instance) {
  const auto n = instance.size();
  if (n == 0) throw Error(Errc::invalid_instance, "at least one vehicle type is required");
  if (n > kMaxTypes) {
    throw Error(Errc::invalid_instance,
                "at most " + std::to_string(kMaxTypes) + " vehicle types are supported");
  }
  bool can_update = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = instance.types[i];
    const auto where = "type " + std::to_string(i) + ": ";
    if (t.id != i) throw Error(Errc::invalid_instance, where + "ids must be contiguous from 0");
    if (!is_probability(t.arrival_prob)) {
      throw Error(Errc::invalid_instance, where + "arrival_prob must lie in [0, 1]");
    }
    if (!is_probability(t.mean_sensing)) {
      throw Error(Errc::invalid_instance, where + "mean_sensing must lie in [0, 1]");
    }
    if (!std::isfinite(t.mean_cost) || t.mean_cost < 0.0) {
      throw Error(Errc::invalid_instance, where + "mean_cost must be finite and >= 0");
    }
    can_update = can_update || t.arrival_prob * t.mean_sensing > 0.0;
  }
  if (!is_probability(instance.beta)) {
    throw Error(Errc::invalid_instance, "beta must lie in [0, 1]");
  }
  if (!std::isfinite(instance.epsilon_unit) || instance.epsilon_unit <= 0.0) {
    throw Error(Errc::invalid_instance, "epsilon_unit must be finite and > 0");
  }
  if (instance.beta > 0.0 && !can_update) {
    throw Error(Errc::invalid_instance,
                "no vehicle type can ever deliver qualified data; the average cost diverges");
  }
}

ActionSet ActionSet::of(std::initializer_list<std::size_t> ids) {
  ActionSet a;
  for (auto id : ids) a = a.with(id);
  return a;
}

std::size_t ActionSet::size() const noexcept {
  return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<std::size_t> ActionSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < 32; ++i) {
    if (contains(i)) out.push_back(i);
  }
  return out;
}

std::strong_ordering ActionSet::operator<=>(const ActionSet& o) const {
  if (auto c = size() <=> o.size(); c != 0) return c;
  return bits_ <=> o.bits_;
}

std::string ActionSet::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (auto id : members()) {
    if (!first) os << ',';
    os << id;
    first = false;
  }
  os << '}';
  return os.str();
}

double success_probability(const ProblemInstance& instance, ActionSet action) {
  check_action(instance, action);
  if (action.empty()) return 0.0;
  return 1.0 - no_update_prob(instance, action);
}

double expected_recruit_cost(const ProblemInstance& instance, ActionSet action) {
  check_action(instance, action);
  double cost = 0.0;
  for (std::size_t i = instance.size(); i-- > 0;) {
    if (action.contains(i)) {
      cost += instance.types[i].arrival_prob * instance.types[i].mean_cost;
    }
  }
  return cost;
}

double freshness_gain(double success_prob, Age aoi, double epsilon_unit) {
  check_age(aoi);
  const double d = static_cast<double>(aoi);
  return epsilon_unit * (success_prob * (d * d + 2.0 * d) - (1.0 + d) * (1.0 + d));
}

double expected_freshness_gain(const ProblemInstance& instance, ActionSet action, Age aoi) {
  return freshness_gain(success_probability(instance, action), aoi, instance.epsilon_unit);
}

double immediate_cost(const ProblemInstance& instance, const ActionStats& stats, Age aoi) {
  return (1.0 - instance.beta) * stats.expected_cost -
         instance.beta * freshness_gain(stats.success_prob, aoi, instance.epsilon_unit);
}

double immediate_cost(const ProblemInstance& instance, ActionSet action, Age aoi) {
  return immediate_cost(instance, action_stats(instance, action), aoi);
}

ActionStats action_stats(const ProblemInstance& instance, ActionSet action) {
  return ActionStats{action, success_probability(instance, action),
                     expected_recruit_cost(instance, action)};
}

std::vector<ActionStats> enumerate_all_action_stats(const ProblemInstance& instance) {
  validate(instance);
  const auto n = instance.size();
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> keep(count);
  std::vector<ActionStats> out(count);
  keep[0] = 1.0;
  out[0] = ActionStats{ActionSet{}, 0.0, 0.0};
  for (std::size_t mask = 1; mask < count; ++mask) {
    const auto low = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t rest = mask & (mask - 1);
    const auto& t = instance.types[low];
    keep[mask] = keep[rest] * (1.0 - t.mean_sensing * t.arrival_prob);
    out[mask] = ActionStats{ActionSet(static_cast<std::uint32_t>(mask)), 1.0 - keep[mask],
                            out[rest].expected_cost + t.arrival_prob * t.mean_cost};
  }
  std::sort(out.begin(), out.end(), [](const ActionStats& a, const ActionStats& b) {
    if (a.success_prob != b.success_prob) return a.success_prob < b.success_prob;
    if (a.expected_cost != b.expected_cost) return a.expected_cost < b.expected_cost;
    return a.action < b.action;
  });
  return out;
}

std::vector<ActionStats> enumerate_action_stats(const ProblemInstance& instance) {
  const auto all = enumerate_all_action_stats(instance);
  std::vector<ActionStats> out;
  out.reserve(all.size());
  std::size_t i = 0;
  while (i < all.size()) {
    const double group_q = all[i].success_prob;
    std::size_t best = i;
    std::size_t j = i + 1;
    for (; j < all.size() && all[j].success_prob - group_q <= kSameProbTolerance; ++j) {
      const auto& b = all[best];
      const auto& c = all[j];
      if (c.expected_cost < b.expected_cost ||
          (c.expected_cost == b.expected_cost && c.action < b.action)) {
        best = j;
      }
    }
    out.push_back(all[best]);
    i = j;
  }
  return out;
}

}  // namespace aoi_recruit
