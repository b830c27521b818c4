#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "aoi_recruit/error.hpp"

namespace aoi_recruit {

/// Age of information, in slots. The smallest age is 1.
using Age = std::uint64_t;

inline constexpr std::size_t kMaxTypes = 30;

struct VehicleType {
  std::size_t id = 0;
  double arrival_prob = 0.0;  ///< p_n, per slot
  double mean_cost = 0.0;     ///< paid per recruited arrival
  double mean_sensing = 0.0;  ///< probability the delivered data is qualified
};

struct ProblemInstance {
  std::vector<VehicleType> types;
  double beta = 0.5;          ///< weight of freshness against recruitment cost
  double epsilon_unit = 1.0;  ///< money per squared slot
  std::string label;

  std::size_t size() const noexcept { return types.size(); }
};

/// Builds an instance with contiguous ids from (p, c, r) triples.
struct TypeParams {
  double arrival_prob;
  double mean_cost;
  double mean_sensing;
};
ProblemInstance make_instance(const std::vector<TypeParams>& types, double beta,
                              double epsilon_unit = 1.0, std::string label = {});

/// Throws Error{invalid_instance} when an invariant of the instance is broken.
void validate(const ProblemInstance& instance);

/// A recruitment decision: the subset of vehicle types that are recruited.
class ActionSet {
 public:
  constexpr ActionSet() = default;
  constexpr explicit ActionSet(std::uint32_t bits) : bits_(bits) {}

  static ActionSet full(std::size_t n) {
    return ActionSet(n >= 32 ? ~0u : ((1u << n) - 1u));
  }
  static ActionSet of(std::initializer_list<std::size_t> ids);

  constexpr std::uint32_t bits() const noexcept { return bits_; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool contains(std::size_t id) const noexcept {
    return id < 32 && ((bits_ >> id) & 1u) != 0;
  }
  std::size_t size() const noexcept;
  std::vector<std::size_t> members() const;

  ActionSet with(std::size_t id) const { return ActionSet(bits_ | (1u << id)); }
  ActionSet operator|(ActionSet o) const noexcept { return ActionSet(bits_ | o.bits_); }
  ActionSet operator&(ActionSet o) const noexcept { return ActionSet(bits_ & o.bits_); }

  /// Canonical order: fewer members first, then by bitmask value.
  std::strong_ordering operator<=>(const ActionSet& o) const;
  constexpr bool operator==(const ActionSet& o) const noexcept { return bits_ == o.bits_; }

  /// "{}" or "{0,2}".
  std::string to_string() const;

 private:
  std::uint32_t bits_ = 0;
};

struct ActionStats {
  ActionSet action;
  double success_prob = 0.0;
  double expected_cost = 0.0;
};

double success_probability(const ProblemInstance& instance, ActionSet action);
double expected_recruit_cost(const ProblemInstance& instance, ActionSet action);

/// eps * [Q (d^2 + 2d) - (1 + d)^2]: minus the expected squared age of the next slot.
double freshness_gain(double success_prob, Age aoi, double epsilon_unit);
double expected_freshness_gain(const ProblemInstance& instance, ActionSet action, Age aoi);

/// Per-slot cost (1 - beta) E_a - beta G_a(aoi); payoff is its negated average.
double immediate_cost(const ProblemInstance& instance, ActionSet action, Age aoi);
double immediate_cost(const ProblemInstance& instance, const ActionStats& stats, Age aoi);

ActionStats action_stats(const ProblemInstance& instance, ActionSet action);

/// Every action with its (Q, E), sorted by Q ascending, then E, then canonical set
/// order. Nothing is removed.
std::vector<ActionStats> enumerate_all_action_stats(const ProblemInstance& instance);

/// The ascending-Q action sequence used by the structural solvers: among actions whose
/// success probabilities agree (within kSameProbTolerance) only the cheapest survives.
/// Output is strictly increasing in success_prob and starts with the empty action.
std::vector<ActionStats> enumerate_action_stats(const ProblemInstance& instance);

inline constexpr double kSameProbTolerance = 1e-12;

}  // namespace aoi_recruit
