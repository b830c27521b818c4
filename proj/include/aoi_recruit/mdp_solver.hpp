#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "aoi_recruit/core_model.hpp"
#include "aoi_recruit/policy_structure.hpp"

namespace aoi_recruit {

#ifdef NDEBUG
inline constexpr bool kCheckMonotonicityByDefault = false;
#else
inline constexpr bool kCheckMonotonicityByDefault = true;
#endif

enum class SolverKind { rvi, srvi, bound_rvi };

std::string_view to_string(SolverKind kind) noexcept;
/// Accepts "rvi", "srvi" and "bound-rvi"; throws Error{parameter} otherwise.
SolverKind parse_solver_kind(std::string_view name);

struct SolverOptions {
  /// Stop when max_s |V_new(s) - V(s)| / max(|V_new(s)|, 1e-12) <= tolerance.
  double tolerance = 1e-10;
  std::uint64_t max_iterations = 10'000'000;
  /// Weight tau of the Bellman backup against the previous iterate. Values below 1
  /// make every transition matrix aperiodic; the fixed-point policy does not change.
  double aperiodicity = 0.5;
  /// Count sweeps where Q of the chosen action drops as the age grows.
  bool check_monotonicity = kCheckMonotonicityByDefault;
  /// Throw Error{structural_violation} on the first such drop instead of counting it.
  bool strict_monotonicity = false;
};

/// The age-capped chain: ages 1..M, a failed update at age M stays at M.
class TruncatedMdp {
 public:
  TruncatedMdp(ProblemInstance instance, Age truncation);

  const ProblemInstance& instance() const noexcept { return instance_; }
  Age truncation() const noexcept { return truncation_; }

  /// Every action, ascending in (Q, E, canonical set order).
  const std::vector<ActionStats>& all_actions() const noexcept { return all_actions_; }
  /// Cheapest action per distinct Q, strictly ascending in Q.
  const std::vector<ActionStats>& actions() const noexcept { return actions_; }

  Age next_age(Age s) const noexcept { return s + 1 < truncation_ ? s + 1 : truncation_; }
  /// Nonzero (next age, probability) pairs from age `s`.
  std::vector<std::pair<Age, double>> transition(Age s, const ActionStats& action) const;
  std::vector<std::pair<Age, double>> transition(Age s, ActionSet action) const;
  double cost(Age s, const ActionStats& action) const;

 private:
  ProblemInstance instance_;
  Age truncation_;
  std::vector<ActionStats> all_actions_;
  std::vector<ActionStats> actions_;
};

TruncatedMdp build_truncated_mdp(const ProblemInstance& instance, Age truncation);

/// Threshold-type age-dependent policy over an action order. Age s maps to
/// steps[k] where k counts the thresholds that are <= s. Equal adjacent thresholds
/// mean the action between them is never used; kNever thresholds are never reached.
struct ThresholdPolicy {
  ActionOrder order;
  std::vector<Age> thresholds;

  std::size_t step_at(Age s) const noexcept;
  ActionSet action_at(Age s) const noexcept { return order.steps[step_at(s)].action; }
  /// The switch into the final action, or 1 when the order has a single action.
  Age last_threshold() const noexcept;
};

struct AdaptRound {
  Age truncation = 0;
  std::uint64_t iterations = 0;
  Age last_threshold = 0;
  bool satisfied = false;
};

struct SolverResult {
  SolverKind solver = SolverKind::rvi;
  std::vector<ActionSet> tabular_policy;  ///< [s - 1] -> action chosen at age s
  std::vector<double> value;              ///< [s - 1] -> relative value of age s
  std::uint64_t iterations = 0;
  Age truncation = 0;
  std::chrono::nanoseconds wall_time{0};
  ThresholdPolicy thresholds;
  double average_cost_estimate = 0.0;
  std::uint64_t monotonicity_violations = 0;
  std::vector<AdaptRound> adaptation;

  ActionSet policy_at(Age s) const { return tabular_policy.at(s - 1); }
};

/// Carries the iterate reached when the sweep cap ran out.
class CapExceededError : public Error {
 public:
  CapExceededError(const std::string& what, SolverResult partial)
      : Error(Errc::cap_exceeded, what), partial_(std::move(partial)) {}
  const SolverResult& partial() const noexcept { return partial_; }

 private:
  SolverResult partial_;
};

/// Relative value iteration minimizing over every action at every age.
SolverResult rvi_solve(const TruncatedMdp& mdp, const SolverOptions& options = {});

/// Structural RVI: at age s only actions whose Q is at least that of the action
/// chosen at s - 1 in the same sweep are scanned.
SolverResult srvi_solve(const TruncatedMdp& mdp, const SolverOptions& options = {});

/// Bound-based RVI: the order and threshold bounds are computed first; each age
/// then scans the order suffix allowed by the bounds, pruned by the action at s - 1.
/// Requires the truncation to exceed the largest bound.
SolverResult bound_based_rvi_solve(const ProblemInstance& instance, Age truncation,
                                   const SolverOptions& options = {});
SolverResult bound_based_rvi_solve(const TruncatedMdp& mdp, const SolverOptions& options = {});

SolverResult solve(const TruncatedMdp& mdp, SolverKind kind, const SolverOptions& options = {});

struct AdaptOptions {
  /// Starting truncation; defaults to the largest bound plus the margin.
  std::optional<Age> initial_truncation;
  Age margin = 64;
  std::size_t max_rounds = 16;
  SolverKind solver = SolverKind::bound_rvi;
};

/// Solves, then grows the truncation until M >= theta_last + I holds.
SolverResult solve_with_truncation_adapt(const ProblemInstance& instance,
                                         const SolverOptions& options = {},
                                         const AdaptOptions& adapt = {});

/// Reads thresholds off a tabular policy (ages 1..horizon). Throws
/// Error{structural_violation} if an action is outside the order or Q drops with age.
ThresholdPolicy extract_thresholds(std::span<const ActionSet> tabular, const ActionOrder& order,
                                   Age horizon);

}  // namespace aoi_recruit
