#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aoi_recruit/core_model.hpp"
#include "aoi_recruit/mdp_solver.hpp"
#include "aoi_recruit/policy_structure.hpp"

namespace aoi_recruit {

/// Any deterministic stationary policy whose action is constant beyond its head:
/// age s <= head.size() uses head[s - 1], every older age uses `tail`.
struct StationaryPolicy {
  std::vector<ActionSet> head;
  ActionSet tail;

  ActionSet at(Age s) const noexcept { return s <= head.size() ? head[s - 1] : tail; }
};

StationaryPolicy to_stationary(const ThresholdPolicy& policy);
/// The last tabular entry is repeated for every older age.
StationaryPolicy to_stationary(std::span<const ActionSet> tabular);

/// pi(s) for s <= head.size() explicitly, then pi(tail_start + k) = tail_first * ratio^k.
struct StationaryDistribution {
  std::vector<double> head;
  Age tail_start = 1;
  double tail_first = 0.0;
  double tail_ratio = 0.0;

  double at(Age s) const noexcept;
  double head_mass() const noexcept;
  double tail_mass() const noexcept;
};

StationaryDistribution stationary_distribution(const StationaryPolicy& policy,
                                               const ProblemInstance& instance);
StationaryDistribution stationary_distribution(const ThresholdPolicy& policy,
                                               const ProblemInstance& instance);

struct EvaluationReport {
  double average_aoi = 0.0;
  double average_recruit_cost = 0.0;
  double payoff = 0.0;
  double tail_mass_dropped = 0.0;
};

/// Exact long-run averages; the geometric tail is summed in closed form.
EvaluationReport evaluate_policy_exact(const StationaryPolicy& policy,
                                       const ProblemInstance& instance);
EvaluationReport evaluate_policy_exact(const ThresholdPolicy& policy,
                                       const ProblemInstance& instance);

struct SimResult {
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  double empirical_payoff = 0.0;
  double payoff_se = 0.0;
  double empirical_avg_aoi = 0.0;
  double aoi_se = 0.0;
  double empirical_avg_cost = 0.0;
  double cost_se = 0.0;
  std::uint64_t update_count = 0;
};

inline constexpr std::size_t kDefaultSimBatches = 100;

/// Slot-by-slot Monte Carlo of the recruitment workflow (mt19937_64). Standard errors
/// come from `batches` equal-length batch means.
SimResult simulate(const StationaryPolicy& policy, const ProblemInstance& instance,
                   std::uint64_t horizon, std::uint64_t seed,
                   std::size_t batches = kDefaultSimBatches);
SimResult simulate(const ThresholdPolicy& policy, const ProblemInstance& instance,
                   std::uint64_t horizon, std::uint64_t seed,
                   std::size_t batches = kDefaultSimBatches);

ThresholdPolicy baseline_zero_wait(const ProblemInstance& instance);
/// Optimal policy of the instance with every sensing capability taken as 1.
ThresholdPolicy baseline_draim(const ProblemInstance& instance, const SolverOptions& options = {});
/// Optimal policy of the instance with every arrival probability taken as 1.
ThresholdPolicy baseline_auction(const ProblemInstance& instance,
                                 const SolverOptions& options = {});

/// The optimal (ENTER) threshold policy: bound-based RVI with truncation adaptation.
ThresholdPolicy enter_policy(const ProblemInstance& instance, const SolverOptions& options = {});

struct OracleResult {
  ThresholdPolicy policy;
  double payoff = 0.0;
  std::uint64_t candidates = 0;
};

inline constexpr std::uint64_t kOracleCandidateLimit = 10'000'000;

/// Number of nondecreasing threshold vectors with 1 <= theta_k <= bounds[k]
/// (saturates at UINT64_MAX).
std::uint64_t count_threshold_candidates(const ThresholdBounds& bounds);

/// Evaluates every nondecreasing threshold vector inside the bound box over the
/// instance's action order and returns the best one (first found on ties).
OracleResult brute_force_best_threshold_policy(const ProblemInstance& instance,
                                               const ThresholdBounds& bounds,
                                               std::uint64_t max_candidates =
                                                   kOracleCandidateLimit);

/// Same search space as the brute force, solved exactly by fractional programming:
/// the renewal cost ratio is minimized by Dinkelbach iterations over a backward
/// recursion on (age, order step). Used where the box is too large to enumerate.
OracleResult renewal_best_threshold_policy(const ProblemInstance& instance,
                                           const ThresholdBounds& bounds);

}  // namespace aoi_recruit
