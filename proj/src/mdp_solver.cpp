#include "aoi_recruit/mdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aoi_recruit {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kValueFloor = 1e-12;

void check_options(const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw Error(Errc::parameter, "tolerance must be > 0");
  if (!(options.aperiodicity > 0.0 && options.aperiodicity <= 1.0)) {
    throw Error(Errc::parameter, "aperiodicity must lie in (0, 1]");
  }
  if (options.max_iterations == 0) throw Error(Errc::parameter, "max_iterations must be >= 1");
}

// Largest finite bound, or nullopt when bounds are unavailable (beta = 0).
std::optional<ThresholdBounds> try_bounds(const ProblemInstance& instance,
                                          const ActionOrder& order) {
  if (!(instance.beta > 0.0)) return std::nullopt;
  return threshold_upper_bounds(instance, order);
}

Age extraction_horizon(Age truncation, std::uint64_t iterations,
                       const std::optional<ThresholdBounds>& bounds) {
  // Ages at or above M - I are distorted by the cap. Ages beyond the last bound
  // always pick the final action, so reading up to that bound is always safe.
  Age horizon = truncation > iterations + 1 ? truncation - iterations - 1 : 0;
  if (bounds && !bounds->bounds.empty()) {
    horizon = std::max(horizon, std::min<Age>(truncation, bounds->bounds.back()));
  }
  return std::max<Age>(horizon, 1);
}

// One solver differs from another only in where the scan of the ascending action
// list starts at each age. `first(s, prev)` returns that start given the index
// chosen at age s - 1 in the same sweep (0 at age 1).
template <class FirstCandidate>
SolverResult relative_value_iteration(const TruncatedMdp& mdp,
                                      std::span<const ActionStats> actions,
                                      const SolverOptions& options, SolverKind kind,
                                      FirstCandidate first) {
  const auto& instance = mdp.instance();
  const Age m = mdp.truncation();
  const std::size_t na = actions.size();
  const double beta = instance.beta;
  const double eps = instance.epsilon_unit;
  const double tau = options.aperiodicity;

  std::vector<double> weighted_cost(na), prob(na);
  for (std::size_t a = 0; a < na; ++a) {
    weighted_cost[a] = (1.0 - beta) * actions[a].expected_cost;
    prob[a] = actions[a].success_prob;
  }
  // u(s, a) = weighted_cost[a] - Q_a * gain_slope[s] + age_loss[s]
  std::vector<double> gain_slope(m), age_loss(m);
  for (Age s = 1; s <= m; ++s) {
    const double d = static_cast<double>(s);
    gain_slope[s - 1] = beta * eps * (d * d + 2.0 * d);
    age_loss[s - 1] = beta * eps * (d + 1.0) * (d + 1.0);
  }

  std::vector<double> value(m, 0.0), next_value(m, 0.0);
  std::vector<std::size_t> choice(m, 0);
  SolverResult result;
  result.solver = kind;
  result.truncation = m;

  bool converged = false;
  std::uint64_t it = 0;
  while (it < options.max_iterations) {
    ++it;
    const double ref = value[0];
    std::size_t prev = 0;
    double worst = 0.0;
    for (Age s = 1; s <= m; ++s) {
      const double v_next = value[mdp.next_age(s) - 1];
      const double slope = gain_slope[s - 1] + v_next - ref;
      std::size_t best = first(s, prev);
      double best_val = weighted_cost[best] - prob[best] * slope;
      for (std::size_t a = best + 1; a < na; ++a) {
        const double v = weighted_cost[a] - prob[a] * slope;
        if (v < best_val - kTieTolerance) {
          best_val = v;
          best = a;
        }
      }
      if (options.check_monotonicity && s > 1 && prob[best] < prob[prev]) {
        if (options.strict_monotonicity) {
          throw Error(Errc::structural_violation,
                      "success probability of the chosen action drops at age " +
                          std::to_string(s));
        }
        ++result.monotonicity_violations;
      }
      const double backup = best_val + age_loss[s - 1] + v_next;
      const double updated = tau * backup + (1.0 - tau) * value[s - 1] - ref;
      next_value[s - 1] = updated;
      choice[s - 1] = best;
      prev = best;
      const double denom = std::max(std::abs(updated), kValueFloor);
      worst = std::max(worst, std::abs(updated - value[s - 1]) / denom);
    }
    value.swap(next_value);
    if (worst <= options.tolerance) {
      converged = true;
      break;
    }
  }

  result.iterations = it;
  result.value = value;
  result.average_cost_estimate = value[0] / tau;
  result.tabular_policy.resize(m);
  for (Age s = 1; s <= m; ++s) result.tabular_policy[s - 1] = actions[choice[s - 1]].action;
  if (!converged) {
    throw CapExceededError("no convergence after " + std::to_string(it) + " sweeps",
                           std::move(result));
  }
  return result;
}

void finish(SolverResult& result, const TruncatedMdp& mdp, const ActionOrder& order) {
  const auto bounds = try_bounds(mdp.instance(), order);
  const Age horizon = extraction_horizon(result.truncation, result.iterations, bounds);
  result.thresholds = extract_thresholds(result.tabular_policy, order, horizon);
}

template <class F>
std::chrono::nanoseconds timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                              start);
}

}  // namespace

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::rvi: return "rvi";
    case SolverKind::srvi: return "srvi";
    case SolverKind::bound_rvi: return "bound-rvi";
  }
  return "?";
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "rvi") return SolverKind::rvi;
  if (name == "srvi") return SolverKind::srvi;
  if (name == "bound-rvi") return SolverKind::bound_rvi;
  throw Error(Errc::parameter, "unknown solver '" + std::string(name) +
                                   "' (expected rvi, srvi or bound-rvi)");
}

TruncatedMdp::TruncatedMdp(ProblemInstance instance, Age truncation)
    : instance_(std::move(instance)), truncation_(truncation) {
  if (truncation_ < 2) throw Error(Errc::parameter, "truncation M must be >= 2");
  all_actions_ = enumerate_all_action_stats(instance_);
  actions_ = enumerate_action_stats(instance_);
}

std::vector<std::pair<Age, double>> TruncatedMdp::transition(Age s,
                                                            const ActionStats& action) const {
  if (s < 1 || s > truncation_) {
    throw Error(Errc::domain, "age " + std::to_string(s) + " outside 1.." +
                                  std::to_string(truncation_));
  }
  const double q = action.success_prob;
  const Age next = next_age(s);
  std::vector<std::pair<Age, double>> out;
  if (next == 1) {
    out.emplace_back(1, 1.0);
    return out;
  }
  if (q > 0.0) out.emplace_back(1, q);
  if (q < 1.0) out.emplace_back(next, 1.0 - q);
  return out;
}

std::vector<std::pair<Age, double>> TruncatedMdp::transition(Age s, ActionSet action) const {
  return transition(s, action_stats(instance_, action));
}

double TruncatedMdp::cost(Age s, const ActionStats& action) const {
  return immediate_cost(instance_, action, s);
}

TruncatedMdp build_truncated_mdp(const ProblemInstance& instance, Age truncation) {
  return TruncatedMdp(instance, truncation);
}

std::size_t ThresholdPolicy::step_at(Age s) const noexcept {
  std::size_t k = 0;
  while (k < thresholds.size() && thresholds[k] <= s) ++k;
  return k;
}

Age ThresholdPolicy::last_threshold() const noexcept {
  return thresholds.empty() ? 1 : thresholds.back();
}

SolverResult rvi_solve(const TruncatedMdp& mdp, const SolverOptions& options) {
  check_options(options);
  SolverResult result;
  const auto& actions = mdp.all_actions();
  const auto wall = timed([&] {
    result = relative_value_iteration(mdp, actions, options, SolverKind::rvi,
                                      [](Age, std::size_t) { return std::size_t{0}; });
  });
  finish(result, mdp, optimal_action_order(mdp.actions()));
  result.wall_time = wall;
  return result;
}

SolverResult srvi_solve(const TruncatedMdp& mdp, const SolverOptions& options) {
  check_options(options);
  SolverResult result;
  const auto& actions = mdp.actions();
  const auto wall = timed([&] {
    result = relative_value_iteration(mdp, actions, options, SolverKind::srvi,
                                      [](Age, std::size_t prev) { return prev; });
  });
  finish(result, mdp, optimal_action_order(actions));
  result.wall_time = wall;
  return result;
}

SolverResult bound_based_rvi_solve(const TruncatedMdp& mdp, const SolverOptions& options) {
  check_options(options);
  const auto& instance = mdp.instance();
  const Age m = mdp.truncation();
  SolverResult result;
  ActionOrder order;
  std::optional<ThresholdBounds> bounds;
  const auto wall = timed([&] {
    order = optimal_action_order(mdp.actions());
    bounds = try_bounds(instance, order);
    if (bounds && !bounds->bounds.empty() && m <= bounds->bounds.back()) {
      throw Error(Errc::parameter, "truncation M = " + std::to_string(m) +
                                       " must exceed the largest threshold bound " +
                                       std::to_string(bounds->bounds.back()));
    }
    // lowest[s - 1]: first order index allowed at age s by the bounds.
    std::vector<std::size_t> lowest(m, 0);
    if (bounds) {
      std::size_t k = 0;
      for (Age s = 1; s <= m; ++s) {
        while (k < bounds->bounds.size() && bounds->bounds[k] <= s) ++k;
        lowest[s - 1] = k;
      }
    }
    result = relative_value_iteration(
        mdp, order.steps, options, SolverKind::bound_rvi,
        [&lowest](Age s, std::size_t prev) { return std::max(lowest[s - 1], prev); });
  });
  const auto horizon = extraction_horizon(m, result.iterations, bounds);
  result.thresholds = extract_thresholds(result.tabular_policy, order, horizon);
  result.wall_time = wall;
  return result;
}

SolverResult bound_based_rvi_solve(const ProblemInstance& instance, Age truncation,
                                   const SolverOptions& options) {
  return bound_based_rvi_solve(TruncatedMdp(instance, truncation), options);
}

SolverResult solve(const TruncatedMdp& mdp, SolverKind kind, const SolverOptions& options) {
  switch (kind) {
    case SolverKind::rvi: return rvi_solve(mdp, options);
    case SolverKind::srvi: return srvi_solve(mdp, options);
    case SolverKind::bound_rvi: return bound_based_rvi_solve(mdp, options);
  }
  throw Error(Errc::parameter, "unknown solver");
}

SolverResult solve_with_truncation_adapt(const ProblemInstance& instance,
                                         const SolverOptions& options,
                                         const AdaptOptions& adapt) {
  validate(instance);
  const auto order = optimal_action_order(instance);
  const auto bounds = try_bounds(instance, order);
  const Age largest_bound = bounds && !bounds->bounds.empty() ? bounds->bounds.back() : 1;
  Age m = adapt.initial_truncation ? *adapt.initial_truncation : largest_bound + adapt.margin;
  if (adapt.solver == SolverKind::bound_rvi) m = std::max(m, largest_bound + 1);
  m = std::max<Age>(m, 2);

  std::vector<AdaptRound> trace;
  std::size_t failures = 0;
  for (std::size_t round = 0; round < adapt.max_rounds; ++round) {
    auto result = solve(TruncatedMdp(instance, m), adapt.solver, options);
    const Age theta_last = result.thresholds.last_threshold();
    const bool reached = theta_last != kNever;
    // M >= theta_last + I, taken as non-strict. Without bounds (beta = 0) never
    // recruiting is optimal and there is no threshold for the cap to distort.
    const bool ok = reached ? m >= theta_last && m - theta_last >= result.iterations : !bounds;
    trace.push_back(AdaptRound{m, result.iterations, theta_last, ok});
    if (ok) {
      result.adaptation = std::move(trace);
      return result;
    }
    ++failures;
    Age next = (reached ? theta_last : largest_bound) + result.iterations + adapt.margin;
    if (failures >= 2) next = std::max(next, 2 * m);
    m = std::max(next, m + 1);
  }
  throw Error(Errc::adaptation_failure, "truncation did not settle within " +
                                            std::to_string(adapt.max_rounds) + " rounds");
}

ThresholdPolicy extract_thresholds(std::span<const ActionSet> tabular, const ActionOrder& order,
                                   Age horizon) {
  if (order.steps.empty()) throw Error(Errc::parameter, "empty action order");
  ThresholdPolicy policy;
  policy.order = order;
  const std::size_t steps = order.size();
  policy.thresholds.assign(steps - 1, kNever);
  const Age limit = std::min<Age>(horizon, tabular.size());
  std::size_t prev = 0;
  for (Age s = 1; s <= limit; ++s) {
    const auto action = tabular[s - 1];
    const auto k = order.index_of(action);
    if (k == steps) {
      throw Error(Errc::structural_violation,
                  "action " + action.to_string() + " at age " + std::to_string(s) +
                      " is not in the action order");
    }
    if (k < prev) {
      throw Error(Errc::structural_violation,
                  "policy steps back from " + order.steps[prev].action.to_string() + " to " +
                      action.to_string() + " at age " + std::to_string(s));
    }
    for (std::size_t j = prev; j < k; ++j) policy.thresholds[j] = s;
    prev = k;
  }
  return policy;
}

}  // namespace aoi_recruit
