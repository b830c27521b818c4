#include "aoi_recruit/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace aoi_recruit {

namespace {

constexpr Age kMaxHead = 100'000'000;

// Sums over ages L, L+1, ... of x^k, (L+k) x^k and (L+k)^2 x^k with x = 1 - q.
struct GeometricMoments {
  double s0, s1, s2;
};

GeometricMoments geometric_moments(Age start, double q) {
  const double l = static_cast<double>(start);
  const double x = 1.0 - q;
  const double s0 = 1.0 / q;
  const double s1 = l / q + x / (q * q);
  const double s2 = l * l / q + 2.0 * l * x / (q * q) + x * (1.0 + x) / (q * q * q);
  return {s0, s1, s2};
}

// Weighted sum of immediate costs over the tail that starts at `start` with
// constant action statistics, relative to unit mass at the first tail age.
double tail_cost(const ProblemInstance& instance, const ActionStats& a, Age start) {
  const auto m = geometric_moments(start, a.success_prob);
  const double q = a.success_prob;
  const double gain = instance.epsilon_unit * ((q - 1.0) * (m.s2 + 2.0 * m.s1) - m.s0);
  return (1.0 - instance.beta) * a.expected_cost * m.s0 - instance.beta * gain;
}

// Unnormalized renewal sums over one cycle started at age 1.
struct CycleSums {
  double mass = 0.0;
  double age = 0.0;
  double cost = 0.0;
  double payoff = 0.0;
};

CycleSums cycle_sums(const StationaryPolicy& policy, const ProblemInstance& instance) {
  CycleSums sums;
  double w = 1.0;
  const Age head = policy.head.size();
  for (Age s = 1; s <= head && w > 0.0; ++s) {
    const auto a = action_stats(instance, policy.head[s - 1]);
    const double d = static_cast<double>(s);
    sums.mass += w;
    sums.age += w * d;
    sums.cost += w * a.expected_cost;
    sums.payoff -= w * immediate_cost(instance, a, s);
    w *= 1.0 - a.success_prob;
  }
  if (w > 0.0) {
    const auto a = action_stats(instance, policy.tail);
    if (!(a.success_prob > 0.0)) {
      throw Error(Errc::divergent_chain, "tail action " + a.action.to_string() +
                                             " never updates the map; the age grows forever");
    }
    const Age start = head + 1;
    const auto m = geometric_moments(start, a.success_prob);
    sums.mass += w * m.s0;
    sums.age += w * m.s1;
    sums.cost += w * a.expected_cost * m.s0;
    sums.payoff -= w * tail_cost(instance, a, start);
  }
  return sums;
}

// Counts nondecreasing vectors theta with 1 <= theta_k <= bounds[k].
std::uint64_t count_candidates(const std::vector<Age>& bounds, std::uint64_t cap) {
  if (bounds.empty()) return 1;
  // ways[v]: number of prefixes ending with value v.
  const Age top = bounds.back();
  if (top > 50'000'000) return cap;
  std::vector<std::uint64_t> ways(top + 1, 0);
  for (Age v = 1; v <= bounds[0]; ++v) ways[v] = 1;
  for (std::size_t k = 1; k < bounds.size(); ++k) {
    std::vector<std::uint64_t> next(top + 1, 0);
    std::uint64_t prefix = 0;
    for (Age v = 1; v <= bounds[k]; ++v) {
      prefix = std::min(cap, prefix + ways[v]);
      next[v] = prefix;
    }
    ways.swap(next);
  }
  std::uint64_t total = 0;
  for (auto w : ways) total = std::min(cap, total + w);
  return total;
}

void check_bounds(const ActionOrder& order, const ThresholdBounds& bounds) {
  if (order.size() < 2) {
    throw Error(Errc::divergent_chain, "no action ever updates the map");
  }
  if (bounds.bounds.size() + 1 != order.size()) {
    throw Error(Errc::parameter, "expected " + std::to_string(order.size() - 1) +
                                     " threshold bounds, got " +
                                     std::to_string(bounds.bounds.size()));
  }
  for (std::size_t k = 0; k < bounds.bounds.size(); ++k) {
    if (bounds.bounds[k] < 1 || (k > 0 && bounds.bounds[k] < bounds.bounds[k - 1])) {
      throw Error(Errc::parameter, "threshold bounds must be >= 1 and nondecreasing");
    }
  }
}

class Enumerator {
 public:
  Enumerator(const ProblemInstance& instance, const ActionOrder& order,
             const std::vector<Age>& bounds)
      : instance_(instance), order_(order), bounds_(bounds), current_(bounds.size(), 1) {}

  void run() { visit(0, 1, 1.0, 0.0, 0.0); }

  std::vector<Age> best;
  double best_payoff = -std::numeric_limits<double>::infinity();
  std::uint64_t leaves = 0;

 private:
  // Ages below `start` are already summed into (mass, cost); `w` is the survival
  // weight of age `start`; step `level` is active from `start` on.
  void visit(std::size_t level, Age start, double w, double mass, double cost) {
    const auto& a = order_.steps[level];
    if (level == bounds_.size()) {
      ++leaves;
      const double total_mass =
          w > 0.0 ? mass + w * geometric_moments(start, a.success_prob).s0 : mass;
      const double total_cost = w > 0.0 ? cost + w * tail_cost(instance_, a, start) : cost;
      const double payoff = -total_cost / total_mass;
      if (payoff > best_payoff) {
        best_payoff = payoff;
        best = current_;
      }
      return;
    }
    for (Age t = start; t <= bounds_[level]; ++t) {
      current_[level] = t;
      visit(level + 1, t, w, mass, cost);
      mass += w;
      cost += w * immediate_cost(instance_, a, t);
      w *= 1.0 - a.success_prob;
    }
  }

  const ProblemInstance& instance_;
  const ActionOrder& order_;
  const std::vector<Age>& bounds_;
  std::vector<Age> current_;
};

double average_cost_of(const ThresholdPolicy& policy, const ProblemInstance& instance) {
  const auto sums = cycle_sums(to_stationary(policy), instance);
  return -sums.payoff / sums.mass;
}

}  // namespace

StationaryPolicy to_stationary(const ThresholdPolicy& policy) {
  Age last_finite = 0;
  for (Age t : policy.thresholds) {
    if (t != kNever) last_finite = std::max(last_finite, t);
  }
  if (last_finite > kMaxHead) {
    throw Error(Errc::parameter, "threshold " + std::to_string(last_finite) + " is too large");
  }
  StationaryPolicy out;
  if (last_finite == 0) {
    out.tail = policy.order.steps.at(policy.step_at(1)).action;
    return out;
  }
  out.head.reserve(last_finite - 1);
  for (Age s = 1; s < last_finite; ++s) out.head.push_back(policy.action_at(s));
  out.tail = policy.action_at(last_finite);
  return out;
}

StationaryPolicy to_stationary(std::span<const ActionSet> tabular) {
  if (tabular.empty()) throw Error(Errc::parameter, "empty tabular policy");
  StationaryPolicy out;
  out.head.assign(tabular.begin(), tabular.end() - 1);
  out.tail = tabular.back();
  return out;
}

double StationaryDistribution::at(Age s) const noexcept {
  if (s >= 1 && s <= head.size()) return head[s - 1];
  if (s < tail_start) return 0.0;
  return tail_first * std::pow(tail_ratio, static_cast<double>(s - tail_start));
}

double StationaryDistribution::head_mass() const noexcept {
  double m = 0.0;
  for (double p : head) m += p;
  return m;
}

double StationaryDistribution::tail_mass() const noexcept {
  if (tail_first == 0.0) return 0.0;
  return tail_first / (1.0 - tail_ratio);
}

StationaryDistribution stationary_distribution(const StationaryPolicy& policy,
                                               const ProblemInstance& instance) {
  validate(instance);
  const auto sums = cycle_sums(policy, instance);
  StationaryDistribution out;
  double w = 1.0;
  for (Age s = 1; s <= policy.head.size(); ++s) {
    out.head.push_back(w / sums.mass);
    w *= 1.0 - success_probability(instance, policy.head[s - 1]);
  }
  out.tail_start = policy.head.size() + 1;
  out.tail_first = w / sums.mass;
  out.tail_ratio = 1.0 - success_probability(instance, policy.tail);
  return out;
}

StationaryDistribution stationary_distribution(const ThresholdPolicy& policy,
                                               const ProblemInstance& instance) {
  return stationary_distribution(to_stationary(policy), instance);
}

EvaluationReport evaluate_policy_exact(const StationaryPolicy& policy,
                                       const ProblemInstance& instance) {
  validate(instance);
  const auto sums = cycle_sums(policy, instance);
  EvaluationReport report;
  report.average_aoi = sums.age / sums.mass;
  report.average_recruit_cost = sums.cost / sums.mass;
  report.payoff = sums.payoff / sums.mass;
  report.tail_mass_dropped = 0.0;
  return report;
}

EvaluationReport evaluate_policy_exact(const ThresholdPolicy& policy,
                                       const ProblemInstance& instance) {
  return evaluate_policy_exact(to_stationary(policy), instance);
}

SimResult simulate(const StationaryPolicy& policy, const ProblemInstance& instance,
                   std::uint64_t horizon, std::uint64_t seed, std::size_t batches) {
  validate(instance);
  if (horizon < 1) throw Error(Errc::parameter, "horizon must be >= 1");
  if (batches < 1) throw Error(Errc::parameter, "batch count must be >= 1");
  batches = static_cast<std::size_t>(std::min<std::uint64_t>(batches, horizon));

  const auto n = instance.size();
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double beta = instance.beta;
  const double eps = instance.epsilon_unit;

  std::vector<double> batch_payoff(batches, 0.0), batch_aoi(batches, 0.0),
      batch_cost(batches, 0.0);
  std::vector<std::uint64_t> batch_len(batches, 0);
  const std::uint64_t base_len = horizon / batches;

  SimResult out;
  out.horizon = horizon;
  out.seed = seed;
  Age aoi = 1;
  std::vector<bool> arrived(n);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const std::size_t b = std::min<std::uint64_t>(t / base_len, batches - 1);
    const ActionSet action = policy.at(aoi);
    for (std::size_t i = 0; i < n; ++i) arrived[i] = uniform() < instance.types[i].arrival_prob;
    double paid = 0.0;
    bool updated = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!arrived[i] || !action.contains(i)) continue;
      paid += instance.types[i].mean_cost;
      if (uniform() < instance.types[i].mean_sensing) updated = true;
    }
    const Age next = updated ? 1 : aoi + 1;
    const double d = static_cast<double>(next);
    batch_payoff[b] += beta * (-eps * d * d) - (1.0 - beta) * paid;
    batch_aoi[b] += static_cast<double>(aoi);
    batch_cost[b] += paid;
    ++batch_len[b];
    if (updated) ++out.update_count;
    aoi = next;
  }

  const auto summarize = [&](const std::vector<double>& totals, double& mean, double& se) {
    double sum = 0.0;
    for (double x : totals) sum += x;
    mean = sum / static_cast<double>(horizon);
    if (batches < 2) {
      se = 0.0;
      return;
    }
    std::vector<double> means(batches);
    double avg = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      means[b] = totals[b] / static_cast<double>(batch_len[b]);
      avg += means[b];
    }
    avg /= static_cast<double>(batches);
    double ss = 0.0;
    for (double m : means) ss += (m - avg) * (m - avg);
    se = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  };
  summarize(batch_payoff, out.empirical_payoff, out.payoff_se);
  summarize(batch_aoi, out.empirical_avg_aoi, out.aoi_se);
  summarize(batch_cost, out.empirical_avg_cost, out.cost_se);
  return out;
}

SimResult simulate(const ThresholdPolicy& policy, const ProblemInstance& instance,
                   std::uint64_t horizon, std::uint64_t seed, std::size_t batches) {
  return simulate(to_stationary(policy), instance, horizon, seed, batches);
}

ThresholdPolicy baseline_zero_wait(const ProblemInstance& instance) {
  validate(instance);
  ThresholdPolicy policy;
  const auto everyone = ActionSet::full(instance.size());
  policy.order.steps = {ActionStats{}, action_stats(instance, everyone)};
  policy.order.gammas = {marginal_cost_effectiveness(policy.order.steps[0],
                                                     policy.order.steps[1])};
  policy.thresholds = {1};
  return policy;
}

ThresholdPolicy enter_policy(const ProblemInstance& instance, const SolverOptions& options) {
  return solve_with_truncation_adapt(instance, options).thresholds;
}

ThresholdPolicy baseline_draim(const ProblemInstance& instance, const SolverOptions& options) {
  auto believed = instance;
  for (auto& t : believed.types) t.mean_sensing = 1.0;
  believed.label = instance.label + " (perfect sensing assumed)";
  return enter_policy(believed, options);
}

ThresholdPolicy baseline_auction(const ProblemInstance& instance,
                                 const SolverOptions& options) {
  auto believed = instance;
  for (auto& t : believed.types) t.arrival_prob = 1.0;
  believed.label = instance.label + " (constant availability assumed)";
  return enter_policy(believed, options);
}

std::uint64_t count_threshold_candidates(const ThresholdBounds& bounds) {
  return count_candidates(bounds.bounds, std::numeric_limits<std::uint64_t>::max());
}

OracleResult brute_force_best_threshold_policy(const ProblemInstance& instance,
                                               const ThresholdBounds& bounds,
                                               std::uint64_t max_candidates) {
  validate(instance);
  const auto order = optimal_action_order(instance);
  check_bounds(order, bounds);
  const auto candidates = count_candidates(bounds.bounds, max_candidates + 1);
  if (candidates > max_candidates) {
    throw Error(Errc::oracle_too_large, "more than " + std::to_string(max_candidates) +
                                            " threshold vectors in the bound box");
  }
  Enumerator search(instance, order, bounds.bounds);
  search.run();
  OracleResult out;
  out.policy.order = order;
  out.policy.thresholds = search.best;
  out.payoff = search.best_payoff;
  out.candidates = search.leaves;
  return out;
}

OracleResult renewal_best_threshold_policy(const ProblemInstance& instance,
                                           const ThresholdBounds& bounds) {
  validate(instance);
  const auto order = optimal_action_order(instance);
  check_bounds(order, bounds);
  const std::size_t steps = order.size();
  const Age last_bound = bounds.bounds.back();
  if (last_bound > 50'000'000) throw Error(Errc::oracle_too_large, "bound box too deep");

  // min_step[s - 1]: smallest order step allowed at age s by the box.
  std::vector<std::size_t> min_step(last_bound, 0);
  {
    std::size_t k = 0;
    for (Age s = 1; s <= last_bound; ++s) {
      while (k < bounds.bounds.size() && bounds.bounds[k] <= s) ++k;
      min_step[s - 1] = k;
    }
  }

  // Cost-to-go minus lambda per unit mass, from (age, lowest step still allowed).
  std::vector<double> to_go(static_cast<std::size_t>(last_bound) * steps);
  std::vector<std::size_t> pick(to_go.size());
  const auto at = [steps](Age s, std::size_t k) {
    return static_cast<std::size_t>(s - 1) * steps + k;
  };

  ThresholdPolicy candidate;
  candidate.order = order;
  candidate.thresholds.assign(steps - 1, 1);
  double lambda = average_cost_of(candidate, instance);

  OracleResult out;
  out.policy = candidate;
  out.payoff = -lambda;
  for (int round = 0; round < 200; ++round) {
    const auto& final_step = order.steps.back();
    const double tail = tail_cost(instance, final_step, last_bound) -
                        lambda * geometric_moments(last_bound, final_step.success_prob).s0;
    for (std::size_t k = 0; k < steps; ++k) to_go[at(last_bound, k)] = tail;
    for (Age s = last_bound; s-- > 1;) {
      for (std::size_t k = steps; k-- > 0;) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_k = steps - 1;
        for (std::size_t j = std::max(k, min_step[s - 1]); j < steps; ++j) {
          const auto& a = order.steps[j];
          const double v = immediate_cost(instance, a, s) - lambda +
                           (1.0 - a.success_prob) * to_go[at(s + 1, j)];
          if (v < best) {
            best = v;
            best_k = j;
          }
        }
        to_go[at(s, k)] = best;
        pick[at(s, k)] = best_k;
      }
    }
    candidate.thresholds.assign(steps - 1, last_bound);
    std::size_t k = 0;
    for (Age s = 1; s < last_bound; ++s) {
      const std::size_t next = pick[at(s, k)];
      for (std::size_t j = k; j < next; ++j) candidate.thresholds[j] = s;
      k = next;
    }
    const double ratio = average_cost_of(candidate, instance);
    if (ratio < lambda) {
      out.policy = candidate;
      out.payoff = -ratio;
    }
    if (!(ratio < lambda - 1e-15 * std::max(1.0, std::abs(lambda)))) break;
    lambda = ratio;
  }
  out.candidates = count_candidates(bounds.bounds, std::numeric_limits<std::uint64_t>::max());
  return out;
}

}  // namespace aoi_recruit
