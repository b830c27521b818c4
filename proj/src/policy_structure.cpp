#include "aoi_recruit/policy_structure.hpp"

#include <algorithm>
#include <cmath>

namespace aoi_recruit {

namespace {

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::size_t ActionOrder::index_of(ActionSet action) const noexcept {
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].action == action) return k;
  }
  return steps.size();
}

double marginal_cost_effectiveness(const ActionStats& from, const ActionStats& to) {
  if (!(to.success_prob > from.success_prob)) {
    throw Error(Errc::domain, "marginal cost-effectiveness needs Q_to > Q_from (" +
                                  from.action.to_string() + " -> " + to.action.to_string() +
                                  ")");
  }
  return (to.expected_cost - from.expected_cost) / (to.success_prob - from.success_prob);
}

ActionOrder optimal_action_order(std::span<const ActionStats> ascending) {
  if (ascending.empty() || !ascending.front().action.empty()) {
    throw Error(Errc::parameter, "action sequence must start with the empty action");
  }
  ActionOrder order;
  order.steps.push_back(ascending.front());
  std::size_t i = 0;
  const std::size_t last = ascending.size() - 1;
  while (i < last) {
    std::size_t best = i + 1;
    double best_gamma = marginal_cost_effectiveness(ascending[i], ascending[best]);
    for (std::size_t j = best + 1; j <= last; ++j) {
      const double g = marginal_cost_effectiveness(ascending[i], ascending[j]);
      // Collinear candidates: jump to the farther one.
      if (g < best_gamma || nearly_equal(g, best_gamma)) {
        best = j;
        best_gamma = std::min(g, best_gamma);
      }
    }
    order.gammas.push_back(marginal_cost_effectiveness(ascending[i], ascending[best]));
    order.steps.push_back(ascending[best]);
    i = best;
  }
  return order;
}

ActionOrder optimal_action_order(const ProblemInstance& instance) {
  const auto stats = enumerate_action_stats(instance);
  return optimal_action_order(stats);
}

Age threshold_upper_bound(double gamma, double beta, double epsilon_unit) {
  if (!(beta > 0.0)) {
    throw Error(Errc::unbounded_threshold,
                "beta = 0 leaves thresholds unbounded (never recruiting is optimal)");
  }
  if (!(epsilon_unit > 0.0)) throw Error(Errc::domain, "epsilon_unit must be > 0");
  const double radicand = 1.0 + (1.0 - beta) / (beta * epsilon_unit) * std::max(gamma, 0.0);
  const double bound = std::ceil(std::sqrt(radicand) - 1.0);
  if (!(bound < 1e18)) return kNever - 1;
  return std::max<Age>(1, static_cast<Age>(bound));
}

ThresholdBounds threshold_upper_bounds(const ProblemInstance& instance, const ActionOrder& order) {
  ThresholdBounds out;
  out.bounds.reserve(order.gammas.size());
  for (double g : order.gammas) {
    out.bounds.push_back(threshold_upper_bound(g, instance.beta, instance.epsilon_unit));
  }
  return out;
}

std::string_view to_string(Structure s) noexcept {
  switch (s) {
    case Structure::LH: return "LH";
    case Structure::HL: return "HL";
    case Structure::NoneL: return "None-L";
    case Structure::NoneH: return "None-H";
  }
  return "?";
}

StructureClass classify_binary_structure(const ProblemInstance& instance) {
  if (instance.size() != 2) {
    throw Error(Errc::arity, "binary structure classification needs exactly 2 vehicle types, got " +
                                 std::to_string(instance.size()));
  }
  validate(instance);
  StructureClass out;
  const auto& t0 = instance.types[0];
  const auto& t1 = instance.types[1];
  if (t0.mean_sensing == t1.mean_sensing) {
    out.sensing_tie = true;
    out.low_type = t1.mean_cost < t0.mean_cost ? 1 : 0;
  } else {
    out.low_type = t0.mean_sensing < t1.mean_sensing ? 0 : 1;
  }
  out.high_type = 1 - out.low_type;

  const auto low = action_stats(instance, ActionSet::of({out.low_type}));
  const auto high = action_stats(instance, ActionSet::of({out.high_type}));
  const auto from_none = [](const ActionStats& a) {
    return a.success_prob > 0.0 ? a.expected_cost / a.success_prob
                                : std::numeric_limits<double>::infinity();
  };
  const double gamma_low = from_none(low);
  const double gamma_high = from_none(high);
  if (std::isinf(gamma_low) && std::isinf(gamma_high)) {
    out.rho = 1.0;
  } else if (gamma_high == 0.0) {
    out.rho = gamma_low == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    out.rho = gamma_low / gamma_high;
  }
  out.kappa = (1.0 - high.success_prob) / (1.0 - low.success_prob);

  const double rho = out.rho;
  const double kappa = out.kappa;
  out.degenerate = nearly_equal(rho, 1.0) || nearly_equal(rho, kappa);
  if (kappa < rho && rho < 1.0) {
    out.kind = Structure::LH;
  } else if (1.0 < rho && rho < kappa) {
    out.kind = Structure::HL;
  } else if (rho >= std::max(1.0, kappa)) {
    out.kind = Structure::NoneL;
  } else if (rho < std::min(1.0, kappa)) {
    out.kind = Structure::NoneH;
  } else {
    // rho == kappa < 1 or rho == 1 < kappa: H sits on the hull segment through L,
    // and the collinear tie rule of the order construction drops it.
    out.kind = Structure::NoneH;
    out.degenerate = true;
  }
  return out;
}

}  // namespace aoi_recruit
