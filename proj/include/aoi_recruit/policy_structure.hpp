#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "aoi_recruit/core_model.hpp"

namespace aoi_recruit {

/// Marker for a threshold that is never reached (or a bound that does not exist).
inline constexpr Age kNever = std::numeric_limits<Age>::max();

/// The actions an optimal policy can use, in the order it uses them as the age grows.
/// steps.front() is the empty action and steps.back() the maximal-Q action;
/// gammas[k] is the marginal cost-effectiveness of moving from steps[k] to steps[k+1].
struct ActionOrder {
  std::vector<ActionStats> steps;
  std::vector<double> gammas;

  std::size_t size() const noexcept { return steps.size(); }
  /// Position of `action` in the order, or size() when it is absent.
  std::size_t index_of(ActionSet action) const noexcept;
};

struct ThresholdBounds {
  /// bounds[k] caps the threshold of the switch steps[k] -> steps[k+1].
  std::vector<Age> bounds;
};

/// (E_to - E_from) / (Q_to - Q_from). Requires Q_to > Q_from.
double marginal_cost_effectiveness(const ActionStats& from, const ActionStats& to);

/// Greedy construction: from the current step, jump to the action with larger Q that
/// has the smallest marginal cost-effectiveness (ties: the larger Q). `ascending` must
/// be strictly increasing in success_prob and start with the empty action.
ActionOrder optimal_action_order(std::span<const ActionStats> ascending);
ActionOrder optimal_action_order(const ProblemInstance& instance);

/// ceil(sqrt(1 + (1 - beta) gamma / (beta eps)) - 1), clamped to >= 1.
Age threshold_upper_bound(double gamma, double beta, double epsilon_unit);
ThresholdBounds threshold_upper_bounds(const ProblemInstance& instance, const ActionOrder& order);

enum class Structure { LH, HL, NoneL, NoneH };

std::string_view to_string(Structure s) noexcept;

struct StructureClass {
  Structure kind = Structure::LH;
  double rho = 0.0;    ///< gamma(O, L) / gamma(O, H)
  double kappa = 0.0;  ///< (1 - Q_H) / (1 - Q_L)
  std::size_t low_type = 0;
  std::size_t high_type = 1;
  /// rho sits on 1 or on kappa (within 1e-12 relative); the class is a boundary case.
  bool degenerate = false;
  /// r_L == r_H; L was chosen as the cheaper type.
  bool sensing_tie = false;
};

StructureClass classify_binary_structure(const ProblemInstance& instance);

}  // namespace aoi_recruit
