#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aoi_recruit/core_model.hpp"
#include "aoi_recruit/mdp_solver.hpp"
#include "aoi_recruit/policy_eval.hpp"
#include "aoi_recruit/policy_structure.hpp"

namespace aoi_recruit {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct RandomInstanceSpec {
  std::size_t n = 2;
  std::uint64_t seed = 0;
  Range arrival{0.05, 1.0};
  Range cost{0.5, 5.0};
  Range sensing{0.05, 1.0};
  double beta = 0.5;
  double epsilon_unit = 1.0;
};

/// Types are drawn one after another from a single mt19937_64 stream (p, c, r per
/// type), so the instance for n + 1 extends the instance for n by one type.
ProblemInstance generate_instance(const RandomInstanceSpec& spec);

/// Grid concurrency from AOI_RECRUIT_THREADS (unset or invalid: the OpenMP default).
std::size_t grid_threads();

/// Runs task(i) for i in [0, count) on up to `threads` threads; threads <= 1 runs
/// serially in index order. Results stay in index order either way.
void for_each_point(std::size_t count, std::size_t threads,
                    const std::function<void(std::size_t)>& task);

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return seed ^ static_cast<std::uint64_t>(index);
}

enum class Mechanism { enter, zero_wait, draim, auction };
std::string_view to_string(Mechanism m) noexcept;

struct PayoffRow {
  Mechanism mechanism = Mechanism::enter;
  double point = 0.0;  ///< beta or N
  EvaluationReport report;
  std::string status = "ok";
};

/// ENTER and the three baselines, exactly evaluated, for every beta on one fleet.
std::vector<PayoffRow> run_payoff_vs_beta(const ProblemInstance& fleet,
                                          std::span<const double> betas,
                                          const SolverOptions& options = {},
                                          std::size_t threads = 1);
/// Same comparison as the fleet grows one random type at a time (spec.beta fixed).
std::vector<PayoffRow> run_payoff_vs_n(const RandomInstanceSpec& spec, std::size_t n_min,
                                       std::size_t n_max, const SolverOptions& options = {},
                                       std::size_t threads = 1);
std::string payoff_csv(std::span<const PayoffRow> rows, const std::string& point_name);

struct TimingSpec {
  RandomInstanceSpec instance;  ///< repetition k uses seed + k
  std::size_t repetitions = 5;
  Age truncation = 1000;
  double tolerance = 1e-10;
};

struct TimingRow {
  SolverKind solver = SolverKind::rvi;
  std::size_t n = 0;
  double mean_wall_time_ns = 0.0;
  double mean_iterations = 0.0;
  ThresholdPolicy thresholds;  ///< from the last repetition
};

/// Runs the three solvers on identical instances, single-threaded. Throws
/// Error{equivalence_failure} when their extracted thresholds differ.
std::vector<TimingRow> run_timing_comparison(const TimingSpec& spec);
/// Fixed-instance variant: every repetition solves `instance`.
std::vector<TimingRow> run_timing_comparison(const ProblemInstance& instance,
                                             const TimingSpec& spec);
std::string timing_csv(std::span<const TimingRow> rows);

enum class SweptParam { arrival_prob, mean_cost, mean_sensing };
SweptParam parse_swept_param(std::string_view name);

struct SweepRow {
  double value = 0.0;
  std::string threshold;  ///< "{}->{0}"
  Age theta = kNever;
  std::string order;  ///< "{}|{0}|{1}|{0,1}"
  std::string status = "ok";
};

struct SweepResult {
  double value = 0.0;
  ThresholdPolicy policy;
  std::string status = "ok";
};

/// Solves (with truncation adaptation) at every value of one parameter of one type.
std::vector<SweepResult> run_threshold_sweep(const ProblemInstance& base, std::size_t type_id,
                                             SweptParam param, std::span<const double> values,
                                             const SolverOptions& options = {},
                                             std::size_t threads = 1);
std::vector<SweepRow> sweep_rows(std::span<const SweepResult> results);
std::string sweep_csv(std::span<const SweepRow> rows);

struct ClassifyRow {
  double value = 0.0;
  StructureClass cls;
  std::string status = "ok";
};

std::vector<ClassifyRow> run_classify_grid(const ProblemInstance& base, std::size_t type_id,
                                           SweptParam param, std::span<const double> values);
std::string classify_csv(std::span<const ClassifyRow> rows);

/// `count` evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

std::string order_string(const ActionOrder& order);

}  // namespace aoi_recruit
