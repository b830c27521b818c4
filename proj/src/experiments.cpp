#include "aoi_recruit/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aoi_recruit/io.hpp"

namespace aoi_recruit {

namespace {

void check_range(const Range& r, double lo, double hi, const char* name) {
  if (!(r.lo <= r.hi) || r.lo < lo || r.hi > hi || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw Error(Errc::parameter, std::string(name) + " range [" + format_number(r.lo) + ", " +
                                     format_number(r.hi) + "] is invalid");
  }
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

EvaluationReport failed_report() { return {kNan, kNan, kNan, kNan}; }

std::string status_of(const Error& e) { return errc_name(e.code()); }

void compare_mechanisms(const ProblemInstance& instance, double point,
                        const SolverOptions& options, PayoffRow* out) {
  const Mechanism kinds[] = {Mechanism::enter, Mechanism::zero_wait, Mechanism::draim,
                             Mechanism::auction};
  for (std::size_t m = 0; m < 4; ++m) {
    auto& row = out[m];
    row.mechanism = kinds[m];
    row.point = point;
    try {
      ThresholdPolicy policy;
      switch (kinds[m]) {
        case Mechanism::enter: policy = enter_policy(instance, options); break;
        case Mechanism::zero_wait: policy = baseline_zero_wait(instance); break;
        case Mechanism::draim: policy = baseline_draim(instance, options); break;
        case Mechanism::auction: policy = baseline_auction(instance, options); break;
      }
      row.report = evaluate_policy_exact(policy, instance);
    } catch (const Error& e) {
      row.report = failed_report();
      row.status = status_of(e);
    }
  }
}

double& param_ref(ProblemInstance& instance, std::size_t type_id, SweptParam param) {
  if (type_id >= instance.size()) {
    throw Error(Errc::parameter, "type " + std::to_string(type_id) + " does not exist");
  }
  auto& t = instance.types[type_id];
  switch (param) {
    case SweptParam::arrival_prob: return t.arrival_prob;
    case SweptParam::mean_cost: return t.mean_cost;
    case SweptParam::mean_sensing: break;
  }
  return t.mean_sensing;
}

}  // namespace

ProblemInstance generate_instance(const RandomInstanceSpec& spec) {
  if (spec.n < 1 || spec.n > kMaxTypes) {
    throw Error(Errc::parameter, "N must be in 1.." + std::to_string(kMaxTypes));
  }
  check_range(spec.arrival, 0.0, 1.0, "arrival probability");
  check_range(spec.cost, 0.0, std::numeric_limits<double>::max(), "cost");
  check_range(spec.sensing, 0.0, 1.0, "sensing");
  std::mt19937_64 rng(spec.seed);
  const auto draw = [&rng](const Range& r) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return r.lo + u * (r.hi - r.lo);
  };
  std::vector<TypeParams> types;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double p = draw(spec.arrival);
    const double c = draw(spec.cost);
    const double r = draw(spec.sensing);
    types.push_back({p, c, r});
  }
  return make_instance(types, spec.beta, spec.epsilon_unit,
                       "random n=" + std::to_string(spec.n) + " seed=" + std::to_string(spec.seed));
}

std::size_t grid_threads() {
  if (const char* env = std::getenv("AOI_RECRUIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
#ifdef _OPENMP
  return static_cast<std::size_t>(omp_get_max_threads());
#else
  return 1;
#endif
}

void for_each_point(std::size_t count, std::size_t threads,
                    const std::function<void(std::size_t)>& task) {
#ifdef _OPENMP
  if (threads > 1 && count > 1) {
    const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(threads))
    for (long i = 0; i < n; ++i) task(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)threads;
#endif
  for (std::size_t i = 0; i < count; ++i) task(i);
}

std::string_view to_string(Mechanism m) noexcept {
  switch (m) {
    case Mechanism::enter: return "enter";
    case Mechanism::zero_wait: return "zero-wait";
    case Mechanism::draim: return "draim";
    case Mechanism::auction: return "auction";
  }
  return "?";
}

std::vector<PayoffRow> run_payoff_vs_beta(const ProblemInstance& fleet,
                                          std::span<const double> betas,
                                          const SolverOptions& options, std::size_t threads) {
  if (betas.empty()) throw Error(Errc::parameter, "beta grid is empty");
  std::vector<PayoffRow> rows(4 * betas.size());
  for_each_point(betas.size(), threads, [&](std::size_t i) {
    auto* out = &rows[4 * i];
    try {
      auto instance = fleet;
      instance.beta = betas[i];
      validate(instance);
      compare_mechanisms(instance, betas[i], options, out);
    } catch (const Error& e) {
      for (std::size_t m = 0; m < 4; ++m) {
        out[m] = {static_cast<Mechanism>(m), betas[i], failed_report(), status_of(e)};
      }
    }
  });
  return rows;
}

std::vector<PayoffRow> run_payoff_vs_n(const RandomInstanceSpec& spec, std::size_t n_min,
                                       std::size_t n_max, const SolverOptions& options,
                                       std::size_t threads) {
  if (n_min < 1 || n_min > n_max) throw Error(Errc::parameter, "N range is empty");
  auto full = spec;
  full.n = n_max;
  const auto fleet = generate_instance(full);
  const std::size_t points = n_max - n_min + 1;
  std::vector<PayoffRow> rows(4 * points);
  for_each_point(points, threads, [&](std::size_t i) {
    const auto n = n_min + i;
    auto* out = &rows[4 * i];
    try {
      auto instance = fleet;
      instance.types.resize(n);
      instance.label = "random n=" + std::to_string(n) + " seed=" + std::to_string(spec.seed);
      validate(instance);
      compare_mechanisms(instance, static_cast<double>(n), options, out);
    } catch (const Error& e) {
      for (std::size_t m = 0; m < 4; ++m) {
        out[m] = {static_cast<Mechanism>(m), static_cast<double>(n), failed_report(),
                  status_of(e)};
      }
    }
  });
  return rows;
}

std::string payoff_csv(std::span<const PayoffRow> rows, const std::string& point_name) {
  std::ostringstream out;
  out << "mechanism," << point_name << ",payoff,avg_aoi,avg_cost,status\n";
  for (const auto& r : rows) {
    out << to_string(r.mechanism) << ',' << format_number(r.point) << ','
        << format_number(r.report.payoff) << ',' << format_number(r.report.average_aoi) << ','
        << format_number(r.report.average_recruit_cost) << ',' << r.status << '\n';
  }
  return out.str();
}

namespace {

std::vector<TimingRow> time_solvers(const std::function<ProblemInstance(std::size_t)>& instance_at,
                                    const TimingSpec& spec) {
  if (spec.repetitions < 1) throw Error(Errc::parameter, "repetitions must be >= 1");
  const SolverKind kinds[] = {SolverKind::rvi, SolverKind::srvi, SolverKind::bound_rvi};
  SolverOptions options;
  options.tolerance = spec.tolerance;
  options.check_monotonicity = false;
  std::vector<TimingRow> rows(3);
  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    const auto instance = instance_at(rep);
    const TruncatedMdp mdp(instance, spec.truncation);
    for (std::size_t k = 0; k < 3; ++k) {
      auto result = solve(mdp, kinds[k], options);
      rows[k].solver = kinds[k];
      rows[k].n = instance.size();
      rows[k].mean_wall_time_ns += static_cast<double>(result.wall_time.count());
      rows[k].mean_iterations += static_cast<double>(result.iterations);
      rows[k].thresholds = std::move(result.thresholds);
    }
    for (std::size_t k = 1; k < 3; ++k) {
      const auto& a = rows[0].thresholds;
      const auto& b = rows[k].thresholds;
      bool same = a.thresholds == b.thresholds && a.order.size() == b.order.size();
      for (std::size_t j = 0; same && j < a.order.size(); ++j) {
        same = a.order.steps[j].action == b.order.steps[j].action;
      }
      if (!same) {
        throw Error(Errc::equivalence_failure,
                    std::string(to_string(kinds[k])) + " thresholds differ from rvi on " +
                        instance.label);
      }
    }
  }
  for (auto& r : rows) {
    r.mean_wall_time_ns /= static_cast<double>(spec.repetitions);
    r.mean_iterations /= static_cast<double>(spec.repetitions);
  }
  return rows;
}

}  // namespace

std::vector<TimingRow> run_timing_comparison(const TimingSpec& spec) {
  return time_solvers(
      [&spec](std::size_t rep) {
        auto s = spec.instance;
        s.seed += rep;
        return generate_instance(s);
      },
      spec);
}

std::vector<TimingRow> run_timing_comparison(const ProblemInstance& instance,
                                             const TimingSpec& spec) {
  validate(instance);
  return time_solvers([&instance](std::size_t) { return instance; }, spec);
}

std::string timing_csv(std::span<const TimingRow> rows) {
  std::ostringstream out;
  out << "solver_id,n,mean_wall_time_ns,iterations\n";
  for (const auto& r : rows) {
    out << to_string(r.solver) << ',' << r.n << ',' << format_number(r.mean_wall_time_ns) << ','
        << format_number(r.mean_iterations) << '\n';
  }
  return out.str();
}

SweptParam parse_swept_param(std::string_view name) {
  if (name == "p" || name == "arrival_prob") return SweptParam::arrival_prob;
  if (name == "c" || name == "mean_cost") return SweptParam::mean_cost;
  if (name == "r" || name == "mean_sensing") return SweptParam::mean_sensing;
  throw Error(Errc::parameter, "unknown parameter '" + std::string(name) + "' (use p, c or r)");
}

std::vector<SweepResult> run_threshold_sweep(const ProblemInstance& base, std::size_t type_id,
                                             SweptParam param, std::span<const double> values,
                                             const SolverOptions& options, std::size_t threads) {
  if (values.empty()) throw Error(Errc::parameter, "sweep grid is empty");
  auto probe = base;
  param_ref(probe, type_id, param);
  std::vector<SweepResult> results(values.size());
  for_each_point(values.size(), threads, [&](std::size_t i) {
    auto& out = results[i];
    out.value = values[i];
    try {
      auto instance = base;
      param_ref(instance, type_id, param) = values[i];
      validate(instance);
      out.policy = enter_policy(instance, options);
    } catch (const Error& e) {
      out.status = status_of(e);
    }
  });
  return results;
}

std::string order_string(const ActionOrder& order) {
  std::string s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k) s += '|';
    s += order.steps[k].action.to_string();
  }
  return s;
}

std::vector<SweepRow> sweep_rows(std::span<const SweepResult> results) {
  std::vector<SweepRow> rows;
  for (const auto& r : results) {
    if (r.status != "ok") {
      rows.push_back({r.value, "", kNever, "", r.status});
      continue;
    }
    const auto order = order_string(r.policy.order);
    for (std::size_t k = 0; k < r.policy.thresholds.size(); ++k) {
      rows.push_back({r.value,
                      r.policy.order.steps[k].action.to_string() + "->" +
                          r.policy.order.steps[k + 1].action.to_string(),
                      r.policy.thresholds[k], order, "ok"});
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "param_value,threshold,theta,order,status\n";
  for (const auto& r : rows) {
    out << format_number(r.value) << ',' << r.threshold << ',';
    if (r.theta != kNever) out << r.theta;
    out << ',' << r.order << ',' << r.status << '\n';
  }
  return out.str();
}

std::vector<ClassifyRow> run_classify_grid(const ProblemInstance& base, std::size_t type_id,
                                           SweptParam param, std::span<const double> values) {
  if (values.empty()) throw Error(Errc::parameter, "classify grid is empty");
  auto probe = base;
  param_ref(probe, type_id, param);
  std::vector<ClassifyRow> rows;
  for (double v : values) {
    ClassifyRow row;
    row.value = v;
    try {
      auto instance = base;
      param_ref(instance, type_id, param) = v;
      validate(instance);
      row.cls = classify_binary_structure(instance);
    } catch (const Error& e) {
      row.status = status_of(e);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string classify_csv(std::span<const ClassifyRow> rows) {
  std::ostringstream out;
  out << "param_value,structure,rho,kappa,degenerate,status\n";
  for (const auto& r : rows) {
    out << format_number(r.value) << ',';
    if (r.status == "ok") {
      out << to_string(r.cls.kind) << ',' << format_number(r.cls.rho) << ','
          << format_number(r.cls.kappa) << ',' << (r.cls.degenerate ? 1 : 0);
    } else {
      out << ",,,";
    }
    out << ',' << r.status << '\n';
  }
  return out.str();
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 1) throw Error(Errc::parameter, "grid needs at least one point");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

}  // namespace aoi_recruit
