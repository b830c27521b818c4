#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoi_recruit/experiments.hpp"
#include "aoi_recruit/io.hpp"

using namespace aoi_recruit;

namespace {

struct Common {
  double tolerance = 1e-10;
  Age truncation = 1000;
  bool adapt = false;
  std::string solver = "bound-rvi";
  std::string out;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(Errc::parameter, "cannot write " + path);
  f << text;
}

void emit(const Json& doc, const std::string& path) { emit(doc.dump(2) + "\n", path); }

SolverOptions solver_options(const Common& c) {
  SolverOptions o;
  o.tolerance = c.tolerance;
  return o;
}

SolverResult run_solve(const ProblemInstance& instance, const Common& c) {
  const auto kind = parse_solver_kind(c.solver);
  if (c.adapt) {
    AdaptOptions a;
    a.solver = kind;
    a.initial_truncation = c.truncation;
    return solve_with_truncation_adapt(instance, solver_options(c), a);
  }
  return solve(build_truncated_mdp(instance, c.truncation), kind, solver_options(c));
}

ThresholdPolicy policy_or_enter(const ProblemInstance& instance, const std::string& policy_path,
                                const Common& c) {
  if (!policy_path.empty()) return policy_from_json(read_json_file(policy_path), instance);
  return enter_policy(instance, solver_options(c));
}

void add_solver_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--tolerance", c.tolerance, "Relative convergence tolerance")
      ->capture_default_str();
  cmd->add_option("--truncation", c.truncation, "Truncation M (initial M with --adapt)")
      ->capture_default_str();
  cmd->add_flag("--adapt", c.adapt, "Grow M until it covers the last threshold plus margin");
  cmd->add_option("--solver", c.solver, "rvi, srvi or bound-rvi")
      ->check(CLI::IsMember({"rvi", "srvi", "bound-rvi"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-aware vehicle recruitment: optimal threshold policies and experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--out", c.out, "Write the output to this path instead of stdout");

  std::string instance_path;
  std::string policy_path;

  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance and print the result JSON");
  solve_cmd->add_option("instance", instance_path)->required();
  add_solver_flags(solve_cmd, c);

  auto* order_cmd = app.add_subcommand("order", "Print the optimal action order");
  order_cmd->add_option("instance", instance_path)->required();

  auto* bounds_cmd = app.add_subcommand("bounds", "Print the threshold upper bounds");
  bounds_cmd->add_option("instance", instance_path)->required();

  auto* classify_cmd = app.add_subcommand("classify", "Classify a two-type instance");
  classify_cmd->add_option("instance", instance_path)->required();

  auto* eval_cmd = app.add_subcommand("eval", "Exactly evaluate a threshold policy");
  eval_cmd->add_option("instance", instance_path)->required();
  eval_cmd->add_option("policy", policy_path, "Policy JSON (default: solve for the optimum)");
  eval_cmd->add_option("--tolerance", c.tolerance)->capture_default_str();

  std::uint64_t horizon = 1'000'000;
  std::uint64_t seed = 1;
  std::size_t batches = kDefaultSimBatches;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of a threshold policy");
  sim_cmd->add_option("instance", instance_path)->required();
  sim_cmd->add_option("policy", policy_path, "Policy JSON (default: solve for the optimum)");
  sim_cmd->add_option("--horizon", horizon)->capture_default_str();
  sim_cmd->add_option("--seed", seed)->capture_default_str();
  sim_cmd->add_option("--batches", batches)->capture_default_str();
  sim_cmd->add_option("--tolerance", c.tolerance)->capture_default_str();

  RandomInstanceSpec gen;
  std::vector<double> p_range{0.05, 1.0}, c_range{0.5, 5.0}, r_range{0.05, 1.0};
  const auto add_gen_flags = [&](CLI::App* cmd) {
    cmd->add_option("--n", gen.n, "Number of vehicle types")->capture_default_str();
    cmd->add_option("--seed", gen.seed)->capture_default_str();
    cmd->add_option("--beta", gen.beta)->capture_default_str();
    cmd->add_option("--epsilon", gen.epsilon_unit)->capture_default_str();
    cmd->add_option("--p-range", p_range)->expected(2);
    cmd->add_option("--c-range", c_range)->expected(2);
    cmd->add_option("--r-range", r_range)->expected(2);
  };
  const auto finish_gen = [&] {
    gen.arrival = {p_range[0], p_range[1]};
    gen.cost = {c_range[0], c_range[1]};
    gen.sensing = {r_range[0], r_range[1]};
  };

  auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance JSON");
  add_gen_flags(gen_cmd);

  auto* bench = app.add_subcommand("bench", "Experiments emitting CSV");
  bench->require_subcommand(1);
  bench->fallthrough();

  TimingSpec timing;
  auto* timing_cmd = bench->add_subcommand("timing", "Wall time of rvi, srvi and bound-rvi");
  add_gen_flags(timing_cmd);
  timing_cmd->add_option("--instance", instance_path, "Fixed instance instead of random ones");
  timing_cmd->add_option("--reps", timing.repetitions)->capture_default_str();
  timing_cmd->add_option("--truncation", timing.truncation)->capture_default_str();
  timing_cmd->add_option("--tolerance", timing.tolerance)->capture_default_str();

  std::vector<double> betas;
  auto* pb_cmd = bench->add_subcommand("payoff-beta", "Payoff of each mechanism against beta");
  pb_cmd->add_option("instance", instance_path)->required();
  pb_cmd->add_option("--betas", betas, "Beta grid (default 0.1, 0.2, ..., 1)");
  pb_cmd->add_option("--tolerance", c.tolerance)->capture_default_str();

  std::size_t n_min = 1, n_max = 10;
  auto* pn_cmd = bench->add_subcommand("payoff-n", "Payoff of each mechanism as types are added");
  add_gen_flags(pn_cmd);
  pn_cmd->add_option("--n-min", n_min)->capture_default_str();
  pn_cmd->add_option("--n-max", n_max)->capture_default_str();
  pn_cmd->add_option("--tolerance", c.tolerance)->capture_default_str();

  std::size_t type_id = 0;
  std::string param = "p";
  double from = 0.05, to = 0.5;
  std::size_t count = 10;
  const auto add_grid_flags = [&](CLI::App* cmd) {
    cmd->add_option("instance", instance_path)->required();
    cmd->add_option("--type", type_id, "Type id whose parameter is swept")->capture_default_str();
    cmd->add_option("--param", param, "p, c or r")->capture_default_str();
    cmd->add_option("--from", from)->capture_default_str();
    cmd->add_option("--to", to)->capture_default_str();
    cmd->add_option("--count", count)->capture_default_str();
  };
  auto* sweep_cmd = bench->add_subcommand("sweep", "Thresholds as one vehicle parameter varies");
  add_grid_flags(sweep_cmd);
  sweep_cmd->add_option("--tolerance", c.tolerance)->capture_default_str();
  auto* cg_cmd = bench->add_subcommand("classify-grid", "Two-type structure as a parameter varies");
  add_grid_flags(cg_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve_cmd) {
      emit(to_json(run_solve(load_instance(instance_path), c)), c.out);
    } else if (*order_cmd) {
      emit(to_json(optimal_action_order(load_instance(instance_path))), c.out);
    } else if (*bounds_cmd) {
      const auto instance = load_instance(instance_path);
      const auto order = optimal_action_order(instance);
      emit(to_json(threshold_upper_bounds(instance, order), order), c.out);
    } else if (*classify_cmd) {
      emit(to_json(classify_binary_structure(load_instance(instance_path))), c.out);
    } else if (*eval_cmd) {
      const auto instance = load_instance(instance_path);
      const auto policy = policy_or_enter(instance, policy_path, c);
      auto doc = to_json(evaluate_policy_exact(policy, instance));
      doc["thresholds"] = thresholds_to_json(policy);
      emit(doc, c.out);
    } else if (*sim_cmd) {
      const auto instance = load_instance(instance_path);
      const auto policy = policy_or_enter(instance, policy_path, c);
      emit(to_json(simulate(policy, instance, horizon, seed, batches)), c.out);
    } else if (*gen_cmd) {
      finish_gen();
      emit(to_json(generate_instance(gen)), c.out);
    } else if (*timing_cmd) {
      finish_gen();
      timing.instance = gen;
      const auto rows = instance_path.empty()
                            ? run_timing_comparison(timing)
                            : run_timing_comparison(load_instance(instance_path), timing);
      emit(timing_csv(rows), c.out);
    } else if (*pb_cmd) {
      if (betas.empty()) betas = linspace(0.1, 1.0, 10);
      SolverOptions o = solver_options(c);
      emit(payoff_csv(run_payoff_vs_beta(load_instance(instance_path), betas, o, grid_threads()),
                      "beta"),
           c.out);
    } else if (*pn_cmd) {
      finish_gen();
      if (pn_cmd->count("--beta") == 0) gen.beta = 0.1;
      emit(payoff_csv(run_payoff_vs_n(gen, n_min, n_max, solver_options(c), grid_threads()), "n"),
           c.out);
    } else if (*sweep_cmd) {
      const auto results =
          run_threshold_sweep(load_instance(instance_path), type_id, parse_swept_param(param),
                              linspace(from, to, count), solver_options(c), grid_threads());
      emit(sweep_csv(sweep_rows(results)), c.out);
    } else if (*cg_cmd) {
      emit(classify_csv(run_classify_grid(load_instance(instance_path), type_id,
                                          parse_swept_param(param), linspace(from, to, count))),
           c.out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? 1 : 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
