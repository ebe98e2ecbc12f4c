#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ua/chain.hpp"
#include "ua/checks.hpp"
#include "ua/errors.hpp"
#include "ua/harness.hpp"
#include "ua/programs.hpp"
#include "ua/scenario.hpp"
#include "ua/subgradient.hpp"

namespace {

using nlohmann::json;

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << "\n";
}

int cmd_validate(const std::string& scenario_path) {
  const ua::Scenario scenario = ua::load_scenario(scenario_path);
  const ua::NetworkModel& model = scenario.model;
  std::cout << "model: " << model.num_users() << " users, " << model.num_aps() << " APs, "
            << model.num_states() << " states, " << model.num_actions()
            << " joint associations\n";
  bool ok = true;
  if (model.is_deterministic()) {
    const auto irr = ua::check_irreducibility(model);
    if (irr.irreducible) {
      std::cout << "irreducibility: ok\n";
    } else {
      ok = false;
      std::cout << "irreducibility: FAILED (state " << irr.witness->from
                << " cannot reach state " << irr.witness->to << ")\n";
    }
  } else {
    std::cout << "irreducibility: skipped (not a deterministic transition map)\n";
  }
  const auto inter = ua::check_interdependence(model);
  if (inter.interdependent) {
    std::cout << "interdependence: ok ("
              << (model.is_iid() ? "expected-rate variant" : "per-state variant") << ")\n";
  } else {
    ok = false;
    const auto& w = *inter.witness;
    std::cout << "interdependence: FAILED (state " << w.state << ", users {";
    for (std::size_t i = 0; i < w.subset.size(); ++i) {
      std::cout << (i ? "," : "") << w.subset[i];
    }
    std::cout << "} can move without disturbing anyone outside at association (";
    for (std::size_t i = 0; i < w.assoc.size(); ++i) std::cout << (i ? "," : "") << w.assoc[i];
    std::cout << "))\n";
  }
  return ok ? 0 : 1;
}

int cmd_analyze(const std::string& scenario_path, int kmax, double z,
                const std::vector<double>& eps_list, std::int64_t solve_guard,
                const std::string& out_path) {
  const ua::Scenario scenario = ua::load_scenario(scenario_path);
  const double zz = z > 0.0 ? z : scenario.model.num_users() + 1.0;
  const ua::PerturbedChain chain =
      ua::build_chain(scenario.model, scenario.utility, zz, kmax);
  const auto classes = ua::recurrent_classes_zero(chain);
  const auto rho = ua::class_resistance_matrix(chain, classes);
  const auto gamma = ua::stochastic_potentials(rho);
  const auto stable = ua::minimum_potential_set(gamma);

  json class_list = json::array();
  for (std::size_t c = 0; c < classes.classes.size(); ++c) {
    const auto& rc = classes.classes[c];
    json item{{"index", c},
              {"kind", rc.kind == ua::RecurrentClass::Kind::kContent ? "content" : "discontent"},
              {"num_states", rc.states.size()}};
    if (rc.kind == ua::RecurrentClass::Kind::kContent) {
      item["window_sizes"] = rc.window_sizes;
      item["window_averages"] = rc.window_averages;
      item["utility_sum"] = rc.utility_sum;
      item["deficit"] = rc.deficit;
    }
    class_list.push_back(std::move(item));
  }
  json report{{"num_chain_states", chain.num_states()},
              {"z", zz},
              {"kmax", kmax},
              {"classes", class_list},
              {"rho", rho},
              {"gamma", gamma},
              {"stable", stable}};
  json masses = json::object();
  for (const double eps : eps_list) {
    const auto pi = ua::stationary_at(chain, eps, solve_guard);
    std::vector<double> mass(classes.classes.size(), 0.0);
    for (std::int64_t s = 0; s < chain.num_states(); ++s) {
      if (classes.class_of[s] >= 0) mass[classes.class_of[s]] += pi[s];
    }
    char key[32];
    std::snprintf(key, sizeof(key), "%g", eps);
    masses[key] = mass;
  }
  if (!eps_list.empty()) report["stationary_class_mass"] = masses;
  write_output(report.dump(2), out_path);
  return 0;
}

int cmd_oracle(const std::string& scenario_path, const std::string& variant_name, int grid_k,
               int max_cycle_len, const std::string& out_path) {
  const ua::Scenario scenario = ua::load_scenario(scenario_path);
  const auto variant = ua::program_variant_from_string(variant_name);
  ua::ProgramSolution solution;
  if (variant == ua::ProgramVariant::kCycles) {
    ua::CycleEnumerationOptions opts;
    opts.max_length = max_cycle_len;
    const auto cycles = ua::enumerate_basic_cycles(scenario.model, opts);
    solution = ua::solve_cycle_program(scenario.model, scenario.utility, cycles, grid_k);
  } else {
    solution = ua::exhaustive_optimum(scenario.model, scenario.utility, variant, grid_k);
  }
  json weights = json::array();
  if (!solution.per_state.empty()) {
    for (std::size_t s = 0; s < solution.per_state.size(); ++s) {
      for (std::size_t a = 0; a < solution.per_state[s].size(); ++a) {
        if (solution.per_state[s][a] > 0.0) {
          weights.push_back({{"state", s}, {"action", a}, {"weight", solution.per_state[s][a]}});
        }
      }
    }
  } else {
    for (std::size_t c = 0; c < solution.weights.size(); ++c) {
      if (solution.weights[c] > 0.0) {
        weights.push_back({{"index", c}, {"weight", solution.weights[c]}});
      }
    }
  }
  const json report{{"variant", variant_name},
                    {"grid", grid_k},
                    {"optimum", solution.sum_utility},
                    {"rates", solution.rates},
                    {"weights", weights}};
  write_output(report.dump(2), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis toolkit for completely uncoupled user association"};
  app.require_subcommand(1);

  // validate
  std::string scenario_path;
  auto* validate = app.add_subcommand("validate", "check a scenario's structural assumptions");
  validate->add_option("scenario", scenario_path, "scenario JSON file")->required();

  // run / compare share the experiment surface
  ua::ExperimentSpec spec;
  std::string experiment_path;
  const auto add_experiment_flags = [&](CLI::App* cmd) {
    cmd->add_option("experiment", experiment_path, "experiment JSON file");
    cmd->add_option("--scenario", spec.scenario_path, "scenario JSON file");
    cmd->add_option("--alg", spec.algorithm, "alg1 | alg2-iid | alg2-markov | alg3");
    cmd->add_option("--eps", spec.eps_list, "epsilon grid")->delimiter(',');
    cmd->add_option("--kmax,-K", spec.kmax, "K_max (alg1) or history depth K");
    cmd->add_option("--frame-len", spec.frame_len, "frame length L (alg2; 0 = derive)");
    cmd->add_option("--delta", spec.delta, "frame tolerance delta (alg2; 0 = derive)");
    cmd->add_option("--z", spec.z, "exploration exponent (0 = N + 1)");
    cmd->add_option("--horizon", spec.horizon, "slots (alg1/alg3) or frames (alg2)");
    cmd->add_option("--reps", spec.replications, "seeded replications");
    cmd->add_option("--seed", spec.seed, "seed base");
    cmd->add_option("--out", spec.out_dir, "output directory for CSV files");
    cmd->add_option("--sample-every", spec.sample_every, "CSV sampling stride (0 = ~1000 rows)");
    cmd->add_option("--threads", spec.threads, "worker threads (0 = hardware)");
  };
  auto* run = app.add_subcommand("run", "run an epsilon sweep and write CSV curves");
  add_experiment_flags(run);
  run->add_flag("--trace", spec.full_trace, "also write one full-trace CSV per run");

  auto* compare = app.add_subcommand("compare", "run a sweep and report gaps to the grid oracle");
  add_experiment_flags(compare);
  int compare_grid = 0;
  std::string compare_out;
  compare->add_option("--grid", compare_grid, "oracle grid K (default kmax)");
  compare->add_option("--report", compare_out, "report JSON path (default stdout)");

  // analyze
  int ana_kmax = 2;
  double ana_z = 0.0;
  std::vector<double> ana_eps;
  std::int64_t ana_guard = 10'000;
  std::string ana_out;
  auto* analyze = app.add_subcommand("analyze", "exact perturbed-chain analysis report");
  analyze->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  analyze->add_option("--kmax,-K", ana_kmax, "window bound K_max");
  analyze->add_option("--z", ana_z, "exploration exponent (0 = N + 1)");
  analyze->add_option("--eps", ana_eps, "epsilons for exact stationary solves")->delimiter(',');
  analyze->add_option("--solve-guard", ana_guard, "largest state space for direct solves");
  analyze->add_option("--out", ana_out, "report JSON path (default stdout)");

  // oracle
  std::string oracle_variant = "cycles";
  int oracle_grid = 2;
  int oracle_max_len = 0;
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "certified grid optimum of a formulation");
  oracle->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  oracle->add_option("--variant", oracle_variant, "cycles | iid-action | per-state | controls");
  oracle->add_option("--grid", oracle_grid, "grid denominator K");
  oracle->add_option("--max-cycle-len", oracle_max_len, "cycle length cap (cycles variant)");
  oracle->add_option("--out", oracle_out, "report JSON path (default stdout)");

  // wifi scenario emitter
  std::string wifi_evolution = "deterministic";
  std::string wifi_out;
  auto* wifi = app.add_subcommand("wifi", "write the 3-AP / 5-user reference scenario");
  wifi->add_option("--evolution", wifi_evolution, "deterministic | iid | exogenous");
  wifi->add_option("--out", wifi_out, "scenario JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(scenario_path);
    if (run->parsed() || compare->parsed()) {
      if (!experiment_path.empty()) {
        ua::ExperimentSpec file_spec = ua::experiment_from_json_file(experiment_path);
        // explicit flags override the file
        if (spec.scenario_path.empty()) spec.scenario_path = file_spec.scenario_path;
        if (spec.algorithm == "alg1" && file_spec.algorithm != "alg1")
          spec.algorithm = file_spec.algorithm;
        if (spec.eps_list == std::vector<double>{0.1}) spec.eps_list = file_spec.eps_list;
        if (spec.kmax == 2) spec.kmax = file_spec.kmax;
        if (spec.frame_len == 0) spec.frame_len = file_spec.frame_len;
        if (spec.delta == 0.0) spec.delta = file_spec.delta;
        if (spec.z == 0.0) spec.z = file_spec.z;
        if (spec.horizon == 100'000) spec.horizon = file_spec.horizon;
        if (spec.replications == 1) spec.replications = file_spec.replications;
        if (spec.seed == 1) spec.seed = file_spec.seed;
        if (spec.out_dir.empty()) spec.out_dir = file_spec.out_dir;
        if (spec.sample_every == 0) spec.sample_every = file_spec.sample_every;
      }
      if (spec.scenario_path.empty()) {
        std::cerr << "no scenario given (flag --scenario or experiment file)\n";
        return 2;
      }
      const ua::Scenario scenario = ua::load_scenario(spec.scenario_path);
      const auto sweep = ua::run_experiment(spec, scenario);
      if (run->parsed()) {
        for (const auto& [eps, path] : sweep.mean_csv_path) {
          std::cout << "eps " << eps << ": " << path << "\n";
        }
        if (spec.out_dir.empty()) {
          std::cout << "(no --out directory given; results not written)\n";
        }
        return 0;
      }
      const auto report = ua::compare_runs(spec, scenario, sweep, compare_grid);
      write_output(ua::compare_report_json(report), compare_out);
      return 0;
    }
    if (analyze->parsed()) {
      return cmd_analyze(scenario_path, ana_kmax, ana_z, ana_eps, ana_guard, ana_out);
    }
    if (oracle->parsed()) {
      return cmd_oracle(scenario_path, oracle_variant, oracle_grid, oracle_max_len, oracle_out);
    }
    if (wifi->parsed()) {
      ua::WifiEvolutionKind kind = ua::WifiEvolutionKind::kDeterministicMaxLoad;
      if (wifi_evolution == "iid") kind = ua::WifiEvolutionKind::kUniformIid;
      else if (wifi_evolution == "exogenous") kind = ua::WifiEvolutionKind::kUniformExogenous;
      else if (wifi_evolution != "deterministic") {
        std::cerr << "unknown evolution: " << wifi_evolution << "\n";
        return 2;
      }
      const ua::Scenario scenario = ua::standard_wifi_scenario(kind);
      write_output(ua::scenario_to_json(scenario), wifi_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
