// Command-line front end: simulate, filter, experiment, oracle-check.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <rspf/filter.hpp>
#include <rspf/harness/experiment.hpp>
#include <rspf/harness/oracle_check.hpp>
#include <rspf/harness/output.hpp>
#include <rspf/harness/scenario.hpp>
#include <rspf/mmpf.hpp>
#include <rspf/regime_dynamics.hpp>
#include <rspf/synthetic.hpp>

namespace {

struct Options {
  std::string scenario = "markov";
  std::string proposal = "deterministic";
  std::string method = "rspf";
  double gamma = 0.0;
  std::size_t particles = 2000;
  std::size_t runs = 500;
  std::size_t horizon = 50;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t oracle_particles = 100'000;
  std::uint64_t oracle_seed = 2024;
  std::string out;
  std::string input;
  std::string config;
  std::string params;
  std::string dynamics;
  std::string dynamics_out;
  std::size_t repetitions = 20;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream file{path};
  if (!file) {
    throw rspf::ConfigError("cannot open " + path);
  }
  return nlohmann::json::parse(file);
}

/// Values present in the JSON config replace the corresponding flags.
void apply_config(Options& options) {
  if (options.config.empty()) {
    return;
  }
  const auto j = read_json(options.config);
  options.scenario = j.value("scenario", options.scenario);
  options.proposal = j.value("proposal", options.proposal);
  options.method = j.value("method", options.method);
  options.gamma = j.value("gamma", options.gamma);
  options.particles = j.value("particles", options.particles);
  options.runs = j.value("runs", options.runs);
  options.horizon = j.value("horizon", options.horizon);
  options.seed = j.value("seed", options.seed);
  options.jobs = j.value("jobs", options.jobs);
  options.oracle_particles = j.value("particles", options.oracle_particles);
  options.oracle_seed = j.value("seed", options.oracle_seed);
  options.out = j.value("out", options.out);
  options.input = j.value("input", options.input);
  options.params = j.value("params", options.params);
  options.dynamics = j.value("dynamics", options.dynamics);
  options.repetitions = j.value("repetitions", options.repetitions);
}

rspf::SyntheticModelParams load_params(const Options& options) {
  if (options.params.empty()) {
    return {};
  }
  return read_json(options.params).get<rspf::SyntheticModelParams>();
}

rspf::harness::Scenario make_scenario(const Options& options) {
  rspf::harness::Scenario scenario;
  scenario.kind = rspf::harness::parse_scenario(options.scenario);
  scenario.horizon = options.horizon;
  scenario.params = load_params(options);
  return scenario;
}

/// Writes to `path`, or stdout when empty.
template <class Writer>
void write_output(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
    return;
  }
  std::ofstream file{path, std::ios::binary};
  if (!file) {
    throw std::runtime_error("cannot write " + path);
  }
  writer(file);
}

int simulate(const Options& options) {
  const auto scenario = make_scenario(options);
  const auto generated = rspf::harness::generate_trajectory(scenario, options.seed);
  write_output(options.out, [&](std::ostream& out) { rspf::harness::write_trajectory_csv(out, generated.trajectory); });
  if (!options.dynamics_out.empty()) {
    std::ofstream file{options.dynamics_out};
    file << rspf::regime_dynamics_to_json(generated.dynamics).dump(2) << '\n';
  }
  return 0;
}

int filter(const Options& options) {
  std::ifstream input{options.input};
  if (!input) {
    throw rspf::ConfigError("cannot open trajectory " + options.input);
  }
  const auto trajectory = rspf::harness::read_trajectory_csv(input);
  const rspf::SyntheticModelSet models{load_params(options)};

  std::vector<rspf::FilterOutput<double>> outputs;
  if (options.method == "rspf") {
    auto dynamics = [&] {
      if (!options.dynamics.empty()) {
        return rspf::regime_dynamics_from_json(read_json(options.dynamics));
      }
      if (rspf::harness::parse_scenario(options.scenario) == rspf::harness::ScenarioKind::kMarkov) {
        return rspf::RegimeDynamics::markov(rspf::banded_transition_matrix(models.size(), 0.80, 0.15));
      }
      std::vector<std::uint32_t> beta(models.size());
      for (std::size_t k = 0; k < beta.size(); ++k) {
        beta[k] = static_cast<std::uint32_t>(k + 1);
      }
      return rspf::RegimeDynamics::polya(beta);
    }();
    rspf::FilterConfig cfg;
    cfg.particle_count = options.particles;
    cfg.proposal = rspf::parse_proposal_strategy(options.proposal);
    cfg.seed = options.seed;
    outputs = rspf::run_filter<rspf::SyntheticModelSet>(trajectory.observations, models, dynamics, cfg);
  } else if (options.method == "mmpf") {
    outputs = rspf::mmpf_run<rspf::SyntheticModelSet>(trajectory.observations, models, options.gamma,
                                                      std::max<std::size_t>(1, options.particles / models.size()),
                                                      options.seed);
  } else {
    throw rspf::ConfigError("unknown method '" + options.method + "'");
  }
  write_output(options.out, [&](std::ostream& out) { rspf::harness::write_filter_csv(out, outputs); });
  return 0;
}

int experiment(const Options& options) {
  rspf::harness::ExperimentConfig cfg;
  cfg.scenario = make_scenario(options);
  cfg.runs = options.runs;
  cfg.particles = options.particles;
  cfg.base_seed = options.seed;
  cfg.jobs = options.jobs;
  if (!options.dynamics.empty()) {
    cfg.filter_dynamics = rspf::regime_dynamics_from_json(read_json(options.dynamics));
  }
  const auto result = rspf::harness::run_experiment(cfg);
  const std::filesystem::path out = options.out.empty() ? "results" : options.out;
  rspf::harness::emit_outputs(cfg, result, out);

  std::printf("%-24s %12s %12s %12s %10s %10s %10s\n", "method", "mse avg", "mse best", "mse worst", "acc avg",
              "acc best", "acc worst");
  for (const auto& s : result.summaries) {
    std::printf("%-24s %12.4f %12.4f %12.4f %10.4f %10.4f %10.4f", s.name.c_str(), s.mse.average, s.mse.best,
                s.mse.worst, s.accuracy.average, s.accuracy.best, s.accuracy.worst);
    if (s.failures > 0) {
      std::printf("  (%zu failed runs)", s.failures);
    }
    std::printf("\n");
  }
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int oracle_check(const Options& options) {
  rspf::harness::OracleCheckConfig cfg;
  cfg.particles = options.oracle_particles;
  cfg.repetitions = options.repetitions;
  cfg.seed = options.oracle_seed;
  constexpr double kMaxTotalVariation = 0.05;
  constexpr double kMaxStandardErrors = 3.0;
  bool all_ok = true;
  for (const auto& c : rspf::harness::run_oracle_check(cfg)) {
    const bool ok = c.max_total_variation <= kMaxTotalVariation && c.max_state_z <= kMaxStandardErrors;
    all_ok = all_ok && ok;
    std::printf("%-4s %-12s %-14s max TV %.4f  max |z| %.2f\n", ok ? "PASS" : "FAIL", c.dynamics.c_str(),
                std::string{rspf::to_string(c.proposal)}.c_str(), c.max_total_variation, c.max_state_z);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime switching particle filter and MMPF benchmark"};
  app.require_subcommand(1);
  Options options;

  auto add_common = [&](CLI::App* command) {
    command->add_option("--config", options.config, "JSON file whose keys override flags");
    command->add_option("--seed", options.seed, "Random seed");
    command->add_option("--out", options.out, "Output file or directory");
  };
  auto add_model = [&](CLI::App* command) {
    command->add_option("--scenario", options.scenario, "Regime dynamics: markov or polya")
        ->check(CLI::IsMember({"markov", "polya"}));
    command->add_option("--params", options.params, "JSON file with synthetic model parameters");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one trajectory to CSV");
  add_common(simulate_cmd);
  add_model(simulate_cmd);
  simulate_cmd->add_option("--horizon", options.horizon, "Number of time steps T");
  simulate_cmd->add_option("--dynamics-out", options.dynamics_out, "Write the generating dynamics as JSON");

  auto* filter_cmd = app.add_subcommand("filter", "Run one method on a trajectory CSV");
  add_common(filter_cmd);
  add_model(filter_cmd);
  filter_cmd->add_option("--input", options.input, "Trajectory CSV");
  filter_cmd->add_option("--method", options.method, "rspf or mmpf")->check(CLI::IsMember({"rspf", "mmpf"}));
  filter_cmd->add_option("--proposal", options.proposal, "Model proposal for rspf")
      ->check(CLI::IsMember({"bootstrap", "uniform", "deterministic"}));
  filter_cmd->add_option("--gamma", options.gamma, "MMPF forgetting factor");
  filter_cmd->add_option("--particles", options.particles, "Total particle count");
  filter_cmd->add_option("--dynamics", options.dynamics, "Regime dynamics JSON for rspf");

  auto* experiment_cmd = app.add_subcommand("experiment", "Monte Carlo comparison of all methods");
  add_common(experiment_cmd);
  add_model(experiment_cmd);
  experiment_cmd->add_option("--particles", options.particles, "Total particle count per method");
  experiment_cmd->add_option("--runs", options.runs, "Monte Carlo runs");
  experiment_cmd->add_option("--horizon", options.horizon, "Number of time steps T");
  experiment_cmd->add_option("--jobs", options.jobs, "Worker threads");
  experiment_cmd->add_option("--dynamics", options.dynamics, "Dynamics given to the filters instead of the truth");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "Validate against exact enumeration");
  oracle_cmd->add_option("--config", options.config, "JSON file whose keys override flags");
  oracle_cmd->add_option("--seed", options.oracle_seed, "Random seed");
  oracle_cmd->add_option("--particles", options.oracle_particles, "Particles per filter run");
  oracle_cmd->add_option("--repetitions", options.repetitions, "Filter repetitions per case");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config(options);
    if (simulate_cmd->parsed()) {
      return simulate(options);
    }
    if (filter_cmd->parsed()) {
      return filter(options);
    }
    if (experiment_cmd->parsed()) {
      return experiment(options);
    }
    return oracle_check(options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
