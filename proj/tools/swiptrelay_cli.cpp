// Command-line front end: one subcommand per library capability, all sharing
// the experiment configuration (config file merged with flag overrides).

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "swiptrelay/channel_model.hpp"
#include "swiptrelay/errors.hpp"
#include "swiptrelay/experiment.hpp"
#include "swiptrelay/mdp_bound.hpp"
#include "swiptrelay/monte_carlo.hpp"
#include "swiptrelay/relay_dynamics.hpp"

namespace sr = swiptrelay;

namespace {

struct CommonFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
};

// Registers one flag per configuration key; only flags actually given end up
// in the override map.
void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Config file of 'key = value' lines");
  const std::pair<const char*, const char*> keyed[] = {
      {"--sweep", "sweep"},
      {"--sweep-values", "sweep_values"},
      {"--levels", "levels"},
      {"--blocks", "blocks"},
      {"--seed", "seed"},
      {"--out", "out"},
      {"--source-power", "source_power"},
      {"--noise-power", "noise_power"},
      {"--block-duration", "block_duration"},
      {"--efficiency", "conversion_efficiency"},
      {"--rate", "rate"},
      {"--battery", "battery_capacity"},
      {"--channel-states", "n_channel_states"},
      {"--threads", "threads"},
      {"--round-exact-up", "round_exact_up"},
  };
  for (const auto& [flag, key] : keyed) {
    const std::string k = key;
    cmd->add_option_function<std::string>(
        flag, [&flags, k](const std::string& v) { flags.values[k] = v; },
        "Overrides config key '" + k + "'");
  }
}

// Writes to the configured output path, or stdout when none is set.
void emit(const sr::ExperimentConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw sr::ConfigError("cannot write '" + cfg.out + "'");
  out << text;
}

int run_channel(const sr::ExperimentConfig& cfg) {
  const auto ch = sr::quantize_equiprobable_exponential(cfg.n_channel_states);
  std::string text = "index,gain,probability\n";
  for (std::size_t i = 0; i < ch.size(); ++i) {
    text += std::to_string(i + 1) + "," + sr::format_number(ch.gain(i)) + "," +
            sr::format_number(ch.probability(i)) + "\n";
  }
  emit(cfg, text);
  return 0;
}

int run_heuristic(const sr::ExperimentConfig& cfg) {
  const auto ch = sr::quantize_equiprobable_exponential(cfg.n_channel_states);
  const double p = sr::heuristic_average_success(ch, ch, cfg.params);
  emit(cfg, "source_power,battery_capacity,p_heuristic_analytic\n" +
                sr::format_number(cfg.params.source_power) + "," +
                sr::format_number(cfg.params.battery_capacity) + "," + sr::format_number(p) +
                "\n");
  return 0;
}

int run_bound(const sr::ExperimentConfig& cfg, std::size_t verify_blocks) {
  const auto ch = sr::quantize_equiprobable_exponential(cfg.n_channel_states);
  const double heuristic = sr::heuristic_average_success(ch, ch, cfg.params);
  std::string text = "n_levels,states,actions,iterations,p_upper_bound,p_heuristic_analytic\n";
  for (const int nb : cfg.n_levels) {
    const auto model = sr::build_mdp(ch, ch, cfg.params, nb, sr::MdpOptions{cfg.round_exact_up});
    const auto pi = sr::policy_iteration(model);
    std::optional<sr::StateIndependenceCheck> check;
    if (verify_blocks > 0) check = sr::StateIndependenceCheck{verify_blocks, cfg.seed, 5.0};
    const double bound = sr::upper_bound(model, pi, ch, check);
    text += std::to_string(nb) + "," + std::to_string(model.num_states()) + "," +
            std::to_string(model.total_actions()) + "," + std::to_string(pi.iterations) + "," +
            sr::format_number(bound) + "," + sr::format_number(heuristic) + "\n";
  }
  emit(cfg, text);
  return 0;
}

int run_simulate(const sr::ExperimentConfig& cfg, const std::string& policy) {
  const auto ch = sr::quantize_equiprobable_exponential(cfg.n_channel_states);
  sr::SimulationConfig sim;
  sim.blocks = cfg.blocks;
  sim.seed = cfg.seed;
  sr::SimulationResult r;
  if (policy == "heuristic") {
    r = sr::simulate_original(sr::heuristic_policy(ch, cfg.params), ch, ch, cfg.params, sim);
  } else {
    const auto model = sr::build_mdp(ch, ch, cfg.params, cfg.n_levels.front(),
                                     sr::MdpOptions{cfg.round_exact_up});
    const auto pi = sr::policy_iteration(model);
    r = sr::simulate_discrete(model, pi.rule, sim);
  }
  emit(cfg, std::string(sr::kSimulationCsvHeader) + "\n" + sr::to_csv_row(r) + "\n");
  std::cerr << "generator: " << r.generator << "\n";
  return 0;
}

int run_sweep(const sr::ExperimentConfig& cfg, const std::string& gains_path) {
  const sr::SweepTable table = sr::run_sweep(cfg);
  emit(cfg, sr::to_csv(table));
  if (!gains_path.empty()) {
    std::ofstream out(gains_path, std::ios::binary);
    if (!out) throw sr::ConfigError("cannot write '" + gains_path + "'");
    out << sr::to_csv(sr::report_gains(table));
  }
  int failed = 0;
  for (const auto& row : table) {
    if (!row.ok()) {
      ++failed;
      std::cerr << "row " << row.sweep_param << "=" << row.sweep_value
                << " n_levels=" << row.n_levels << ": " << row.status << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Success probability of a battery-assisted SWIPT decode-and-forward relay:\n"
               "heuristic policy, MDP upper bound and Monte Carlo validation.\n\n"
               "Configuration keys (file or flags):\n" +
               sr::config_reference()};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* channel = app.add_subcommand("channel", "Dump the quantized channel as CSV");
  auto* heuristic = app.add_subcommand("heuristic", "Closed-form heuristic success probability");
  auto* bound = app.add_subcommand("bound", "Upper bound via policy iteration for each N_b");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate, CSV seed,M,mean,stderr");
  auto* sweep = app.add_subcommand("sweep", "Battery or power sweep, one CSV row per (value, N_b)");
  for (auto* cmd : {channel, heuristic, bound, simulate, sweep}) add_common(cmd, flags);

  std::size_t verify_blocks = 0;
  bound->add_option("--verify-blocks", verify_blocks,
                    "Simulate this many blocks from every zero-energy start to check the "
                    "bound is start independent (0 disables)");
  std::string policy = "heuristic";
  simulate
      ->add_option("--policy", policy,
                   "heuristic: original system under the battery-depleting rule; "
                   "optimal: discretized chain under the policy-iteration rule (first N_b)")
      ->check(CLI::IsMember({"heuristic", "optimal"}));
  std::string gains_path;
  sweep->add_option("--gains", gains_path, "Also write the percentage-gain report here");

  CLI11_PARSE(app, argc, argv);

  try {
    const sr::ExperimentConfig cfg = sr::parse_config(flags.config_path, flags.values);
    if (*channel) return run_channel(cfg);
    if (*heuristic) return run_heuristic(cfg);
    if (*bound) return run_bound(cfg, verify_blocks);
    if (*simulate) return run_simulate(cfg, policy);
    return run_sweep(cfg, gains_path);
  } catch (const sr::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
