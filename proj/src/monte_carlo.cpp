#include "swiptrelay/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "swiptrelay/errors.hpp"

namespace swiptrelay {

namespace {

constexpr std::size_t kBatches = 50;

// Fills mean and both standard errors from per-block outcomes.
void summarize(std::span<const double> outcomes, SimulationResult& r) {
  const std::size_t m = outcomes.size();
  double sum = 0.0;
  for (const double x : outcomes) sum += x;
  r.mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (const double x : outcomes) ss += (x - r.mean) * (x - r.mean);
  r.standard_error = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1) / static_cast<double>(m))
                           : 0.0;
  r.batch_standard_error = r.standard_error;
  if (m < 2 * kBatches) return;

  const std::size_t width = m / kBatches;
  std::vector<double> means(kBatches, 0.0);
  for (std::size_t b = 0; b < kBatches; ++b) {
    for (std::size_t k = 0; k < width; ++k) means[b] += outcomes[b * width + k];
    means[b] /= static_cast<double>(width);
  }
  double grand = 0.0;
  for (const double x : means) grand += x;
  grand /= static_cast<double>(kBatches);
  double bss = 0.0;
  for (const double x : means) bss += (x - grand) * (x - grand);
  r.batch_standard_error =
      std::sqrt(bss / static_cast<double>(kBatches - 1) / static_cast<double>(kBatches));
}

std::string describe(const State& s) {
  std::ostringstream os;
  os << "(E=" << s.energy << " uJ, h=" << s.sr_gain << ")";
  return os.str();
}

}  // namespace

double uniform01(Generator& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

ChannelSampler::ChannelSampler(const FiniteChannel& channel) : cumulative_(channel.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    acc += channel.probability(i);
    cumulative_[i] = acc;
  }
}

std::size_t ChannelSampler::operator()(Generator& gen) const {
  const double u = uniform01(gen);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return cumulative_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::size_t sample_channel(const FiniteChannel& channel, Generator& gen) {
  return ChannelSampler(channel)(gen);
}

Policy heuristic_policy(const FiniteChannel& g_channel, const SystemParams& params) {
  return [g_channel, params](const State& s) { return heuristic_rule(s, g_channel, params); };
}

SimulationResult simulate_original(const Policy& policy, const FiniteChannel& h_channel,
                                   const FiniteChannel& g_channel, const SystemParams& params,
                                   const SimulationConfig& config) {
  params.validate();
  if (config.blocks < 1) throw std::invalid_argument("simulation needs at least one block");
  if (!(config.initial_energy >= 0.0 && config.initial_energy <= params.battery_capacity)) {
    throw DomainError("initial battery energy outside [0, B]");
  }
  Generator gen(config.seed);
  const ChannelSampler draw_h(h_channel);
  const ChannelSampler draw_g(g_channel);
  const double gamma = params.threshold_snr();

  std::vector<double> outcomes(config.blocks);
  double energy = config.initial_energy;
  for (std::size_t m = 0; m < config.blocks; ++m) {
    const double h = h_channel.gain(draw_h(gen));
    const double g = g_channel.gain(draw_g(gen));
    const State s{energy, h};
    const Action a = policy(s);
    double next = 0.0;
    try {
      next = residual_energy(s, a, params);
    } catch (const FeasibilityError& e) {
      throw PolicyViolationError("block " + std::to_string(m + 1) + ", state " + describe(s) +
                                     ": " + e.what(),
                                 m + 1);
    }
    const auto lmax = lambda_max(h, params);
    const bool decoded = lmax && a.ps_ratio <= *lmax;
    outcomes[m] = decoded && snr_rd(g, a.transmit_energy, params) >= gamma ? 1.0 : 0.0;
    energy = next;
  }

  SimulationResult r;
  r.blocks = config.blocks;
  r.seed = config.seed;
  summarize(outcomes, r);
  if (config.keep_trace) r.trace = std::move(outcomes);
  return r;
}

SimulationResult simulate_discrete(const MdpModel& model, const DecisionRule& rule,
                                   const SimulationConfig& config,
                                   std::optional<std::size_t> start_channel) {
  model.check_rule(rule);
  if (config.blocks < 1) throw std::invalid_argument("simulation needs at least one block");
  const auto levels = model.grid().levels();
  const auto hit = std::find(levels.begin(), levels.end(), config.initial_energy);
  if (hit == levels.end()) {
    throw DomainError("initial energy " + std::to_string(config.initial_energy) +
                      " uJ is not a battery grid level");
  }
  if (start_channel && *start_channel >= model.num_channels()) {
    throw std::out_of_range("start channel out of range");
  }
  Generator gen(config.seed);
  const ChannelSampler draw_h(model.sr_channel());

  std::size_t level = static_cast<std::size_t>(hit - levels.begin());
  std::size_t channel = start_channel ? *start_channel : draw_h(gen);
  std::vector<double> outcomes(config.blocks);
  for (std::size_t m = 0; m < config.blocks; ++m) {
    const std::size_t s = model.state_index(level, channel);
    const DiscreteAction& a = model.action(s, rule[s]);
    outcomes[m] = a.reward;
    level = a.next_level;
    channel = draw_h(gen);
  }

  SimulationResult r;
  r.blocks = config.blocks;
  r.seed = config.seed;
  summarize(outcomes, r);
  if (config.keep_trace) r.trace = std::move(outcomes);
  return r;
}

std::string to_csv_row(const SimulationResult& result) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%llu,%zu,%.12g,%.12g",
                static_cast<unsigned long long>(result.seed), result.blocks, result.mean,
                result.standard_error);
  return buf;
}

}  // namespace swiptrelay
