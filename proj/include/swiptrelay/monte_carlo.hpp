#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swiptrelay/channel_model.hpp"
#include "swiptrelay/mdp_bound.hpp"
#include "swiptrelay/relay_dynamics.hpp"

namespace swiptrelay {

// 64-bit Mersenne Twister: seedable, reproducible across platforms, period
// 2^19937 - 1.
using Generator = std::mt19937_64;
inline constexpr const char* kGeneratorName = "mt19937_64";

// Uniform double in [0, 1) from the top 53 bits of one draw. Used instead of
// std::uniform_real_distribution so traces do not depend on the standard
// library implementation.
double uniform01(Generator& gen);

// Inverse-CDF sampler over a FiniteChannel with a precomputed cumulative table.
class ChannelSampler {
 public:
  explicit ChannelSampler(const FiniteChannel& channel);

  std::size_t operator()(Generator& gen) const;
  std::span<const double> cumulative() const noexcept { return cumulative_; }

 private:
  std::vector<double> cumulative_;
};

std::size_t sample_channel(const FiniteChannel& channel, Generator& gen);

struct SimulationConfig {
  std::size_t blocks = 100'000;  // M
  std::uint64_t seed = 1;
  double initial_energy = 0.0;  // E_1, uJ
  bool keep_trace = false;
};

struct SimulationResult {
  double mean = 0.0;
  // Sample standard deviation of the per-block outcomes over sqrt(M).
  double standard_error = 0.0;
  // Batch-means standard error (50 batches); accounts for correlation
  // between blocks that share battery state. Equals standard_error when
  // M < 100.
  double batch_standard_error = 0.0;
  std::size_t blocks = 0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;
  std::vector<double> trace;  // per-block outcome when keep_trace is set

  bool operator==(const SimulationResult&) const = default;
};

// Stationary decision rule on the continuous state.
using Policy = std::function<Action(const State&)>;

Policy heuristic_policy(const FiniteChannel& g_channel, const SystemParams& params);

// Block-by-block simulation of the continuous-energy system. Each block
// draws h then g, asks the policy for an action and records a Bernoulli
// success when the relay decodes and snr_rd(g, u) >= gamma. Throws
// PolicyViolationError on an infeasible action.
SimulationResult simulate_original(const Policy& policy, const FiniteChannel& h_channel,
                                   const FiniteChannel& g_channel, const SystemParams& params,
                                   const SimulationConfig& config);

// Simulation of the discretized chain, accruing the expected reward p(s, a)
// of each block. initial_energy must be a grid level; the first channel is
// drawn from f_H unless start_channel is given.
SimulationResult simulate_discrete(const MdpModel& model, const DecisionRule& rule,
                                   const SimulationConfig& config,
                                   std::optional<std::size_t> start_channel = std::nullopt);

inline constexpr const char* kSimulationCsvHeader = "seed,M,mean,stderr";
std::string to_csv_row(const SimulationResult& result);

}  // namespace swiptrelay
