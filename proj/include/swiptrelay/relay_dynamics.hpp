#pragma once

#include <optional>

#include "swiptrelay/channel_model.hpp"

namespace swiptrelay {

// Physical constants of one scenario. Units are mW, ms and uJ throughout, so
// power x time lands directly in uJ and no conversion factors appear.
struct SystemParams {
  double source_power = 1.0;            // P_s, mW
  double noise_power = 0.001;           // sigma^2, mW
  double block_duration = 1.0;          // T, ms
  double conversion_efficiency = 0.5;   // eta, in (0, 1)
  double rate = 1.5;                    // tau, bits/s/Hz
  double battery_capacity = 10.0;       // B, uJ

  // Minimum SNR for decoding at rate tau over half a block: 4^tau - 1.
  double threshold_snr() const;

  // Throws std::invalid_argument if any field is non-positive, non-finite,
  // or eta is outside (0, 1).
  void validate() const;
};

// Relay state at the start of a block: battery energy and S-R power gain.
struct State {
  double energy = 0.0;   // uJ, in [0, B]
  double sr_gain = 0.0;  // h
};

// PS ratio and transmit energy chosen for one block.
struct Action {
  double ps_ratio = 0.0;         // lambda, in [0, 1]
  double transmit_energy = 0.0;  // u, uJ

  bool operator==(const Action&) const = default;
};

enum class StateClass { C1, C2 };

// SNR of the S-R link at the information decoder.
double snr_sr(double h, double lambda, const SystemParams& params);

// SNR at the destination when the relay spends u uJ over the second half block.
double snr_rd(double g, double u, const SystemParams& params);

// Largest PS ratio that still lets the relay decode, or nullopt when even
// lambda = 0 fails (h P_s < 2 sigma^2 gamma).
std::optional<double> lambda_max(double h, const SystemParams& params);

// Battery energy at mid-block after harvesting with ratio lambda.
double harvest_energy(double energy, double h, double lambda, const SystemParams& params);

// Battery energy left for the next block. Throws FeasibilityError if u
// exceeds the mid-block energy.
double residual_energy(const State& s, const Action& a, const SystemParams& params);

// Throws FeasibilityError unless a is admissible in s.
void check_feasible(const State& s, const Action& a, const SystemParams& params);

// Probability that the R-D link supports rate tau with transmit energy u,
// i.e. the pmf mass of gains g with snr_rd(g, u) >= gamma.
double rd_success_prob(double u, const FiniteChannel& g_channel, const SystemParams& params);

// End-to-end success probability of one block.
double reward(const State& s, const Action& a, const FiniteChannel& g_channel,
              const SystemParams& params);

// C1 states have zero reward under every action; C2 states admit a
// positive-reward action.
StateClass classify_state(const State& s, const FiniteChannel& g_channel,
                          const SystemParams& params);

// Battery-depleting rule: C1 states harvest everything (lambda = 1), C2
// states decode at lambda_max; both transmit the whole mid-block energy.
Action heuristic_rule(const State& s, const FiniteChannel& g_channel, const SystemParams& params);

// Closed-form average success probability of the stationary heuristic
// policy: the f_H-weighted reward of heuristic_rule at zero battery energy.
double heuristic_average_success(const FiniteChannel& h_channel, const FiniteChannel& g_channel,
                                 const SystemParams& params);

}  // namespace swiptrelay
