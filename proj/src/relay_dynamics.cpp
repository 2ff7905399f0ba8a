#include "swiptrelay/relay_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "swiptrelay/errors.hpp"

namespace swiptrelay {

namespace {

void require_ratio(double lambda, const char* where) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError(std::string(where) + ": PS ratio " + std::to_string(lambda) +
                      " outside [0, 1]");
  }
}

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw std::invalid_argument(std::string("system parameter ") + name +
                                " must be positive and finite");
  }
}

}  // namespace

double SystemParams::threshold_snr() const { return std::pow(4.0, rate) - 1.0; }

void SystemParams::validate() const {
  require_positive(source_power, "source_power");
  require_positive(noise_power, "noise_power");
  require_positive(block_duration, "block_duration");
  require_positive(conversion_efficiency, "conversion_efficiency");
  require_positive(rate, "rate");
  require_positive(battery_capacity, "battery_capacity");
  if (!(conversion_efficiency < 1.0)) {
    throw std::invalid_argument("system parameter conversion_efficiency must be below 1");
  }
}

double snr_sr(double h, double lambda, const SystemParams& params) {
  require_ratio(lambda, "snr_sr");
  if (!(h >= 0.0)) throw DomainError("snr_sr: negative channel gain");
  return (1.0 - lambda) * h * params.source_power / ((2.0 - lambda) * params.noise_power);
}

double snr_rd(double g, double u, const SystemParams& params) {
  if (!(g >= 0.0) || !(u >= 0.0)) throw DomainError("snr_rd: negative gain or energy");
  return u * g / (params.block_duration * params.noise_power);
}

std::optional<double> lambda_max(double h, const SystemParams& params) {
  const double received = h * params.source_power;
  const double floor = params.noise_power * params.threshold_snr();
  if (!(received >= 2.0 * floor)) return std::nullopt;
  return (received - 2.0 * floor) / (received - floor);
}

double harvest_energy(double energy, double h, double lambda, const SystemParams& params) {
  require_ratio(lambda, "harvest_energy");
  if (!(energy >= 0.0 && energy <= params.battery_capacity)) {
    throw DomainError("harvest_energy: battery energy " + std::to_string(energy) +
                      " outside [0, B]");
  }
  const double harvested = params.conversion_efficiency * params.source_power * h * lambda *
                           params.block_duration / 2.0;
  return std::min(harvested + energy, params.battery_capacity);
}

void check_feasible(const State& s, const Action& a, const SystemParams& params) {
  if (!(a.ps_ratio >= 0.0 && a.ps_ratio <= 1.0)) {
    throw FeasibilityError("action PS ratio " + std::to_string(a.ps_ratio) +
                           " outside [0, 1]");
  }
  if (!(a.transmit_energy >= 0.0)) {
    throw FeasibilityError("action transmit energy is negative");
  }
  const double half = harvest_energy(s.energy, s.sr_gain, a.ps_ratio, params);
  if (a.transmit_energy > half) {
    throw FeasibilityError("transmit energy " + std::to_string(a.transmit_energy) +
                           " uJ exceeds mid-block battery energy " + std::to_string(half) +
                           " uJ");
  }
}

double residual_energy(const State& s, const Action& a, const SystemParams& params) {
  check_feasible(s, a, params);
  return harvest_energy(s.energy, s.sr_gain, a.ps_ratio, params) - a.transmit_energy;
}

double rd_success_prob(double u, const FiniteChannel& g_channel, const SystemParams& params) {
  if (!(u >= 0.0)) throw DomainError("rd_success_prob: negative transmit energy");
  const double gamma = params.threshold_snr();
  const auto gains = g_channel.gains();
  // snr_rd is non-decreasing in g, so the successful gains form a suffix.
  const auto first = std::partition_point(gains.begin(), gains.end(), [&](double g) {
    return snr_rd(g, u, params) < gamma;
  });
  return g_channel.tail_mass(static_cast<std::size_t>(first - gains.begin()));
}

double reward(const State& s, const Action& a, const FiniteChannel& g_channel,
              const SystemParams& params) {
  check_feasible(s, a, params);
  const auto lmax = lambda_max(s.sr_gain, params);
  if (!lmax || a.ps_ratio > *lmax) return 0.0;
  return rd_success_prob(a.transmit_energy, g_channel, params);
}

StateClass classify_state(const State& s, const FiniteChannel& g_channel,
                          const SystemParams& params) {
  const auto lmax = lambda_max(s.sr_gain, params);
  if (!lmax) return StateClass::C1;
  const double best_energy = harvest_energy(s.energy, s.sr_gain, *lmax, params);
  // Same predicate as rd_success_prob, so C2 implies a positive reward.
  if (snr_rd(g_channel.max_gain(), best_energy, params) < params.threshold_snr()) {
    return StateClass::C1;
  }
  return StateClass::C2;
}

Action heuristic_rule(const State& s, const FiniteChannel& g_channel, const SystemParams& params) {
  double lambda = 1.0;
  if (classify_state(s, g_channel, params) == StateClass::C2) {
    lambda = *lambda_max(s.sr_gain, params);
  }
  return Action{lambda, harvest_energy(s.energy, s.sr_gain, lambda, params)};
}

double heuristic_average_success(const FiniteChannel& h_channel, const FiniteChannel& g_channel,
                                 const SystemParams& params) {
  double total = 0.0;
  for (std::size_t i = 0; i < h_channel.size(); ++i) {
    const State s{0.0, h_channel.gain(i)};
    total += h_channel.probability(i) * reward(s, heuristic_rule(s, g_channel, params),
                                               g_channel, params);
  }
  return total;
}

}  // namespace swiptrelay
