#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "swiptrelay/channel_model.hpp"
#include "swiptrelay/errors.hpp"
#include "swiptrelay/mdp_bound.hpp"
#include "swiptrelay/monte_carlo.hpp"
#include "swiptrelay/relay_dynamics.hpp"

using namespace swiptrelay;

namespace {

DiscreteAction synthetic(std::size_t next, double r) {
  DiscreteAction a;
  a.ps_ratio = 1.0;
  a.next_level = next;
  a.reward = r;
  return a;
}

// Spends half of the mid-block energy at lambda_max when that can succeed.
Policy half_spend_policy(const FiniteChannel& g, const SystemParams& p) {
  return [g, p](const State& s) {
    Action a = heuristic_rule(s, g, p);
    a.transmit_energy *= 0.5;
    return a;
  };
}

// Saves energy until the mid-block battery passes a fraction of capacity.
Policy saving_policy(const FiniteChannel& g, const SystemParams& p, double fraction) {
  return [g, p, fraction](const State& s) {
    Action a = heuristic_rule(s, g, p);
    if (a.transmit_energy < fraction * p.battery_capacity) {
      a.ps_ratio = 1.0;
      a.transmit_energy = 0.0;
    }
    return a;
  };
}

}  // namespace

TEST_CASE("sample_channel") {
  Generator gen(3);
  const auto one = channel_from_table({2.0}, {1.0});
  for (int k = 0; k < 100; ++k) CHECK(sample_channel(one, gen) == 0);

  const auto two = channel_from_table({0.5, 1.5}, {0.5, 0.5});
  const ChannelSampler draw(two);
  std::size_t upper = 0;
  const std::size_t n = 1'000'000;
  for (std::size_t k = 0; k < n; ++k) upper += draw(gen);
  // 3 sigma of a fair binomial at 1e6 draws is 0.0015.
  CHECK(std::abs(static_cast<double>(upper) / n - 0.5) <= 0.002);

  const ChannelSampler big(quantize_equiprobable_exponential(200));
  CHECK(std::abs(big.cumulative().back() - 1.0) <= 1e-12);
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Generator gen(99);
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform01(gen);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("simulate_original basics") {
  SystemParams p;
  const auto ch = quantize_equiprobable_exponential(20);
  SimulationConfig cfg;
  cfg.blocks = 5000;
  cfg.seed = 42;

  const auto silent = simulate_original([](const State&) { return Action{1.0, 0.0}; }, ch, ch, p, cfg);
  CHECK(silent.mean == 0.0);
  CHECK(silent.standard_error == 0.0);

  cfg.keep_trace = true;
  const auto a = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
  const auto b = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
  CHECK(a == b);
  CHECK(a.trace.size() == cfg.blocks);
  CHECK(a.generator == std::string("mt19937_64"));
  cfg.seed = 43;
  const auto c = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
  CHECK(c.trace != a.trace);
}

TEST_CASE("simulate_original rejects infeasible actions") {
  SystemParams p;
  const auto ch = quantize_equiprobable_exponential(5);
  SimulationConfig cfg;
  cfg.blocks = 10;
  const Policy greedy = [](const State& s) { return Action{0.5, s.energy + 100.0}; };
  CHECK_THROWS_AS(simulate_original(greedy, ch, ch, p, cfg), PolicyViolationError);
  try {
    simulate_original(greedy, ch, ch, p, cfg);
  } catch (const PolicyViolationError& e) {
    CHECK(e.block() == 1);
    CHECK(std::string(e.what()).find("block 1") != std::string::npos);
  }
  cfg.initial_energy = p.battery_capacity + 1.0;
  CHECK_THROWS_AS(simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg), DomainError);
}

TEST_CASE("battery trajectory stays within [0, B]") {
  SystemParams p;
  p.battery_capacity = 0.8;
  const auto ch = quantize_equiprobable_exponential(30);
  double lo = INFINITY;
  double hi = -INFINITY;
  const Policy base = saving_policy(ch, p, 0.6);
  const Policy watch = [&](const State& s) {
    lo = std::min(lo, s.energy);
    hi = std::max(hi, s.energy);
    return base(s);
  };
  SimulationConfig cfg;
  cfg.blocks = 20000;
  simulate_original(watch, ch, ch, p, cfg);
  CHECK(lo >= 0.0);
  CHECK(hi <= p.battery_capacity);
  CHECK(hi > 0.0);
}

TEST_CASE("heuristic closed form matches simulation") {
  SimulationConfig cfg;
  cfg.blocks = 100'000;
  cfg.seed = 8;
  SUBCASE("two-state channels") {
    SystemParams p;
    p.source_power = 0.05;
    const auto ch = quantize_equiprobable_exponential(2);
    const double analytic = heuristic_average_success(ch, ch, p);
    const auto sim = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
    CHECK(analytic > 0.0);
    CHECK(std::abs(sim.mean - analytic) <= 3.0 * sim.standard_error);
  }
  SUBCASE("defaults") {
    SystemParams p;
    const auto ch = quantize_equiprobable_exponential(200);
    const double analytic = heuristic_average_success(ch, ch, p);
    const auto sim = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
    CHECK(std::abs(sim.mean - analytic) <= 3.0 * sim.standard_error);
  }
}

TEST_CASE("heuristic forgets the initial battery after one block") {
  SystemParams p;
  const auto ch = quantize_equiprobable_exponential(50);
  SimulationConfig cfg;
  cfg.blocks = 20000;
  cfg.keep_trace = true;
  const auto empty = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
  cfg.initial_energy = p.battery_capacity;
  const auto full = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
  CHECK(std::equal(empty.trace.begin() + 1, empty.trace.end(), full.trace.begin() + 1));
  CHECK(std::abs(empty.mean - full.mean) <= 1.0 / static_cast<double>(cfg.blocks));
}

TEST_CASE("standard error shrinks like 1/sqrt(M)") {
  SystemParams p;
  p.source_power = 0.3;
  const auto ch = quantize_equiprobable_exponential(50);
  double ratio_sum = 0.0;
  const int repeats = 6;
  for (int r = 0; r < repeats; ++r) {
    SimulationConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(r);
    cfg.blocks = 20000;
    const auto small = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
    cfg.blocks = 40000;
    cfg.seed += 77;
    const auto large = simulate_original(heuristic_policy(ch, p), ch, ch, p, cfg);
    ratio_sum += large.standard_error / small.standard_error;
  }
  const double ratio = ratio_sum / repeats;
  CHECK(ratio >= 0.6);
  CHECK(ratio <= 0.9);
}

TEST_CASE("simulate_discrete") {
  SUBCASE("optimal rule reproduces the gain") {
    SystemParams p;
    p.battery_capacity = 2.0;
    p.source_power = 0.5;
    const auto h = quantize_equiprobable_exponential(40);
    const auto model = build_mdp(h, h, p, 5);
    const auto res = policy_iteration(model);
    SimulationConfig cfg;
    cfg.blocks = 100'000;
    cfg.seed = 4;
    const auto sim = simulate_discrete(model, res.rule, cfg);
    const double se = std::max(sim.standard_error, sim.batch_standard_error);
    CHECK(std::abs(sim.mean - res.gain) <= 3.0 * se);
  }
  SUBCASE("zero rewards") {
    SystemParams p;
    p.source_power = 1e-6;
    const auto h = quantize_equiprobable_exponential(10);
    const auto model = build_mdp(h, h, p, 3);
    SimulationConfig cfg;
    cfg.blocks = 1000;
    CHECK(simulate_discrete(model, policy_iteration(model).rule, cfg).mean == 0.0);
  }
  SUBCASE("absorbing state accrues its reward exactly") {
    const MdpModel model(BatteryGrid(2, 1.0), channel_from_table({1.0}, {1.0}),
                         {{synthetic(1, 0.1)}, {synthetic(1, 0.625), synthetic(1, 0.3)}});
    SimulationConfig cfg;
    cfg.blocks = 1000;
    cfg.initial_energy = 1.0;
    const auto sim = simulate_discrete(model, {0, 0}, cfg);
    CHECK(sim.mean == 0.625);
    CHECK(sim.standard_error == 0.0);
    cfg.initial_energy = 0.5;
    CHECK_THROWS_AS(simulate_discrete(model, {0, 0}, cfg), DomainError);
  }
}

TEST_CASE("bound dominates other stationary policies on the original system") {
  const auto ch = quantize_equiprobable_exponential(40);
  for (const double cap : {1.0, 4.0}) {
    SystemParams p;
    p.battery_capacity = cap;
    p.source_power = 0.2;
    const auto model = build_mdp(ch, ch, p, 5);
    const double pu = upper_bound(model, policy_iteration(model), ch);
    SimulationConfig cfg;
    cfg.blocks = 50'000;
    for (const Policy& pol : {heuristic_policy(ch, p), half_spend_policy(ch, p),
                              saving_policy(ch, p, 0.3), saving_policy(ch, p, 0.05)}) {
      const auto sim = simulate_original(pol, ch, ch, p, cfg);
      const double se = std::max(sim.standard_error, sim.batch_standard_error);
      CHECK(pu >= sim.mean - 3.0 * se);
    }
  }
}

TEST_CASE("csv row") {
  SimulationResult r;
  r.seed = 7;
  r.blocks = 100;
  r.mean = 0.25;
  r.standard_error = 0.0435;
  CHECK(std::string(kSimulationCsvHeader) == "seed,M,mean,stderr");
  CHECK(to_csv_row(r) == "7,100,0.25,0.0435");
}
