#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "swiptrelay/channel_model.hpp"
#include "swiptrelay/relay_dynamics.hpp"

namespace swiptrelay {

// All level, state and action indices in this module are 0-based. Level k
// holds energy k * B / (N_b - 1); state (level j, channel i) has flat index
// j * N_c + i.

// Uniform battery levels 0, B/(N_b-1), ..., B.
class BatteryGrid {
 public:
  BatteryGrid(int n_levels, double capacity);

  std::size_t size() const noexcept { return levels_.size(); }
  double level(std::size_t k) const { return levels_.at(k); }
  std::span<const double> levels() const noexcept { return levels_; }
  double capacity() const noexcept { return levels_.back(); }

 private:
  std::vector<double> levels_;
};

struct MdpOptions {
  // Residual energy exactly on a level is pushed to the next level up, which
  // is the literal half-open reading of the discretization. When false, exact
  // hits stay where they are.
  bool round_exact_up = true;
};

// Level reached after the hypothetical injection: residual energies in
// [e_k, e_{k+1}) move to e_{k+1}; B stays at B. Throws DomainError outside
// [0, B].
std::size_t round_up_level(double residual, const BatteryGrid& grid, bool round_exact_up = true);

// One element of the reduced action set of a discrete state. The residual
// energy before injection is exactly the target level.
struct DiscreteAction {
  double ps_ratio = 0.0;
  double transmit_energy = 0.0;
  std::size_t target_level = 0;
  std::size_t next_level = 0;  // after injection
  double reward = 0.0;

  Action action() const { return Action{ps_ratio, transmit_energy}; }
};

// Reduced actions for state (grid level, h): lambda = 1 always, plus
// lambda = lambda_max(h) for C2 states, each paired with every grid level not
// above the mid-block energy. The lambda = 1 branch comes first, targets
// ascending; the list is never empty.
std::vector<DiscreteAction> enumerate_actions(std::size_t level, double h, const BatteryGrid& grid,
                                              const FiniteChannel& g_channel,
                                              const SystemParams& params,
                                              const MdpOptions& options = {});

// Per-state action index.
using DecisionRule = std::vector<std::size_t>;

// Finite-state model with battery-level discretization. Immutable once built.
class MdpModel {
 public:
  MdpModel(BatteryGrid grid, FiniteChannel h_channel,
           std::vector<std::vector<DiscreteAction>> actions);

  std::size_t num_states() const noexcept { return actions_.size(); }
  std::size_t num_levels() const noexcept { return grid_.size(); }
  std::size_t num_channels() const noexcept { return h_channel_.size(); }

  std::size_t state_index(std::size_t level, std::size_t channel) const;
  std::size_t level_of(std::size_t state) const { return state / num_channels(); }
  std::size_t channel_of(std::size_t state) const { return state % num_channels(); }
  State state(std::size_t s) const;

  const BatteryGrid& grid() const noexcept { return grid_; }
  const FiniteChannel& sr_channel() const noexcept { return h_channel_; }
  std::span<const DiscreteAction> actions(std::size_t s) const { return actions_.at(s); }
  const DiscreteAction& action(std::size_t s, std::size_t a) const { return actions_.at(s).at(a); }
  std::size_t total_actions() const noexcept;

  // Throws std::invalid_argument if rule has the wrong size or an index out
  // of range.
  void check_rule(const DecisionRule& rule) const;

  std::vector<double> reward_vector(const DecisionRule& rule) const;

  // Nonzero entries of the transition row of s under action a: the S-R pmf
  // laid over the column block of the post-injection level.
  std::vector<std::pair<std::size_t, double>> transition_row(std::size_t s, std::size_t a) const;

  // Row-major dense transition matrix of a rule. Intended for small models.
  std::vector<double> transition_matrix(const DecisionRule& rule) const;

  // Expected next-block value sum_{s'} Theta(s, a, s') v(s') per level block:
  // entry k is the f_H-weighted mean of v over level k.
  std::vector<double> level_expectations(std::span<const double> v) const;

  // (Theta_d v)(s) for every state.
  std::vector<double> apply_transition(const DecisionRule& rule, std::span<const double> v) const;

 private:
  BatteryGrid grid_;
  FiniteChannel h_channel_;
  std::vector<std::vector<DiscreteAction>> actions_;
};

// Throws std::invalid_argument if n_levels < 2.
MdpModel build_mdp(const FiniteChannel& h_channel, const FiniteChannel& g_channel,
                   const SystemParams& params, int n_levels, const MdpOptions& options = {});

// Battery-depleting start rule: target level 0 with lambda_max for C2 states
// and lambda = 1 otherwise.
DecisionRule heuristic_initial_rule(const MdpModel& model);

struct PolicyEvaluation {
  double gain = 0.0;
  std::vector<double> bias;  // bias[0] == 0
  double residual = 0.0;     // max-norm residual of the evaluation equations
};

// Solves gain + bias = p_d + Theta_d bias with bias[0] = 0. Dense LU up to
// 5000 states, BiCGSTAB above. Throws MultichainError when the system is
// singular or its reciprocal condition estimate is below 1e-12.
PolicyEvaluation policy_evaluate(const MdpModel& model, const DecisionRule& rule);

// Greedy improvement on reward + expected next bias. The incumbent action is
// kept when it ties the maximum; otherwise ties go to the lowest index.
DecisionRule policy_improve(const MdpModel& model, const PolicyEvaluation& evaluation,
                            const DecisionRule* incumbent = nullptr);

struct PolicyIterationResult {
  double gain = 0.0;
  std::vector<double> bias;
  DecisionRule rule;
  std::size_t iterations = 0;
  std::vector<double> gain_history;
};

inline constexpr std::size_t kMaxPolicyIterations = 10'000;

// Alternates evaluation and improvement until the rule is stable. Starts from
// heuristic_initial_rule when no rule is given. Throws NonConvergenceError at
// the iteration cap; MultichainError propagates from evaluation.
PolicyIterationResult policy_iteration(const MdpModel& model,
                                       std::optional<DecisionRule> initial_rule = std::nullopt,
                                       std::size_t max_iterations = kMaxPolicyIterations);

// Simulation check that the long-run average does not depend on which
// zero-energy state the chain starts from.
struct StateIndependenceCheck {
  std::size_t blocks = 10'000;
  std::uint64_t seed = 1;
  double z = 5.0;  // per-start tolerance in standard errors
};

// Upper bound on the best average success probability of the original
// system: the f_H average of the optimal long-run reward from (0, h). Throws
// MultichainError if the optional check finds a start-dependent average.
double upper_bound(const MdpModel& model, const PolicyIterationResult& result,
                   const FiniteChannel& h_channel,
                   const std::optional<StateIndependenceCheck>& check = std::nullopt);

// Long-run average reward of a rule from the initial distribution (level 0,
// channel ~ f_H), via power iteration of the lazy chain (I + Theta_d) / 2,
// whose limit is the Cesaro limit of Theta_d.
double long_run_average(const MdpModel& model, const DecisionRule& rule);

inline constexpr std::size_t kBruteForceBudget = 1'000'000;

// Best long_run_average over every stationary deterministic rule. Throws
// BudgetExceededError when the number of rules exceeds the budget.
double oracle_gain_bruteforce(const MdpModel& model, std::size_t budget = kBruteForceBudget);

}  // namespace swiptrelay
