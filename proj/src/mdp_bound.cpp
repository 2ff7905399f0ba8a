#include "swiptrelay/mdp_bound.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

#include "swiptrelay/errors.hpp"
#include "swiptrelay/monte_carlo.hpp"

namespace swiptrelay {

namespace {

constexpr std::size_t kDenseSolveLimit = 5000;
constexpr double kMinReciprocalCondition = 1e-12;
constexpr double kEvaluationResidualLimit = 1e-9;
constexpr double kCesaroTolerance = 1e-12;
constexpr std::size_t kCesaroMaxSteps = 1'000'000;

}  // namespace

BatteryGrid::BatteryGrid(int n_levels, double capacity) {
  if (n_levels < 2) {
    throw std::invalid_argument("battery grid needs at least 2 levels, got " +
                                std::to_string(n_levels));
  }
  if (!std::isfinite(capacity) || !(capacity > 0.0)) {
    throw std::invalid_argument("battery capacity must be positive and finite");
  }
  levels_.resize(static_cast<std::size_t>(n_levels));
  const double steps = static_cast<double>(n_levels - 1);
  for (int k = 0; k < n_levels; ++k) {
    levels_[static_cast<std::size_t>(k)] = static_cast<double>(k) * capacity / steps;
  }
  levels_.back() = capacity;
}

std::size_t round_up_level(double residual, const BatteryGrid& grid, bool round_exact_up) {
  const auto levels = grid.levels();
  if (!(residual >= 0.0 && residual <= grid.capacity())) {
    throw DomainError("round_up_level: residual energy " + std::to_string(residual) +
                      " outside [0, B]");
  }
  const auto it = round_exact_up ? std::upper_bound(levels.begin(), levels.end(), residual)
                                 : std::lower_bound(levels.begin(), levels.end(), residual);
  if (it == levels.end()) return grid.size() - 1;
  return static_cast<std::size_t>(it - levels.begin());
}

std::vector<DiscreteAction> enumerate_actions(std::size_t level, double h, const BatteryGrid& grid,
                                              const FiniteChannel& g_channel,
                                              const SystemParams& params,
                                              const MdpOptions& options) {
  const State s{grid.level(level), h};
  std::vector<double> ratios{1.0};
  if (classify_state(s, g_channel, params) == StateClass::C2) {
    ratios.push_back(*lambda_max(h, params));
  }

  std::vector<DiscreteAction> out;
  std::set<std::pair<double, std::size_t>> seen;
  for (const double lambda : ratios) {
    const double half = harvest_energy(s.energy, h, lambda, params);
    for (std::size_t t = 0; t < grid.size() && grid.level(t) <= half; ++t) {
      if (!seen.emplace(lambda, t).second) continue;
      DiscreteAction a;
      a.ps_ratio = lambda;
      a.transmit_energy = half - grid.level(t);
      a.target_level = t;
      a.next_level = round_up_level(grid.level(t), grid, options.round_exact_up);
      a.reward = reward(s, a.action(), g_channel, params);
      out.push_back(a);
    }
  }
  return out;
}

MdpModel::MdpModel(BatteryGrid grid, FiniteChannel h_channel,
                   std::vector<std::vector<DiscreteAction>> actions)
    : grid_(std::move(grid)), h_channel_(std::move(h_channel)), actions_(std::move(actions)) {
  if (actions_.size() != grid_.size() * h_channel_.size()) {
    throw std::invalid_argument("mdp: action table size does not match levels x channels");
  }
  for (std::size_t s = 0; s < actions_.size(); ++s) {
    if (actions_[s].empty()) {
      throw std::invalid_argument("mdp: state " + std::to_string(s) + " has no actions");
    }
    for (const auto& a : actions_[s]) {
      if (a.next_level >= grid_.size() || a.target_level >= grid_.size()) {
        throw std::invalid_argument("mdp: action level out of range in state " +
                                    std::to_string(s));
      }
    }
  }
}

std::size_t MdpModel::state_index(std::size_t level, std::size_t channel) const {
  if (level >= num_levels() || channel >= num_channels()) {
    throw std::out_of_range("mdp: state coordinates out of range");
  }
  return level * num_channels() + channel;
}

State MdpModel::state(std::size_t s) const {
  return State{grid_.level(level_of(s)), h_channel_.gain(channel_of(s))};
}

std::size_t MdpModel::total_actions() const noexcept {
  std::size_t n = 0;
  for (const auto& list : actions_) n += list.size();
  return n;
}

void MdpModel::check_rule(const DecisionRule& rule) const {
  if (rule.size() != num_states()) {
    throw std::invalid_argument("decision rule has " + std::to_string(rule.size()) +
                                " entries for " + std::to_string(num_states()) + " states");
  }
  for (std::size_t s = 0; s < rule.size(); ++s) {
    if (rule[s] >= actions_[s].size()) {
      throw std::invalid_argument("decision rule picks missing action in state " +
                                  std::to_string(s));
    }
  }
}

std::vector<double> MdpModel::reward_vector(const DecisionRule& rule) const {
  check_rule(rule);
  std::vector<double> p(num_states());
  for (std::size_t s = 0; s < p.size(); ++s) p[s] = actions_[s][rule[s]].reward;
  return p;
}

std::vector<std::pair<std::size_t, double>> MdpModel::transition_row(std::size_t s,
                                                                     std::size_t a) const {
  const std::size_t block = action(s, a).next_level;
  std::vector<std::pair<std::size_t, double>> row;
  row.reserve(num_channels());
  for (std::size_t i = 0; i < num_channels(); ++i) {
    row.emplace_back(block * num_channels() + i, h_channel_.probability(i));
  }
  return row;
}

std::vector<double> MdpModel::transition_matrix(const DecisionRule& rule) const {
  check_rule(rule);
  const std::size_t n = num_states();
  std::vector<double> theta(n * n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [col, prob] : transition_row(s, rule[s])) theta[s * n + col] = prob;
  }
  return theta;
}

std::vector<double> MdpModel::level_expectations(std::span<const double> v) const {
  if (v.size() != num_states()) throw std::invalid_argument("mdp: vector size mismatch");
  std::vector<double> w(num_levels(), 0.0);
  for (std::size_t k = 0; k < num_levels(); ++k) {
    for (std::size_t i = 0; i < num_channels(); ++i) {
      w[k] += h_channel_.probability(i) * v[k * num_channels() + i];
    }
  }
  return w;
}

std::vector<double> MdpModel::apply_transition(const DecisionRule& rule,
                                               std::span<const double> v) const {
  check_rule(rule);
  const std::vector<double> w = level_expectations(v);
  std::vector<double> out(num_states());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = w[actions_[s][rule[s]].next_level];
  return out;
}

MdpModel build_mdp(const FiniteChannel& h_channel, const FiniteChannel& g_channel,
                   const SystemParams& params, int n_levels, const MdpOptions& options) {
  params.validate();
  BatteryGrid grid(n_levels, params.battery_capacity);
  std::vector<std::vector<DiscreteAction>> actions;
  actions.reserve(grid.size() * h_channel.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < h_channel.size(); ++i) {
      actions.push_back(
          enumerate_actions(k, h_channel.gain(i), grid, g_channel, params, options));
    }
  }
  return MdpModel(std::move(grid), h_channel, std::move(actions));
}

DecisionRule heuristic_initial_rule(const MdpModel& model) {
  DecisionRule rule(model.num_states(), 0);
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const auto acts = model.actions(s);
    // Last action targeting level 0 belongs to the lambda_max branch when
    // the state is C2.
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (acts[a].target_level == 0) rule[s] = a;
    }
  }
  return rule;
}

namespace {

// Unknowns x = (gain, bias[1], ..., bias[n-1]); bias[0] is pinned to 0 by
// replacing the first column of (I - Theta) with ones.
PolicyEvaluation solve_dense(const MdpModel& model, const DecisionRule& rule,
                             const std::vector<double>& p) {
  const auto n = static_cast<Eigen::Index>(model.num_states());
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (const auto& [col, prob] : model.transition_row(static_cast<std::size_t>(s),
                                                        rule[static_cast<std::size_t>(s)])) {
      a(s, static_cast<Eigen::Index>(col)) -= prob;
    }
  }
  a.col(0).setOnes();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond >= kMinReciprocalCondition)) {
    throw MultichainError("policy evaluation system is singular (reciprocal condition " +
                              std::to_string(rcond) + "); rule is likely multichain",
                          rule);
  }
  const Eigen::VectorXd x = lu.solve(Eigen::Map<const Eigen::VectorXd>(p.data(), n));
  PolicyEvaluation ev;
  ev.gain = x(0);
  ev.bias.assign(x.data(), x.data() + n);
  ev.bias[0] = 0.0;
  return ev;
}

PolicyEvaluation solve_iterative(const MdpModel& model, const DecisionRule& rule,
                                 const std::vector<double>& p) {
  const auto n = static_cast<Eigen::Index>(model.num_states());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (model.num_channels() + 1));
  for (Eigen::Index s = 0; s < n; ++s) {
    entries.emplace_back(s, 0, 1.0);
    if (s != 0) entries.emplace_back(s, s, 1.0);
    for (const auto& [col, prob] : model.transition_row(static_cast<std::size_t>(s),
                                                        rule[static_cast<std::size_t>(s)])) {
      if (col != 0) entries.emplace_back(s, static_cast<Eigen::Index>(col), -prob);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(1e-14);
  solver.setMaxIterations(10 * static_cast<int>(n));
  solver.compute(a);
  if (solver.info() != Eigen::Success) {
    throw MultichainError("policy evaluation preconditioner failed; rule is likely multichain",
                          rule);
  }
  const Eigen::VectorXd x = solver.solve(Eigen::Map<const Eigen::VectorXd>(p.data(), n));
  if (solver.info() != Eigen::Success) {
    throw MultichainError("policy evaluation did not converge; rule is likely multichain", rule);
  }
  PolicyEvaluation ev;
  ev.gain = x(0);
  ev.bias.assign(x.data(), x.data() + n);
  ev.bias[0] = 0.0;
  return ev;
}

}  // namespace

PolicyEvaluation policy_evaluate(const MdpModel& model, const DecisionRule& rule) {
  const std::vector<double> p = model.reward_vector(rule);
  PolicyEvaluation ev = model.num_states() <= kDenseSolveLimit ? solve_dense(model, rule, p)
                                                                : solve_iterative(model, rule, p);
  const std::vector<double> next = model.apply_transition(rule, ev.bias);
  double residual = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    residual = std::max(residual, std::abs(ev.gain + ev.bias[s] - p[s] - next[s]));
  }
  ev.residual = residual;
  if (!(residual <= kEvaluationResidualLimit)) {
    throw MultichainError("policy evaluation residual " + std::to_string(residual) +
                              " exceeds 1e-9",
                          rule);
  }
  return ev;
}

DecisionRule policy_improve(const MdpModel& model, const PolicyEvaluation& evaluation,
                            const DecisionRule* incumbent) {
  if (incumbent) model.check_rule(*incumbent);
  const std::vector<double> w = model.level_expectations(evaluation.bias);
  DecisionRule rule(model.num_states(), 0);
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const auto acts = model.actions(s);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : acts) best = std::max(best, a.reward + w[a.next_level]);
    const double tol = 1e-12 * (1.0 + std::abs(best));
    auto value = [&](std::size_t a) { return acts[a].reward + w[acts[a].next_level]; };
    if (incumbent && value((*incumbent)[s]) >= best - tol) {
      rule[s] = (*incumbent)[s];
      continue;
    }
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (value(a) >= best - tol) {
        rule[s] = a;
        break;
      }
    }
  }
  return rule;
}

PolicyIterationResult policy_iteration(const MdpModel& model,
                                       std::optional<DecisionRule> initial_rule,
                                       std::size_t max_iterations) {
  DecisionRule rule = initial_rule ? std::move(*initial_rule) : heuristic_initial_rule(model);
  model.check_rule(rule);
  PolicyIterationResult result;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    PolicyEvaluation ev = policy_evaluate(model, rule);
    result.gain_history.push_back(ev.gain);
    DecisionRule next = policy_improve(model, ev, &rule);
    if (next == rule) {
      result.gain = ev.gain;
      result.bias = std::move(ev.bias);
      result.rule = std::move(rule);
      result.iterations = it;
      return result;
    }
    rule = std::move(next);
  }
  throw NonConvergenceError("policy iteration did not converge within " +
                            std::to_string(max_iterations) + " iterations");
}

double upper_bound(const MdpModel& model, const PolicyIterationResult& result,
                   const FiniteChannel& h_channel,
                   const std::optional<StateIndependenceCheck>& check) {
  if (h_channel.size() != model.num_channels()) {
    throw std::invalid_argument("upper_bound: S-R channel does not match the model");
  }
  model.check_rule(result.rule);
  double bound = 0.0;
  for (std::size_t i = 0; i < h_channel.size(); ++i) {
    // Unichain: the long-run average from (e_1, h) is the gain for every h.
    bound += h_channel.probability(i) * result.gain;
  }
  if (check) {
    for (std::size_t i = 0; i < h_channel.size(); ++i) {
      SimulationConfig cfg;
      cfg.blocks = check->blocks;
      cfg.seed = check->seed + i;
      const SimulationResult sim = simulate_discrete(model, result.rule, cfg, i);
      const double se = std::max(sim.standard_error, sim.batch_standard_error);
      if (std::abs(sim.mean - result.gain) > check->z * se + 1e-12) {
        throw MultichainError("long-run average from start channel " + std::to_string(i) +
                                  " is " + std::to_string(sim.mean) + ", gain is " +
                                  std::to_string(result.gain),
                              result.rule);
      }
    }
  }
  return bound;
}

double long_run_average(const MdpModel& model, const DecisionRule& rule) {
  const std::vector<double> p = model.reward_vector(rule);
  const std::size_t nc = model.num_channels();
  std::vector<double> x(model.num_states(), 0.0);
  for (std::size_t i = 0; i < nc; ++i) x[i] = model.sr_channel().probability(i);

  std::vector<double> next(x.size());
  std::vector<double> block_mass(model.num_levels());
  for (std::size_t step = 0; step < kCesaroMaxSteps; ++step) {
    std::fill(block_mass.begin(), block_mass.end(), 0.0);
    for (std::size_t s = 0; s < x.size(); ++s) {
      block_mass[model.action(s, rule[s]).next_level] += x[s];
    }
    double change = 0.0;
    for (std::size_t s = 0; s < x.size(); ++s) {
      const double moved = block_mass[s / nc] * model.sr_channel().probability(s % nc);
      next[s] = 0.5 * (x[s] + moved);
      change += std::abs(next[s] - x[s]);
    }
    x.swap(next);
    if (change < kCesaroTolerance) break;
  }
  double avg = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) avg += x[s] * p[s];
  return avg;
}

double oracle_gain_bruteforce(const MdpModel& model, std::size_t budget) {
  const std::size_t n = model.num_states();
  double total = 1.0;
  for (std::size_t s = 0; s < n; ++s) total *= static_cast<double>(model.actions(s).size());
  if (total > static_cast<double>(budget)) {
    throw BudgetExceededError("brute-force oracle would enumerate " + std::to_string(total) +
                              " rules, budget is " + std::to_string(budget));
  }
  DecisionRule rule(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, long_run_average(model, rule));
    std::size_t s = 0;
    while (s < n && ++rule[s] == model.actions(s).size()) rule[s++] = 0;
    if (s == n) break;
  }
  return best;
}

}  // namespace swiptrelay
