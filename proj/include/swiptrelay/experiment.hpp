#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swiptrelay/relay_dynamics.hpp"

namespace swiptrelay {

enum class SweepAxis { Battery, Power };

struct ExperimentConfig {
  SystemParams params;
  int n_channel_states = 200;
  std::vector<int> n_levels{5, 9};
  SweepAxis sweep = SweepAxis::Battery;
  std::vector<double> sweep_values{2, 4, 6, 8, 10, 12, 14, 16};
  std::size_t blocks = 100'000;
  std::uint64_t seed = 1;
  std::string out;       // empty: stdout
  unsigned threads = 0;  // 0: hardware concurrency
  bool round_exact_up = true;

  // Throws ConfigError on empty sweep lists, non-positive physical values,
  // N_b < 2 or N_c < 1.
  void validate() const;

  // Physical parameters at one sweep value.
  SystemParams params_at(double sweep_value) const;
};

// Key names and defaults, one per line, for --help output.
std::string config_reference();

// Parses `key = value` lines (# starts a comment), applies overrides on top
// and validates. Unknown keys, malformed numbers and an empty sweep axis
// throw ConfigError. Choosing `sweep = power` without `sweep_values` selects
// the default power list {0.5, 1, 2}.
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::map<std::string, std::string>& overrides = {});

// Same as parse_config_text on the contents of path; an empty path means no
// file.
ExperimentConfig parse_config(const std::string& path,
                              const std::map<std::string, std::string>& overrides = {});

std::string sweep_param_name(SweepAxis axis);

struct SweepRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  int n_levels = 0;
  double p_heuristic_analytic = 0.0;
  double p_heuristic_sim = 0.0;
  double p_heuristic_sim_stderr = 0.0;
  double p_upper_bound = 0.0;
  std::size_t iterations = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

using SweepTable = std::vector<SweepRow>;

inline constexpr const char* kSweepCsvHeader =
    "sweep_param,sweep_value,n_levels,p_heuristic_analytic,p_heuristic_sim,"
    "p_heuristic_sim_stderr,p_upper_bound,status";

// One row per (sweep value, N_b), in sweep order then N_b order. A failing
// point is recorded with a non-ok status and the sweep carries on.
SweepTable run_sweep(const ExperimentConfig& config);

std::string to_csv(const SweepTable& table);

// 100 (value - base) / base, or nullopt when base is zero.
std::optional<double> percentage_gain(double value, double base);

struct GainEntry {
  std::string kind;  // "bound_gain" or "heuristic_gap"
  int n_levels = 0;
  double from_value = 0.0;
  double to_value = 0.0;
  std::optional<double> percent;
};

// Consecutive-point gains of the bound for each N_b, then per-row gaps
// between bound and heuristic. Throws std::invalid_argument with fewer than
// two sweep points.
std::vector<GainEntry> report_gains(const SweepTable& table);

inline constexpr const char* kGainCsvHeader = "kind,n_levels,from_value,to_value,percent";
std::string to_csv(const std::vector<GainEntry>& gains);

// 12 significant digits, "nan" for NaN.
std::string format_number(double v);

}  // namespace swiptrelay
