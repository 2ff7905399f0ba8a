#include "swiptrelay/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "swiptrelay/channel_model.hpp"
#include "swiptrelay/errors.hpp"
#include "swiptrelay/mdp_bound.hpp"
#include "swiptrelay/monte_carlo.hpp"

namespace swiptrelay {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("malformed number for '" + std::string(key) + "': '" + std::string(text) +
                      "'");
  }
  return v;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("malformed integer for '" + std::string(key) + "': '" + std::string(text) +
                      "'");
  }
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view text, Parse parse) {
  std::vector<T> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse(key, text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("malformed boolean for '" + std::string(key) + "': '" + std::string(text) +
                    "'");
}

struct KeyInfo {
  const char* name;
  const char* help;
};

constexpr KeyInfo kKeys[] = {
    {"source_power", "P_s, source transmit power in mW (default 1)"},
    {"noise_power", "sigma^2, noise power in mW (default 0.001)"},
    {"block_duration", "T, block duration in ms (default 1)"},
    {"conversion_efficiency", "eta, energy conversion efficiency in (0,1) (default 0.5)"},
    {"rate", "tau, information rate in bits/s/Hz (default 1.5, threshold SNR 7)"},
    {"battery_capacity", "B, battery capacity in uJ (default 10)"},
    {"n_channel_states", "N_c, equiprobable Rayleigh quantization states (default 200)"},
    {"levels", "comma-separated battery level counts N_b (default 5,9)"},
    {"sweep", "sweep axis: battery or power (default battery)"},
    {"sweep_values",
     "comma-separated sweep values (default 2,4,...,16 uJ for battery, 0.5,1,2 mW for power)"},
    {"blocks", "Monte Carlo blocks M (default 100000)"},
    {"seed", "64-bit simulation seed (default 1)"},
    {"out", "output CSV path (default stdout)"},
    {"threads", "worker threads, 0 for hardware concurrency (default 0)"},
    {"round_exact_up", "push exact grid hits one level up (default true)"},
};

void apply(ExperimentConfig& cfg, const std::string& key, std::string_view value,
           bool& sweep_values_set) {
  if (key == "source_power") {
    cfg.params.source_power = parse_double(key, value);
  } else if (key == "noise_power") {
    cfg.params.noise_power = parse_double(key, value);
  } else if (key == "block_duration") {
    cfg.params.block_duration = parse_double(key, value);
  } else if (key == "conversion_efficiency") {
    cfg.params.conversion_efficiency = parse_double(key, value);
  } else if (key == "rate") {
    cfg.params.rate = parse_double(key, value);
  } else if (key == "battery_capacity") {
    cfg.params.battery_capacity = parse_double(key, value);
  } else if (key == "n_channel_states") {
    cfg.n_channel_states = parse_integer<int>(key, value);
  } else if (key == "levels") {
    cfg.n_levels = parse_list<int>(key, value, parse_integer<int>);
  } else if (key == "sweep") {
    const auto v = trim(value);
    if (v.empty()) throw ConfigError("missing sweep axis");
    if (v == "battery") {
      cfg.sweep = SweepAxis::Battery;
    } else if (v == "power") {
      cfg.sweep = SweepAxis::Power;
    } else {
      throw ConfigError("unknown sweep axis '" + std::string(v) + "'");
    }
  } else if (key == "sweep_values") {
    cfg.sweep_values = parse_list<double>(key, value, parse_double);
    sweep_values_set = true;
  } else if (key == "blocks") {
    cfg.blocks = parse_integer<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "out") {
    cfg.out = std::string(trim(value));
  } else if (key == "threads") {
    cfg.threads = parse_integer<unsigned>(key, value);
  } else if (key == "round_exact_up") {
    cfg.round_exact_up = parse_bool(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

SweepRow compute_row(const ExperimentConfig& cfg, std::size_t point, int n_levels,
                     const FiniteChannel& channel) {
  SweepRow row;
  row.sweep_param = sweep_param_name(cfg.sweep);
  row.sweep_value = cfg.sweep_values[point];
  row.n_levels = n_levels;
  const double nan = std::nan("");
  row.p_heuristic_analytic = row.p_heuristic_sim = row.p_heuristic_sim_stderr = nan;
  row.p_upper_bound = nan;
  try {
    const SystemParams params = cfg.params_at(row.sweep_value);
    params.validate();
    row.p_heuristic_analytic = heuristic_average_success(channel, channel, params);

    SimulationConfig sim;
    sim.blocks = cfg.blocks;
    // Depends on the sweep point only, so rows sharing it agree.
    sim.seed = splitmix64(cfg.seed ^ splitmix64(point));
    const SimulationResult r =
        simulate_original(heuristic_policy(channel, params), channel, channel, params, sim);
    row.p_heuristic_sim = r.mean;
    row.p_heuristic_sim_stderr = r.standard_error;

    const MdpModel model =
        build_mdp(channel, channel, params, n_levels, MdpOptions{cfg.round_exact_up});
    const PolicyIterationResult pi = policy_iteration(model);
    row.iterations = pi.iterations;
    row.p_upper_bound = upper_bound(model, pi, channel);
    if (row.p_upper_bound < row.p_heuristic_analytic - 1e-9) {
      row.status = "failed: upper bound below heuristic";
    }
  } catch (const std::exception& e) {
    row.status = "failed: " + sanitize(e.what());
  }
  return row;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_channel_states < 1) throw ConfigError("n_channel_states must be at least 1");
  if (n_levels.empty()) throw ConfigError("levels list is empty");
  for (const int nb : n_levels) {
    if (nb < 2) throw ConfigError("every battery level count must be at least 2");
  }
  if (sweep_values.empty()) throw ConfigError("missing sweep values for the sweep axis");
  for (const double v : sweep_values) {
    if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError("sweep values must be positive");
  }
  if (blocks < 1) throw ConfigError("blocks must be at least 1");
}

SystemParams ExperimentConfig::params_at(double sweep_value) const {
  SystemParams p = params;
  if (sweep == SweepAxis::Battery) {
    p.battery_capacity = sweep_value;
  } else {
    p.source_power = sweep_value;
  }
  return p;
}

std::string config_reference() {
  std::ostringstream os;
  for (const auto& k : kKeys) os << "  " << k.name << ": " << k.help << "\n";
  return os.str();
}

ExperimentConfig parse_config_text(std::string_view text,
                                   const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    entries[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : overrides) entries[k] = v;

  bool sweep_values_set = false;
  // The axis decides the default sweep list, so it goes first.
  if (const auto it = entries.find("sweep"); it != entries.end()) {
    apply(cfg, it->first, it->second, sweep_values_set);
  }
  for (const auto& [k, v] : entries) {
    if (k != "sweep") apply(cfg, k, v, sweep_values_set);
  }
  if (!sweep_values_set && cfg.sweep == SweepAxis::Power) cfg.sweep_values = {0.5, 1.0, 2.0};
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path,
                              const std::map<std::string, std::string>& overrides) {
  if (path.empty()) return parse_config_text({}, overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string sweep_param_name(SweepAxis axis) {
  return axis == SweepAxis::Battery ? "battery_capacity" : "source_power";
}

SweepTable run_sweep(const ExperimentConfig& config) {
  config.validate();
  const FiniteChannel channel = quantize_equiprobable_exponential(config.n_channel_states);
  const std::size_t n_points = config.sweep_values.size();
  const std::size_t n_grids = config.n_levels.size();
  SweepTable table(n_points * n_grids);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < table.size(); task = next++) {
      const std::size_t point = task / n_grids;
      table[task] = compute_row(config, point, config.n_levels[task % n_grids], channel);
    }
  };
  unsigned n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(table.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return table;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string to_csv(const SweepTable& table) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const auto& r : table) {
    out += r.sweep_param + "," + format_number(r.sweep_value) + "," +
           std::to_string(r.n_levels) + "," + format_number(r.p_heuristic_analytic) + "," +
           format_number(r.p_heuristic_sim) + "," + format_number(r.p_heuristic_sim_stderr) +
           "," + format_number(r.p_upper_bound) + "," + r.status + "\n";
  }
  return out;
}

std::optional<double> percentage_gain(double value, double base) {
  if (base == 0.0 || std::isnan(base) || std::isnan(value)) return std::nullopt;
  return 100.0 * (value - base) / base;
}

std::vector<GainEntry> report_gains(const SweepTable& table) {
  std::vector<double> points;
  for (const auto& r : table) {
    if (std::find(points.begin(), points.end(), r.sweep_value) == points.end()) {
      points.push_back(r.sweep_value);
    }
  }
  if (points.size() < 2) {
    throw std::invalid_argument("gain report needs at least two sweep points");
  }
  std::vector<int> grids;
  for (const auto& r : table) {
    if (std::find(grids.begin(), grids.end(), r.n_levels) == grids.end()) {
      grids.push_back(r.n_levels);
    }
  }

  std::vector<GainEntry> out;
  for (const int nb : grids) {
    const SweepRow* prev = nullptr;
    for (const auto& r : table) {
      if (r.n_levels != nb) continue;
      if (prev) {
        GainEntry e{"bound_gain", nb, prev->sweep_value, r.sweep_value, std::nullopt};
        if (prev->ok() && r.ok()) e.percent = percentage_gain(r.p_upper_bound, prev->p_upper_bound);
        out.push_back(e);
      }
      prev = &r;
    }
  }
  for (const auto& r : table) {
    GainEntry e{"heuristic_gap", r.n_levels, r.sweep_value, r.sweep_value, std::nullopt};
    if (r.ok()) e.percent = percentage_gain(r.p_upper_bound, r.p_heuristic_analytic);
    out.push_back(e);
  }
  return out;
}

std::string to_csv(const std::vector<GainEntry>& gains) {
  std::string out = std::string(kGainCsvHeader) + "\n";
  for (const auto& g : gains) {
    out += g.kind + "," + std::to_string(g.n_levels) + "," + format_number(g.from_value) + "," +
           format_number(g.to_value) + "," +
           (g.percent ? format_number(*g.percent) : std::string("undefined")) + "\n";
  }
  return out;
}

}  // namespace swiptrelay
