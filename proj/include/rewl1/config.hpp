#ifndef REWL1_CONFIG_HPP
#define REWL1_CONFIG_HPP

#include <rewl1/io.hpp>
#include <rewl1/types.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace rewl1 {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { phase_transition, adaptive_eps, noisy, dantzig, error_correction, tv_phantom, gabor_pulse };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::phase_transition: return "phase-transition";
    case ExperimentKind::adaptive_eps: return "adaptive-eps";
    case ExperimentKind::noisy: return "noisy";
    case ExperimentKind::dantzig: return "dantzig";
    case ExperimentKind::error_correction: return "error-correction";
    case ExperimentKind::tv_phantom: return "tv-phantom";
    case ExperimentKind::gabor_pulse: return "gabor-pulse";
  }
  return "unknown";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::phase_transition, ExperimentKind::adaptive_eps, ExperimentKind::noisy,
                 ExperimentKind::dantzig, ExperimentKind::error_correction, ExperimentKind::tv_phantom,
                 ExperimentKind::gabor_pulse})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::config, "unknown experiment '" + s + "'");
}

/// Resolved experiment parameters. Fields left unset in a config file take
/// the per-experiment defaults from `defaults_for`.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::phase_transition;
  Index n = 256;
  Index m = 100;
  std::vector<Index> k_values;
  std::vector<double> eps_values;
  std::vector<int> iteration_counts;
  std::vector<double> beta_values;
  std::vector<double> p_values;
  std::vector<Index> line_counts;
  std::vector<SignalKind> signal_kinds;
  int trials = 100;
  std::uint64_t master_seed = 1;
  std::string output = "out";
  int l_max = 4;
  double sigma = 0.0;  // noise level where an experiment takes one directly
  bool normalize_columns = false;

  void validate() const;
  /// Canonical key=value text; the config hash is computed over it.
  std::string canonical() const;
  std::uint64_t hash() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw Error(ErrorCode::config, "key '" + key + "': not a number: '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw Error(ErrorCode::config, "key '" + key + "': not an integer: '" + v + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] != '-') out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty())
    throw Error(ErrorCode::config, "key '" + key + "': not an unsigned integer: '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::config, "key '" + key + "': expected true or false, got '" + v + "'");
}

template <class F>
auto parse_list(const std::string& key, const std::string& v, F parse_one) {
  std::vector<decltype(parse_one(key, std::string()))> out;
  for (const auto& item : split_list(v)) out.push_back(parse_one(key, item));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(xs[i]);
    } else if constexpr (std::is_same_v<T, SignalKind>) {
      out += to_string(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

/// Desk-scale defaults for each experiment.
inline ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::phase_transition:
      c.n = 256;
      c.m = 100;
      c.k_values = {10, 15, 20, 25, 30, 35, 40, 45, 50};
      c.eps_values = {0.01, 0.05, 0.1, 0.5, 1.0};
      c.iteration_counts = {0, 1, 2, 4};
      c.signal_kinds = {SignalKind::sparse_gaussian};
      c.l_max = 4;
      break;
    case ExperimentKind::adaptive_eps:
      c.n = 256;
      c.m = 128;
      c.k_values = {20, 30, 40, 50, 60};
      c.p_values = {0.4, 0.7, 1.1};
      c.iteration_counts = {0, 4};
      c.signal_kinds = {SignalKind::sparse_gaussian, SignalKind::sparse_bernoulli, SignalKind::compressible};
      c.l_max = 4;
      break;
    case ExperimentKind::noisy:
      c.n = 256;
      c.m = 128;
      c.k_values = {38};
      c.p_values = {0.4, 0.7};
      c.beta_values = {0.2};
      c.signal_kinds = {SignalKind::sparse_gaussian, SignalKind::sparse_bernoulli, SignalKind::compressible};
      c.normalize_columns = true;
      c.iteration_counts = {0, 9};
      c.l_max = 9;
      break;
    case ExperimentKind::dantzig:
      c.n = 256;
      c.m = 72;
      c.k_values = {8};
      c.eps_values = {0.1};
      c.trials = 500;
      c.normalize_columns = true;
      c.iteration_counts = {0, 4};
      c.l_max = 4;
      break;
    case ExperimentKind::error_correction:
      c.n = 128;
      c.m = 512;
      c.k_values = {0, 102, 128, 143, 154, 164, 174, 184};
      c.beta_values = {0.5, 1.0, 2.0};
      c.iteration_counts = {0, 4};
      c.l_max = 4;
      break;
    case ExperimentKind::tv_phantom:
      c.n = 64;
      c.line_counts = {12};
      c.eps_values = {0.1};
      c.trials = 1;
      c.iteration_counts = {0, 6};
      c.l_max = 6;
      break;
    case ExperimentKind::gabor_pulse:
      c.n = 128;
      c.m = 28;
      c.eps_values = {0.1};
      c.trials = 1;
      c.iteration_counts = {0, 4};
      c.l_max = 4;
      break;
  }
  return c;
}

inline void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::config, what); };
  if (trials < 1) fail("trials must be at least 1");
  if (n < 1 || m < 1) fail("n and m must be positive");
  if (l_max < 0) fail("l_max must be nonnegative");
  if (sigma < 0.0) fail("sigma must be nonnegative");
  for (int it : iteration_counts)
    if (it < 0 || it > l_max) fail("iteration_counts entries must lie in [0, l_max]");
  for (double e : eps_values)
    if (!(e > 0.0)) fail("eps_values entries must be positive");
  for (double b : beta_values)
    if (!(b >= 0.0)) fail("beta_values entries must be nonnegative");
  for (double p : p_values)
    if (!(p > 0.0)) fail("p_values entries must be positive");
  for (Index k : k_values)
    if (k < 0) fail("k_values entries must be nonnegative");

  auto need = [&](bool nonempty, const char* key) {
    if (!nonempty) fail(std::string(key) + " must be non-empty for experiment " + to_string(experiment));
  };
  switch (experiment) {
    case ExperimentKind::phase_transition:
      need(!k_values.empty(), "k_values");
      need(!eps_values.empty(), "eps_values");
      need(!iteration_counts.empty(), "iteration_counts");
      if (signal_kinds.size() != 1 || signal_kinds[0] == SignalKind::compressible)
        fail("phase-transition takes exactly one sparse signal kind");
      if (m > n) fail("phase-transition needs m <= n");
      for (Index k : k_values)
        if (k > n) fail("k_values entries must not exceed n");
      break;
    case ExperimentKind::adaptive_eps:
      need(!signal_kinds.empty(), "signal_kinds");
      need(!iteration_counts.empty(), "iteration_counts");
      if (m >= n) fail("adaptive epsilon needs n > m");
      for (auto s : signal_kinds) {
        if (s == SignalKind::compressible) need(!p_values.empty(), "p_values");
        else need(!k_values.empty(), "k_values");
      }
      for (Index k : k_values)
        if (k > n) fail("k_values entries must not exceed n");
      break;
    case ExperimentKind::noisy:
      need(!signal_kinds.empty(), "signal_kinds");
      need(!beta_values.empty(), "beta_values");
      for (auto s : signal_kinds) {
        if (s == SignalKind::compressible) need(!p_values.empty(), "p_values");
        else need(!k_values.empty(), "k_values");
      }
      if (m < 2) fail("noisy needs m >= 2");
      break;
    case ExperimentKind::dantzig:
      need(!k_values.empty(), "k_values");
      need(!eps_values.empty(), "eps_values");
      for (Index k : k_values)
        if (k > n) fail("k_values entries must not exceed n");
      break;
    case ExperimentKind::error_correction:
      need(!k_values.empty(), "k_values");
      need(!beta_values.empty(), "beta_values");
      if (m < n) fail("error-correction needs m >= n");
      for (Index k : k_values)
        if (k > m) fail("corruption counts must not exceed m");
      for (double b : beta_values)
        if (!(b > 0.0)) fail("beta_values entries must be positive for error-correction");
      break;
    case ExperimentKind::tv_phantom:
      need(!line_counts.empty(), "line_counts");
      need(!eps_values.empty(), "eps_values");
      if (n < 16) fail("tv-phantom needs n >= 16");
      for (Index l : line_counts)
        if (l < 0 || l > n) fail("line_counts entries must lie in [0, n] (0 = full sampling)");
      break;
    case ExperimentKind::gabor_pulse:
      need(!eps_values.empty(), "eps_values");
      if (n < 64) fail("gabor-pulse needs n >= 64");
      if (m >= n) fail("gabor-pulse needs m < n");
      break;
  }
}

inline std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "experiment=" << to_string(experiment) << '\n'
     << "n=" << n << '\n'
     << "m=" << m << '\n'
     << "k_values=" << detail::join(k_values) << '\n'
     << "eps_values=" << detail::join(eps_values) << '\n'
     << "iteration_counts=" << detail::join(iteration_counts) << '\n'
     << "beta_values=" << detail::join(beta_values) << '\n'
     << "p_values=" << detail::join(p_values) << '\n'
     << "line_counts=" << detail::join(line_counts) << '\n'
     << "signal_kinds=" << detail::join(signal_kinds) << '\n'
     << "trials=" << trials << '\n'
     << "master_seed=" << master_seed << '\n'
     << "l_max=" << l_max << '\n'
     << "sigma=" << format_double(sigma) << '\n'
     << "normalize_columns=" << (normalize_columns ? "true" : "false") << '\n';
  return os.str();
}

inline std::uint64_t ExperimentConfig::hash() const { return detail::fnv1a(canonical()); }

/// Parses flat `key = value` text; lists are comma-separated, `#` starts a
/// comment. `experiment` must be present; other keys override the
/// experiment's defaults. Unknown or repeated keys are errors.
inline ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!kv.emplace(key, value).second) throw Error(ErrorCode::config, "duplicate key '" + key + "'");
  }
  const auto exp_it = kv.find("experiment");
  if (exp_it == kv.end()) throw Error(ErrorCode::config, "missing key 'experiment'");
  ExperimentConfig c = defaults_for(experiment_from_string(exp_it->second));

  static const std::set<std::string> known{"experiment", "n", "m", "k_values", "eps_values", "iteration_counts",
                                           "beta_values", "p_values", "line_counts", "signal_kinds", "trials",
                                           "master_seed", "output", "l_max", "sigma", "normalize_columns"};
  for (const auto& [key, value] : kv) {
    if (!known.count(key)) throw Error(ErrorCode::config, "unknown key '" + key + "'");
    if (key == "n") c.n = detail::parse_int(key, value);
    else if (key == "m") c.m = detail::parse_int(key, value);
    else if (key == "k_values") c.k_values = detail::parse_list(key, value, [](const std::string& k, const std::string& v) { return static_cast<Index>(detail::parse_int(k, v)); });
    else if (key == "eps_values") c.eps_values = detail::parse_list(key, value, detail::parse_double);
    else if (key == "iteration_counts") c.iteration_counts = detail::parse_list(key, value, [](const std::string& k, const std::string& v) { return static_cast<int>(detail::parse_int(k, v)); });
    else if (key == "beta_values") c.beta_values = detail::parse_list(key, value, detail::parse_double);
    else if (key == "p_values") c.p_values = detail::parse_list(key, value, detail::parse_double);
    else if (key == "line_counts") c.line_counts = detail::parse_list(key, value, [](const std::string& k, const std::string& v) { return static_cast<Index>(detail::parse_int(k, v)); });
    else if (key == "signal_kinds") {
      c.signal_kinds.clear();
      for (const auto& item : detail::split_list(value)) {
        try {
          c.signal_kinds.push_back(signal_kind_from_string(item));
        } catch (const Error& e) {
          throw Error(ErrorCode::config, e.what());
        }
      }
    }
    else if (key == "trials") c.trials = static_cast<int>(detail::parse_int(key, value));
    else if (key == "master_seed") c.master_seed = detail::parse_u64(key, value);
    else if (key == "output") c.output = value;
    else if (key == "l_max") c.l_max = static_cast<int>(detail::parse_int(key, value));
    else if (key == "sigma") c.sigma = detail::parse_double(key, value);
    else if (key == "normalize_columns") c.normalize_columns = detail::parse_bool(key, value);
  }
  // A config that lowers l_max without listing iteration counts keeps the
  // default counts that still fit.
  if (!kv.count("iteration_counts")) {
    std::vector<int> kept;
    for (int it : c.iteration_counts)
      if (it <= c.l_max) kept.push_back(it);
    c.iteration_counts = kept.empty() ? std::vector<int>{0} : kept;
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::config, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace rewl1

#endif  // REWL1_CONFIG_HPP
