// Plain-text key=value configuration shared by all CLI verbs, plus the
// FNV-1a hash of the effective (fully resolved) configuration that every
// output file declares in a header comment.
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "epf/csv.hpp"
#include "epf/error.hpp"

namespace epf {

struct Config {
  // paths
  std::string out_dir = ".";
  std::string frame;     // canonical frame CSV (input to backtest/superstats)
  std::string forecast;  // forecast CSV (input to superstats/report); default <out_dir>/forecast.csv
  std::string prices, delu, zones, nuclear, fuels;  // ingest inputs

  // model hyperparameters (defaults are the published configuration)
  int seq_len = 96;
  int depth = 2;
  int width = 32;
  double dropout = 0.2;
  double sigma_floor = 0.01;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int patience = 200;
  int max_epochs = 2000;
  std::string precision = "double";  // "double" | "float"

  // fold planning
  int train_hours = 17000;
  double val_fraction = 0.10;
  int min_week_hours = 120;
  int max_folds = 0;  // 0 = no cap

  // superstatistics
  int n_slow = 5;
  bool include_residual = true;
  int tau = 96;
  int bins = 40;

  // synthetic generation
  std::int64_t synth_hours = 20000;
  double synth_noise_scale = 1.0;
  bool synth_constant_sigma = false;

  // report
  bool reference_gate = false;

  // run control
  std::uint64_t seed = 1;
  int jobs = 1;
};

namespace detail {

inline long long parse_ll(const std::string& v, const std::string& key) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(ErrorClass::config, "invalid integer for key '" + key + "': " + v);
  return out;
}

inline double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorClass::config, "invalid number for key '" + key + "': " + v);
  }
}

inline bool parse_flag(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorClass::config, "invalid boolean for key '" + key + "': " + v + " (use true/false)");
}

struct ConfigKey {
  const char* name;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  auto str_key = [](const char* n, std::string Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return c.*f; },
                     [f](Config& c, const std::string& v) { c.*f = v; }};
  };
  auto int_key = [](const char* n, int Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return std::to_string(c.*f); },
                     [f, n](Config& c, const std::string& v) {
                       c.*f = static_cast<int>(parse_ll(v, n));
                     }};
  };
  auto i64_key = [](const char* n, std::int64_t Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return std::to_string(c.*f); },
                     [f, n](Config& c, const std::string& v) { c.*f = parse_ll(v, n); }};
  };
  auto u64_key = [](const char* n, std::uint64_t Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return std::to_string(c.*f); },
                     [f, n](Config& c, const std::string& v) {
                       long long raw = parse_ll(v, n);
                       if (raw < 0) fail(ErrorClass::config, std::string("key '") + n + "' must be nonnegative");
                       c.*f = static_cast<std::uint64_t>(raw);
                     }};
  };
  auto real_key = [](const char* n, double Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return format_double(c.*f); },
                     [f, n](Config& c, const std::string& v) { c.*f = parse_real(v, n); }};
  };
  auto flag_key = [](const char* n, bool Config::* f) {
    return ConfigKey{n, [f](const Config& c) { return std::string(c.*f ? "true" : "false"); },
                     [f, n](Config& c, const std::string& v) { c.*f = parse_flag(v, n); }};
  };
  static const std::vector<ConfigKey> keys = {
      str_key("out_dir", &Config::out_dir),
      str_key("frame", &Config::frame),
      str_key("forecast", &Config::forecast),
      str_key("prices", &Config::prices),
      str_key("delu", &Config::delu),
      str_key("zones", &Config::zones),
      str_key("nuclear", &Config::nuclear),
      str_key("fuels", &Config::fuels),
      int_key("seq_len", &Config::seq_len),
      int_key("depth", &Config::depth),
      int_key("width", &Config::width),
      real_key("dropout", &Config::dropout),
      real_key("sigma_floor", &Config::sigma_floor),
      real_key("learning_rate", &Config::learning_rate),
      int_key("batch_size", &Config::batch_size),
      int_key("patience", &Config::patience),
      int_key("max_epochs", &Config::max_epochs),
      str_key("precision", &Config::precision),
      int_key("train_hours", &Config::train_hours),
      real_key("val_fraction", &Config::val_fraction),
      int_key("min_week_hours", &Config::min_week_hours),
      int_key("max_folds", &Config::max_folds),
      int_key("n_slow", &Config::n_slow),
      flag_key("include_residual", &Config::include_residual),
      int_key("tau", &Config::tau),
      int_key("bins", &Config::bins),
      i64_key("synth_hours", &Config::synth_hours),
      real_key("synth_noise_scale", &Config::synth_noise_scale),
      flag_key("synth_constant_sigma", &Config::synth_constant_sigma),
      flag_key("reference_gate", &Config::reference_gate),
      u64_key("seed", &Config::seed),
      int_key("jobs", &Config::jobs),
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void set_config_key(Config& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : detail::config_keys())
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  fail(ErrorClass::config, "unknown config key: " + key);
}

inline void validate_config(const Config& cfg) {
  if (cfg.precision != "double" && cfg.precision != "float")
    fail(ErrorClass::config, "precision must be 'double' or 'float'");
  if (cfg.seq_len < 1 || cfg.depth < 1 || cfg.width < 1 || cfg.batch_size < 1)
    fail(ErrorClass::config, "seq_len, depth, width and batch_size must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    fail(ErrorClass::config, "dropout must lie in [0, 1)");
  if (cfg.sigma_floor <= 0.0) fail(ErrorClass::config, "sigma_floor must be positive");
  if (cfg.val_fraction <= 0.0 || cfg.val_fraction >= 1.0)
    fail(ErrorClass::config, "val_fraction must lie in (0, 1)");
  if (cfg.train_hours < 1) fail(ErrorClass::config, "train_hours must be positive");
  if (cfg.jobs < 1) fail(ErrorClass::config, "jobs must be at least 1");
  if (cfg.tau < 8) fail(ErrorClass::config, "tau must be at least 8");
}

// key = value lines; '#' starts a comment; unknown keys are errors.
inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorClass::io, "cannot open config: " + path);
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(ErrorClass::config, path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty())
      fail(ErrorClass::config, path + ":" + std::to_string(line_no) + ": empty key");
    set_config_key(cfg, key, value);
  }
  validate_config(cfg);
  return cfg;
}

// Every key in declaration order, fully resolved (defaults included).
inline std::string canonical_config_string(const Config& cfg) {
  std::ostringstream out;
  for (const auto& k : detail::config_keys()) out << k.name << '=' << k.get(cfg) << '\n';
  return out.str();
}

inline std::string config_hash(const Config& cfg) {
  std::string s = canonical_config_string(cfg);
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace epf
