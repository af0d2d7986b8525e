#include "stabprobe/config.hpp"

#include "stabprobe/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace stabprobe {

namespace {

const std::vector<std::string> kKnownKeys = {
    "n",         "T",       "trials",     "seed",   "p_grid", "L_grid",
    "K_grid",    "ar",      "epsilon",    "delta",  "h",      "symmetrize",
    "report_api", "preset", "mode",       "format", "records", "out_dir",
};

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

bool known_key(const std::string& key) {
  for (const std::string& k : kKnownKeys) {
    if (k == key) {
      return true;
    }
  }
  return false;
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse integer for '" + key + "': " + value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse seed for '" + key + "': " + value);
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument(value);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number for '" + key + "': " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  throw ConfigError("config: cannot parse boolean for '" + key + "': " + value);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    items.push_back(trim(item));
  }
  return items;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(parse_real(key, item));
  }
  if (out.empty()) {
    throw ConfigError("config: empty list for '" + key + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value)) {
    out.push_back(static_cast<int>(parse_long(key, item)));
  }
  if (out.empty()) {
    throw ConfigError("config: empty list for '" + key + "'");
  }
  return out;
}

void apply_entry(CliConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n") {
    cfg.exp.n = static_cast<int>(parse_long(key, value));
  } else if (key == "T") {
    cfg.exp.samples = parse_long(key, value);
  } else if (key == "trials") {
    cfg.exp.trials = static_cast<int>(parse_long(key, value));
  } else if (key == "seed") {
    cfg.exp.base_seed = parse_u64(key, value);
  } else if (key == "p_grid") {
    cfg.exp.p_grid = parse_real_list(key, value);
  } else if (key == "L_grid") {
    cfg.exp.lag_grid = parse_int_list(key, value);
  } else if (key == "K_grid") {
    cfg.exp.k_grid = parse_int_list(key, value);
  } else if (key == "ar") {
    cfg.exp.ar = parse_real_list(key, value);
  } else if (key == "epsilon") {
    cfg.exp.epsilon = parse_real(key, value);
  } else if (key == "delta") {
    cfg.exp.delta = parse_real(key, value);
  } else if (key == "h") {
    cfg.exp.fd_step = parse_real(key, value);
  } else if (key == "symmetrize") {
    cfg.exp.symmetrize = parse_bool(key, value);
  } else if (key == "report_api") {
    cfg.exp.report_api = parse_bool(key, value);
  } else if (key == "preset") {
    if (value == "full") {
      cfg.exp.preset = Preset::full;
    } else if (value == "quick") {
      cfg.exp.preset = Preset::quick;
    } else {
      throw ConfigError("config: preset must be 'full' or 'quick', got: " + value);
    }
  } else if (key == "mode") {
    if (value == "sample") {
      cfg.exp.mode = EvalMode::sample;
    } else if (value == "population") {
      cfg.exp.mode = EvalMode::population;
    } else {
      throw ConfigError("config: mode must be 'sample' or 'population', got: " + value);
    }
  } else if (key == "format") {
    if (value != "csv" && value != "csv+svg") {
      throw ConfigError("config: format must be 'csv' or 'csv+svg', got: " + value);
    }
    cfg.format = value;
  } else if (key == "records") {
    cfg.records = parse_bool(key, value);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_file_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open file: " + path);
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '=': " + stripped);
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

}  // namespace

CliConfig parse_config(const std::optional<std::string>& file_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides,
                       bool require_out_dir) {
  std::vector<std::pair<std::string, std::string>> file_entries;
  if (file_path) {
    file_entries = read_file_entries(*file_path);
  }
  for (const auto& [key, value] : file_entries) {
    if (!known_key(key)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    (void)value;
  }
  for (const auto& [key, value] : overrides) {
    if (!known_key(key)) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
    (void)value;
  }

  // The preset scales T/trials; explicit file or flag values win over it.
  CliConfig cfg;
  auto find_last = [&](const std::string& key) -> std::optional<std::string> {
    std::optional<std::string> found;
    for (const auto& [k, v] : file_entries) {
      if (k == key) {
        found = v;
      }
    }
    for (const auto& [k, v] : overrides) {
      if (k == key) {
        found = v;
      }
    }
    return found;
  };
  if (const auto preset = find_last("preset")) {
    apply_entry(cfg, "preset", *preset);
  }
  if (cfg.exp.preset == Preset::quick) {
    cfg.exp.samples = 20000;
    cfg.exp.trials = 20;
  }
  for (const auto& [key, value] : file_entries) {
    if (key != "preset") {
      apply_entry(cfg, key, value);
    }
  }
  for (const auto& [key, value] : overrides) {
    if (key != "preset") {
      apply_entry(cfg, key, value);
    }
  }

  if (require_out_dir && cfg.out_dir.empty()) {
    throw ConfigError("config: out_dir is required (set 'out_dir' or pass --out)");
  }
  return cfg;
}

std::string resolved_text(const CliConfig& cfg) {
  std::ostringstream os;
  auto real_list = [](const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) {
        s += ",";
      }
      s += format_double(xs[i]);
    }
    return s;
  };
  auto int_list = [](const std::vector<int>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) {
        s += ",";
      }
      s += std::to_string(xs[i]);
    }
    return s;
  };
  os << "n = " << cfg.exp.n << "\n";
  os << "T = " << cfg.exp.samples << "\n";
  os << "trials = " << cfg.exp.trials << "\n";
  os << "seed = " << cfg.exp.base_seed << "\n";
  os << "p_grid = " << real_list(cfg.exp.p_grid) << "\n";
  os << "L_grid = " << int_list(cfg.exp.lag_grid) << "\n";
  os << "K_grid = " << int_list(cfg.exp.k_grid) << "\n";
  os << "ar = " << real_list(cfg.exp.ar) << "\n";
  os << "epsilon = " << format_double(cfg.exp.epsilon) << "\n";
  os << "delta = " << format_double(cfg.exp.delta) << "\n";
  os << "h = " << format_double(cfg.exp.fd_step) << "\n";
  os << "symmetrize = " << (cfg.exp.symmetrize ? "true" : "false") << "\n";
  os << "report_api = " << (cfg.exp.report_api ? "true" : "false") << "\n";
  os << "preset = " << (cfg.exp.preset == Preset::quick ? "quick" : "full") << "\n";
  os << "mode = " << (cfg.exp.mode == EvalMode::population ? "population" : "sample") << "\n";
  os << "format = " << cfg.format << "\n";
  os << "records = " << (cfg.records ? "true" : "false") << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  return os.str();
}

void write_resolved(const CliConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  write_file((std::filesystem::path(cfg.out_dir) / "config.resolved").string(),
             resolved_text(cfg));
}

}  // namespace stabprobe
