#include "tamq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tamq/errors.hpp"

namespace tamq {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

std::string ObservableChoice::name() const {
  if (kind == Kind::loschmidt_echo) return "loschmidt_echo";
  return "sigma_z_site_" + std::to_string(site);
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

struct IniEntry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

struct Ini {
  std::string source;
  std::map<std::string, std::map<std::string, IniEntry>> sections;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }
  const IniEntry& get(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    if (s == sections.end() || !s->second.count(key)) {
      throw ConfigError(source + ": missing required key '" + key +
                        "' in section [" + sec + "]");
    }
    const IniEntry& e = s->second.at(key);
    e.used = true;
    return e;
  }
  void fail(const std::string& sec, const std::string& key,
            const std::string& why) const {
    const auto& e = sections.at(sec).at(key);
    throw ConfigError(source + ":" + std::to_string(e.line) + ": key '" + key +
                      "' in [" + sec + "]: " + why);
  }
  double number(const std::string& sec, const std::string& key) const {
    const IniEntry& e = get(sec, key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(sec, key, "expected a number, got '" + e.value + "'");
    }
    return 0.0;
  }
  long long integer(const std::string& sec, const std::string& key) const {
    const IniEntry& e = get(sec, key);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(sec, key, "expected an integer, got '" + e.value + "'");
    }
    return 0;
  }
  bool flag(const std::string& sec, const std::string& key) const {
    const IniEntry& e = get(sec, key);
    if (e.value == "on" || e.value == "true" || e.value == "1") return true;
    if (e.value == "off" || e.value == "false" || e.value == "0") return false;
    fail(sec, key, "expected on/off, got '" + e.value + "'");
    return false;
  }
  void check_all_used() const {
    for (const auto& [sec, keys] : sections) {
      for (const auto& [key, entry] : keys) {
        if (!entry.used) {
          throw ConfigError(source + ":" + std::to_string(entry.line) +
                            ": unknown key '" + key + "' in section [" + sec +
                            "]");
        }
      }
    }
  }
};

Ini parse_ini(std::istream& in, const std::string& source) {
  Ini ini;
  ini.source = source;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(source + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    if (ini.sections[section].count(key)) {
      throw ConfigError(source + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    ini.sections[section][key] = {value, lineno};
  }
  return ini;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ObservableChoice parse_observable(const Ini& ini, const std::string& token) {
  ObservableChoice c;
  if (token == "loschmidt_echo") {
    c.kind = ObservableChoice::Kind::loschmidt_echo;
    return c;
  }
  if (token.rfind("sigma_z_site(", 0) == 0 && token.back() == ')') {
    c.kind = ObservableChoice::Kind::sigma_z_site;
    const std::string arg = token.substr(13, token.size() - 14);
    try {
      c.site = std::stoi(arg);
    } catch (const std::exception&) {
      throw ConfigError(ini.source + ": bad site index in '" + token + "'");
    }
    return c;
  }
  throw ConfigError(ini.source + ": unknown observable '" + token +
                    "' (expected loschmidt_echo or sigma_z_site(i))");
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  if (!std::isfinite(delta_h)) throw ConfigError("quench: delta_h not finite");
  if (observables.empty()) {
    throw ConfigError("observables: at least one observable required");
  }
  for (const auto& obs : observables) {
    if (obs.kind == ObservableChoice::Kind::sigma_z_site &&
        (obs.site < 0 || obs.site >= model.sites)) {
      throw ConfigError("observables: site index " + std::to_string(obs.site) +
                        " out of range for L=" + std::to_string(model.sites));
    }
  }
  sampling.validate();
  if (!(sum_rule_accuracy > 0.0 && sum_rule_accuracy < 0.1)) {
    throw ConfigError("run: sum_rule_accuracy must be in (0, 0.1)");
  }
  if (!(dense_retain_accuracy > 0.0 && dense_retain_accuracy < 0.1)) {
    throw ConfigError("run: dense_retain_accuracy must be in (0, 0.1)");
  }
  if (max_krylov < 2) throw ConfigError("run: max_krylov must be >= 2");
  if (threads < 1) throw ConfigError("run: threads must be >= 1");
  if (output_dir.empty()) throw ConfigError("run: output_dir required");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out << "[model]\n";
  out << "sites = " << model.sites << "\n";
  out << "kappa = " << format_double(model.kappa) << "\n";
  out << "field = " << format_double(model.field) << "\n";
  out << "\n[quench]\n";
  out << "delta_h = " << format_double(delta_h) << "\n";
  out << "\n[observables]\n";
  out << "observables = ";
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (i) out << ", ";
    if (observables[i].kind == ObservableChoice::Kind::loschmidt_echo) {
      out << "loschmidt_echo";
    } else {
      out << "sigma_z_site(" << observables[i].site << ")";
    }
  }
  out << "\n";
  out << "\n[sampling]\n";
  out << "horizon = " << format_double(sampling.horizon) << "\n";
  out << "samples = " << sampling.samples << "\n";
  out << "bins = " << sampling.bins << "\n";
  out << "rng_seed = " << sampling.rng_seed << "\n";
  if (sampling.range) {
    out << "range_lo = " << format_double(sampling.range->first) << "\n";
    out << "range_hi = " << format_double(sampling.range->second) << "\n";
  }
  out << "\n[analysis]\n";
  out << "two_mode = " << (analysis.two_mode ? "on" : "off") << "\n";
  out << "gaussian = " << (analysis.gaussian ? "on" : "off") << "\n";
  out << "\n[run]\n";
  out << "sum_rule_accuracy = " << format_double(sum_rule_accuracy) << "\n";
  out << "dense_retain_accuracy = " << format_double(dense_retain_accuracy)
      << "\n";
  out << "max_krylov = " << max_krylov << "\n";
  out << "threads = " << threads << "\n";
  out << "output_dir = " << output_dir << "\n";
  return out.str();
}

ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::string& source_name) {
  const Ini ini = parse_ini(in, source_name);
  ExperimentConfig cfg;
  cfg.model.sites = static_cast<int>(ini.integer("model", "sites"));
  cfg.model.kappa = ini.number("model", "kappa");
  cfg.model.field = ini.number("model", "field");
  cfg.delta_h = ini.number("quench", "delta_h");

  for (const auto& token :
       split_list(ini.get("observables", "observables").value)) {
    cfg.observables.push_back(parse_observable(ini, token));
  }

  if (ini.has("sampling", "horizon")) {
    cfg.sampling.horizon = ini.number("sampling", "horizon");
  }
  if (ini.has("sampling", "samples")) {
    cfg.sampling.samples = static_cast<int>(ini.integer("sampling", "samples"));
  }
  if (ini.has("sampling", "bins")) {
    cfg.sampling.bins = static_cast<int>(ini.integer("sampling", "bins"));
  }
  if (ini.has("sampling", "rng_seed")) {
    cfg.sampling.rng_seed =
        static_cast<std::uint64_t>(ini.integer("sampling", "rng_seed"));
  }
  if (ini.has("sampling", "range_lo") || ini.has("sampling", "range_hi")) {
    cfg.sampling.range = {ini.number("sampling", "range_lo"),
                          ini.number("sampling", "range_hi")};
  }

  if (ini.has("analysis", "two_mode")) {
    cfg.analysis.two_mode = ini.flag("analysis", "two_mode");
  }
  if (ini.has("analysis", "gaussian")) {
    cfg.analysis.gaussian = ini.flag("analysis", "gaussian");
  }

  if (ini.has("run", "sum_rule_accuracy")) {
    cfg.sum_rule_accuracy = ini.number("run", "sum_rule_accuracy");
  }
  if (ini.has("run", "dense_retain_accuracy")) {
    cfg.dense_retain_accuracy = ini.number("run", "dense_retain_accuracy");
  }
  if (ini.has("run", "max_krylov")) {
    cfg.max_krylov = static_cast<int>(ini.integer("run", "max_krylov"));
  }
  if (ini.has("run", "threads")) {
    cfg.threads = static_cast<int>(ini.integer("run", "threads"));
  }
  cfg.output_dir = ini.get("run", "output_dir").value;

  ini.check_all_used();
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_experiment_config(in, path);
}

void ScalingConfig::validate() const {
  if (!std::isfinite(kappa) || !std::isfinite(field) ||
      !std::isfinite(delta_h)) {
    throw ConfigError("scaling: parameters must be finite");
  }
  if (sizes.size() < 3) {
    throw ConfigError("scaling: need at least 3 sizes for a fit");
  }
  for (const int L : sizes) {
    if (L < 3) throw ConfigError("scaling: sizes must be >= 3");
  }
  if (!probe_weight && !probe_fidelity && !probe_matrix_element) {
    throw ConfigError("scaling: no probes selected");
  }
  if ((probe_weight || probe_fidelity) && delta_h == 0.0) {
    throw ConfigError("scaling: weight/fidelity probes require delta_h != 0");
  }
  if (!(sum_rule_accuracy > 0.0 && sum_rule_accuracy < 0.1)) {
    throw ConfigError("scaling: sum_rule_accuracy must be in (0, 0.1)");
  }
  if (output_dir.empty()) throw ConfigError("scaling: output_dir required");
}

std::string ScalingConfig::canonical_text() const {
  std::ostringstream out;
  out << "[scaling]\n";
  out << "kappa = " << format_double(kappa) << "\n";
  out << "field = " << format_double(field) << "\n";
  out << "delta_h = " << format_double(delta_h) << "\n";
  out << "sizes = ";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out << ", ";
    out << sizes[i];
  }
  out << "\n";
  out << "regime = " << (regime == Regime::critical ? "critical" : "regular")
      << "\n";
  out << "probes = ";
  bool first = true;
  for (const auto& [flag, name] :
       {std::pair{probe_weight, "weight"}, {probe_fidelity, "fidelity"},
        {probe_matrix_element, "matrix_element"}}) {
    if (!flag) continue;
    if (!first) out << ", ";
    out << name;
    first = false;
  }
  out << "\n";
  out << "sum_rule_accuracy = " << format_double(sum_rule_accuracy) << "\n";
  out << "max_krylov = " << max_krylov << "\n";
  out << "\n[run]\n";
  out << "output_dir = " << output_dir << "\n";
  return out.str();
}

ScalingConfig parse_scaling_config(std::istream& in,
                                   const std::string& source_name) {
  const Ini ini = parse_ini(in, source_name);
  ScalingConfig cfg;
  cfg.kappa = ini.number("scaling", "kappa");
  cfg.field = ini.number("scaling", "field");
  cfg.delta_h = ini.number("scaling", "delta_h");
  for (const auto& token : split_list(ini.get("scaling", "sizes").value)) {
    try {
      cfg.sizes.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ConfigError(source_name + ": bad size '" + token + "'");
    }
  }
  const std::string regime = ini.get("scaling", "regime").value;
  if (regime == "critical") {
    cfg.regime = Regime::critical;
  } else if (regime == "regular") {
    cfg.regime = Regime::regular;
  } else {
    throw ConfigError(source_name + ": regime must be critical or regular");
  }
  for (const auto& token : split_list(ini.get("scaling", "probes").value)) {
    if (token == "weight") {
      cfg.probe_weight = true;
    } else if (token == "fidelity") {
      cfg.probe_fidelity = true;
    } else if (token == "matrix_element") {
      cfg.probe_matrix_element = true;
    } else {
      throw ConfigError(source_name + ": unknown probe '" + token + "'");
    }
  }
  if (ini.has("scaling", "sum_rule_accuracy")) {
    cfg.sum_rule_accuracy = ini.number("scaling", "sum_rule_accuracy");
  }
  if (ini.has("scaling", "max_krylov")) {
    cfg.max_krylov = static_cast<int>(ini.integer("scaling", "max_krylov"));
  }
  cfg.output_dir = ini.get("run", "output_dir").value;
  ini.check_all_used();
  cfg.validate();
  return cfg;
}

ScalingConfig parse_scaling_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_scaling_config(in, path);
}

bool is_scaling_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line) == "[scaling]") return true;
  }
  return false;
}

}  // namespace tamq
