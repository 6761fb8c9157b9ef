#include "porous/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace porous {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string slot(const std::string& section, const std::string& key) {
  return section + "." + key;
}

} // namespace

const std::set<std::string>& known_config_sections() {
  static const std::set<std::string> sections = {
      "mesh", "coefficients", "time", "boundary", "initial", "solver", "output", "mms"};
  return sections;
}

void Config::insert(const std::string& section, const std::string& key, Entry entry) {
  auto& sec = sections_[section];
  auto it = sec.find(key);
  if (it != sec.end()) {
    throw ConfigError(source_name_ + ": duplicate key '" + key + "' in [" + section +
                      "] (lines " + std::to_string(it->second.line) + " and " +
                      std::to_string(entry.line) + ")");
  }
  sec.emplace(key, std::move(entry));
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  consumed_.insert(slot(section, key));
  return &kit->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr)
    throw ConfigError(source_name_ + ": missing required key '" + key + "' in [" + section + "]");
  return e->value;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e != nullptr ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr)
    throw ConfigError(source_name_ + ": missing required key '" + key + "' in [" + section + "]");
  try {
    size_t pos = 0;
    double v = std::stod(e->value, &pos);
    if (pos != e->value.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(source_name_ + ": key '" + key + "' in [" + section +
                      "] is not a finite number: '" + e->value + "' (line " +
                      std::to_string(e->line) + ")");
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  return get_double(section, key);
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (e == nullptr)
    throw ConfigError(source_name_ + ": missing required key '" + key + "' in [" + section + "]");
  try {
    size_t pos = 0;
    long v = std::stol(e->value, &pos);
    if (pos != e->value.size()) throw std::invalid_argument("trailing");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError(source_name_ + ": key '" + key + "' in [" + section +
                      "] is not an integer: '" + e->value + "' (line " +
                      std::to_string(e->line) + ")");
  }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  return get_int(section, key);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "on") return true;
  if (e->value == "false" || e->value == "0" || e->value == "off") return false;
  throw ConfigError(source_name_ + ": key '" + key + "' in [" + section +
                    "] is not a boolean: '" + e->value + "' (line " + std::to_string(e->line) +
                    ")");
}

int Config::line_of(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  return e != nullptr ? e->line : 0;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto sit = sections_.find(section);
  if (sit == sections_.end()) return out;
  for (const auto& [k, e] : sit->second) out.push_back(k);
  return out;
}

void Config::mark_consumed(const std::string& section, const std::string& key) const {
  consumed_.insert(slot(section, key));
}

void Config::check_consumed() const {
  std::vector<std::string> unknown;
  for (const auto& [sec, entries] : sections_) {
    for (const auto& [key, e] : entries) {
      if (consumed_.count(slot(sec, key)) == 0) {
        unknown.push_back("'" + key + "' in [" + sec + "] (line " + std::to_string(e.line) + ")");
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = source_name_ + ": unknown key(s): ";
    for (size_t i = 0; i < unknown.size(); ++i) {
      if (i > 0) msg += ", ";
      msg += unknown[i];
    }
    throw ConfigError(msg);
  }
}

Config parse_config_text(const std::string& text, const std::string& name) {
  Config cfg;
  cfg.set_source_name(name);
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name + ": malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (known_config_sections().count(section) == 0)
        throw ConfigError(name + ": unknown section [" + section + "] at line " +
                          std::to_string(lineno));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ": expected 'key = value' at line " + std::to_string(lineno));
    if (section.empty())
      throw ConfigError(name + ": key outside any [section] at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(name + ": empty key at line " + std::to_string(lineno));
    cfg.insert(section, key, Config::Entry{value, lineno});
  }
  return cfg;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

} // namespace porous
