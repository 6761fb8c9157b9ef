#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace porous {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parsed `key = value` configuration grouped into sections.
///
/// Getters mark keys as consumed so a command can reject typos with
/// check_consumed() after it has read everything it understands.
class Config {
public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  void insert(const std::string& section, const std::string& key, Entry entry);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  /// Raw string value; throws ConfigError when missing.
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;

  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  int line_of(const std::string& section, const std::string& key) const;

  /// Keys present under a section, in insertion-independent sorted order.
  std::vector<std::string> keys(const std::string& section) const;

  /// Throws listing every key no getter ever touched.
  void check_consumed() const;

  /// Marks a key consumed without reading it.
  void mark_consumed(const std::string& section, const std::string& key) const;

  const std::string& source_name() const { return source_name_; }
  void set_source_name(std::string name) { source_name_ = std::move(name); }

private:
  const Entry* find(const std::string& section, const std::string& key) const;

  std::map<std::string, std::map<std::string, Entry>> sections_;
  mutable std::set<std::string> consumed_;
  std::string source_name_ = "<config>";
};

/// Known section names; anything else is a parse error.
const std::set<std::string>& known_config_sections();

Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& name = "<string>");

} // namespace porous
