#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nanotrap {

/// Physical dimension of a config key; fixes the accepted unit suffixes.
enum class Quantity { length, power, field, time, angle, frequency, surface_coefficient, number, integer, flag, path };

struct ConfigKey {
  std::string name;      // "section.key"
  Quantity quantity;
  bool required;
  std::string fallback;  // default "value unit" text, empty for none
};

/// Schema of the run configuration.
const std::vector<ConfigKey>& config_schema();

/// Multiplier to the canonical unit of a quantity (m, W, G, s, rad, Hz,
/// Hz um^3). Throws Errc::config for units outside the table.
double unit_scale(Quantity quantity, const std::string& unit);

/// Line-oriented `key = value unit` configuration with [section] headers.
/// Values are stored in canonical units; flag overrides replace file values.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  /// Apply `section.key=value unit`.
  void set(const std::string& assignment);
  /// Apply a value to a key directly.
  void set(const std::string& key, const std::string& value_text);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;

  /// Throws Errc::config naming the first missing required key.
  void check_required() const;

  /// Effective configuration, one `section.key = value unit` line each,
  /// prefixed by `prefix`.
  std::string echo(const std::string& prefix = "# ") const;

 private:
  struct Entry {
    std::string raw;   // as written, e.g. "250 nm"
    double value = 0;  // canonical units
  };
  std::map<std::string, Entry> entries_;

  void assign(const std::string& key, const std::string& value_text, const std::string& where);
  const Entry& entry(const std::string& key) const;
};

}  // namespace nanotrap
