#include "nanotrap/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nanotrap/constants.hpp"
#include "nanotrap/error.hpp"

namespace nanotrap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

const ConfigKey* find_key(const std::string& name) {
  for (const ConfigKey& k : config_schema())
    if (k.name == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  using Q = Quantity;
  static const std::vector<ConfigKey> schema = {
      {"fiber.radius", Q::length, true, ""},
      {"atom.data_file", Q::path, false, ""},
      {"blue.wavelength", Q::length, true, ""},
      {"blue.power", Q::power, true, ""},
      {"blue.phi_b", Q::angle, false, "0 deg"},
      {"red.wavelength", Q::length, true, ""},
      {"red.power", Q::power, true, ""},
      {"red.imbalance", Q::number, false, "1"},
      {"red.phase", Q::angle, false, "0 rad"},
      {"surface.enabled", Q::flag, false, "true"},
      {"surface.c3", Q::surface_coefficient, false, ""},
      {"probe.wavelength", Q::length, true, ""},
      {"probe.power", Q::power, true, ""},
      {"probe.height", Q::length, true, ""},
      {"tuneout.wavelength", Q::length, true, ""},
      {"tuneout.power", Q::power, true, ""},
      {"tuneout.polarization", Q::angle, false, "0 deg"},
      {"tuneout.search_min", Q::length, false, "860 nm"},
      {"tuneout.search_max", Q::length, false, "893 nm"},
      {"magnetic.offset_clock", Q::field, true, ""},
      {"magnetic.offset_mw", Q::field, true, ""},
      {"tilt.phi_b_first", Q::angle, false, "5 deg"},
      {"tilt.phi_b_second", Q::angle, false, "8 deg"},
      {"pulse.clock_duration", Q::time, true, ""},
      {"pulse.mw_duration", Q::time, true, ""},
      {"pumping.saturation", Q::number, false, "0.01"},
      {"spectrum.od_plus", Q::number, false, "1.0"},
      {"spectrum.od_minus", Q::number, false, "0.9"},
      {"spectrum.delta_plus", Q::frequency, true, ""},
      {"spectrum.delta_minus", Q::frequency, true, ""},
      {"spectrum.gamma", Q::frequency, true, ""},
      {"spectrum.reference_counts", Q::number, false, "10000"},
      {"spectrum.detuning_min", Q::frequency, false, "-80 MHz"},
      {"spectrum.detuning_max", Q::frequency, false, "80 MHz"},
      {"spectrum.points", Q::integer, false, "161"},
      {"mw.center", Q::frequency, false, "0 Hz"},
      {"mw.splitting", Q::frequency, false, "60.7 kHz"},
      {"mw.amplitude", Q::number, false, "0.8"},
      {"mw.noise", Q::number, false, "0.02"},
      {"mw.components", Q::integer, false, "2"},
      {"mw.detuning_min", Q::frequency, false, "-100 kHz"},
      {"mw.detuning_max", Q::frequency, false, "100 kHz"},
      {"mw.points", Q::integer, false, "201"},
      {"run.seed", Q::integer, false, "1"},
  };
  return schema;
}

double unit_scale(Quantity quantity, const std::string& unit) {
  using Q = Quantity;
  static const std::map<Q, std::map<std::string, double>> table = {
      {Q::length, {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
      {Q::power, {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}, {"pW", 1e-12}}},
      {Q::field, {{"G", 1.0}, {"mG", 1e-3}, {"T", 1e4}}},
      {Q::time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
      {Q::angle, {{"rad", 1.0}, {"deg", constants::pi / 180.0}}},
      {Q::frequency, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
      {Q::surface_coefficient, {{"Hz*um^3", 1.0}, {"kHz*um^3", 1e3}}},
      {Q::number, {{"", 1.0}}},
      {Q::integer, {{"", 1.0}}},
  };
  const auto units = table.find(quantity);
  if (units == table.end()) return 1.0;
  const auto it = units->second.find(unit);
  if (it == units->second.end()) {
    std::string allowed;
    for (const auto& [name, scale] : units->second) allowed += (allowed.empty() ? "" : ", ") + name;
    throw Error(Errc::config, "unit '" + unit + "' not accepted here (allowed: " + allowed + ")");
  }
  return it->second;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::config, where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::config, where + ": expected key = value");
    if (section.empty()) throw Error(Errc::config, where + ": key outside of a [section]");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (cfg.entries_.contains(key)) throw Error(Errc::config, where + ": key '" + key + "' repeated");
    cfg.assign(key, trim(line.substr(eq + 1)), where);
  }
  for (const ConfigKey& k : config_schema())
    if (!cfg.entries_.contains(k.name) && !k.fallback.empty()) cfg.assign(k.name, k.fallback, "default");
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read config file '" + path.string() + "'");
  return parse(in, path.string());
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(Errc::config, "override '" + assignment + "': expected key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value_text) { assign(key, value_text, "override"); }

void RunConfig::assign(const std::string& key, const std::string& value_text, const std::string& where) {
  const ConfigKey* spec = find_key(key);
  if (!spec) throw Error(Errc::config, where + ": unknown key '" + key + "'");
  Entry e;
  e.raw = value_text;
  if (spec->quantity == Quantity::path) {
    entries_[key] = e;
    return;
  }
  if (spec->quantity == Quantity::flag) {
    if (value_text == "true" || value_text == "1" || value_text == "on") e.value = 1.0;
    else if (value_text == "false" || value_text == "0" || value_text == "off") e.value = 0.0;
    else throw Error(Errc::config, where + ": key '" + key + "' expects true or false");
    entries_[key] = e;
    return;
  }
  const char* begin = value_text.c_str();
  char* end = nullptr;
  const double number = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(number))
    throw Error(Errc::config, where + ": key '" + key + "' has no numeric value");
  const std::string unit = trim(std::string(end));
  try {
    e.value = number * unit_scale(spec->quantity, unit);
  } catch (const Error& err) {
    throw Error(Errc::config, where + ": key '" + key + "': " + err.what());
  }
  if (spec->quantity == Quantity::integer && e.value != std::floor(e.value))
    throw Error(Errc::config, where + ": key '" + key + "' expects an integer");
  entries_[key] = e;
}

bool RunConfig::has(const std::string& key) const { return entries_.contains(key); }

const RunConfig::Entry& RunConfig::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::config, "missing config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const { return entry(key).value; }
std::int64_t RunConfig::integer(const std::string& key) const { return static_cast<std::int64_t>(entry(key).value); }
bool RunConfig::flag(const std::string& key) const { return entry(key).value != 0.0; }
std::string RunConfig::text(const std::string& key) const { return entry(key).raw; }

void RunConfig::check_required() const {
  for (const ConfigKey& k : config_schema())
    if (k.required && !entries_.contains(k.name)) throw Error(Errc::config, "missing required key '" + k.name + "'");
}

std::string RunConfig::echo(const std::string& prefix) const {
  std::ostringstream out;
  for (const ConfigKey& k : config_schema()) {
    const auto it = entries_.find(k.name);
    if (it != entries_.end()) out << prefix << k.name << " = " << it->second.raw << '\n';
  }
  return out.str();
}

}  // namespace nanotrap
