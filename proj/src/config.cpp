#include "gsindy/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gsindy/csv.hpp"

namespace gsindy {

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// ConfigSection

std::optional<std::string> ConfigSection::raw(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void ConfigSection::bad_value(std::string_view key, std::string_view expected) const {
  throw Error(ErrorKind::InvalidArgument, "[" + name_ + "] " + std::string(key) + ": expected " +
                                              std::string(expected) + ", got '" + *raw(key) + "'");
}

std::string ConfigSection::get_string(std::string_view key, std::string fallback) const {
  const auto v = raw(key);
  return v ? *v : std::move(fallback);
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = csv::trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// "key = value ; note" -> "key = value". The INI reader only knows
// whole-line comments.
std::string strip_inline_comments(std::string_view text) {
  std::string out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    for (std::size_t i = 1; i < line.size(); ++i)
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

double ConfigSection::get_double(std::string_view key, double fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  double out = 0;
  if (!parse_number(*v, out) || !std::isfinite(out)) bad_value(key, "a finite number");
  return out;
}

int ConfigSection::get_int(std::string_view key, int fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  int out = 0;
  if (!parse_number(*v, out)) bad_value(key, "an integer");
  return out;
}

std::uint64_t ConfigSection::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  if (!parse_number(*v, out)) bad_value(key, "a non-negative integer");
  return out;
}

bool ConfigSection::get_bool(std::string_view key, bool fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  const auto s = csv::trim(*v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  bad_value(key, "a boolean");
}

std::vector<std::string> ConfigSection::get_list(std::string_view key,
                                                 std::vector<std::string> fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (const auto& item : csv::split(*v, ',')) {
    const auto t = csv::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<double> ConfigSection::get_doubles(std::string_view key, std::vector<double> fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : get_list(key, {})) {
    double d = 0;
    if (!parse_number(item, d) || !std::isfinite(d)) bad_value(key, "a comma-separated list of numbers");
    out.push_back(d);
  }
  return out;
}

Range ConfigSection::get_range(std::string_view key, Range fallback) const {
  const auto v = raw(key);
  if (!v) return fallback;
  const auto vals = get_doubles(key, {});
  if (vals.size() == 1) return {vals[0], vals[0]};
  if (vals.size() != 2 || vals[0] > vals[1]) bad_value(key, "'lo, hi' with lo <= hi");
  return {vals[0], vals[1]};
}

ConfigSection ConfigSection::merge(const ConfigSection& base, const ConfigSection& over) {
  auto values = base.values_;
  for (const auto& [k, v] : over.values_) values[k] = v;
  return ConfigSection(over.name_, std::move(values));
}

void ConfigSection::require_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : values_)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorKind::InvalidArgument, "[" + name_ + "] unknown key '" + key + "'");
}

// ---------------------------------------------------------------------------
// Config

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

Config Config::parse(std::string_view text, std::string_view source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is{strip_inline_comments(text)};
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(source) + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config cfg;
  cfg.source_ = std::string(source);
  cfg.hash_ = fnv1a(text);
  for (const auto& [name, child] : tree)
    if (child.empty() && !child.data().empty())
      throw Error(ErrorKind::InvalidArgument,
                  std::string(source) + ": key '" + name + "' must be inside a [section]");

  // The INI reader drops empty sections, but an empty [simulate.NAME] still
  // asks for a run, so section order comes from the headers themselves.
  std::istringstream lines{strip_inline_comments(text)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto t = csv::trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const std::string name(csv::trim(t.substr(1, t.size() - 2)));
    std::map<std::string, std::string> values;
    if (const auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0')))
      for (const auto& [key, value] : *child) values[key] = std::string(csv::trim(value.data()));
    cfg.sections_.emplace_back(name, std::move(values));
  }
  return cfg;
}

ConfigSection Config::section(std::string_view name) const {
  for (const auto& [n, values] : sections_)
    if (n == name) return ConfigSection(n, values);
  return ConfigSection(std::string(name), {});
}

std::vector<ConfigSection> Config::subsections(std::string_view prefix) const {
  std::vector<ConfigSection> out;
  const std::string p = std::string(prefix) + ".";
  for (const auto& [n, values] : sections_)
    if (n.size() > p.size() && n.compare(0, p.size(), p) == 0) out.emplace_back(n, values);
  return out;
}

std::vector<std::string> Config::section_names() const {
  std::vector<std::string> out;
  for (const auto& [n, values] : sections_) out.push_back(n);
  return out;
}

}  // namespace gsindy
