#pragma once

// INI run configuration. Sections are named after commands ([simulate],
// [discover], ...); named sub-blocks use a dotted suffix ([synth.linear]).
// Every key is validated: unknown keys and malformed values raise
// InvalidArgument naming the section and key.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsindy/pipeline.hpp"

namespace gsindy {

class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string name, std::map<std::string, std::string> values)
      : name_(std::move(name)), values_(std::move(values)) {}

  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Keys of `over` replace those of `base`; the result takes `over`'s name.
  static ConfigSection merge(const ConfigSection& base, const ConfigSection& over);
  bool has(std::string_view key) const { return values_.count(std::string(key)) > 0; }
  std::optional<std::string> raw(std::string_view key) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  int get_int(std::string_view key, int fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  /// Comma-separated list.
  std::vector<std::string> get_list(std::string_view key, std::vector<std::string> fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
  /// "lo,hi" or a single value for a degenerate range.
  Range get_range(std::string_view key, Range fallback) const;

  /// Throws on any key not in `allowed`.
  void require_known(std::initializer_list<std::string_view> allowed) const;

 private:
  [[noreturn]] void bad_value(std::string_view key, std::string_view expected) const;

  std::string name_;
  std::map<std::string, std::string> values_;
};

class Config {
 public:
  /// An empty configuration: every command runs on its defaults.
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(std::string_view text, std::string_view source = "<config>");

  ConfigSection section(std::string_view name) const;
  /// Sections named "<prefix>.<suffix>", in file order.
  std::vector<ConfigSection> subsections(std::string_view prefix) const;
  std::vector<std::string> section_names() const;

  /// FNV-1a over the raw configuration text.
  std::uint64_t hash() const noexcept { return hash_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
  std::string source_;
};

std::uint64_t fnv1a(std::string_view text) noexcept;

}  // namespace gsindy
