#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace senm {

/// Plain `key = value` text with `#` comments. Later keys override earlier ones.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text, std::string_view origin = "<memory>");
  static KeyValues load(const std::filesystem::path& path);

  bool contains(std::string_view key) const { return values_.find(key) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  const std::map<std::string, std::string, std::less<>>& items() const noexcept { return values_; }

  /// Typed accessors; throw Error{config} naming the key on a bad value.
  std::optional<double> get_double(std::string_view key) const;
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;
  std::optional<std::vector<double>> get_doubles(std::string_view key) const;

  /// Keys not in `known`, for unknown-key diagnostics.
  std::vector<std::string> unknown_keys(const std::vector<std::string_view>& known) const;

 private:
  std::string origin_;
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace senm
