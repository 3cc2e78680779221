#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evtag {

// Flat key-value documents shared by dataset manifests and CLI config files:
// a single JSON object whose values are scalars or arrays of scalars.
// Anything deeper is rejected with Error(ManifestMalformed).
class KvFile {
 public:
  explicit KvFile(nlohmann::ordered_json object, std::string origin = "<memory>");

  static KvFile parse(const std::string& text, const std::string& origin);
  static KvFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;

  // Typed accessors; a missing key or wrong type raises ManifestMalformed.
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  std::optional<std::int64_t> find_int(const std::string& key) const;
  std::optional<double> find_double(const std::string& key) const;
  std::optional<std::string> find_string(const std::string& key) const;

  const nlohmann::ordered_json& json() const { return object_; }
  // Stable rendering: insertion key order, two-space indent, trailing newline.
  std::string dump() const;

 private:
  const nlohmann::ordered_json& at(const std::string& key) const;

  nlohmann::ordered_json object_;
  std::string origin_;
};

}  // namespace evtag
