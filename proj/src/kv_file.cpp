#include "evtag/kv_file.hpp"

#include <string_view>

#include "evtag/binary_io.hpp"
#include "evtag/error.hpp"

namespace evtag {
namespace {

[[noreturn]] void malformed(const std::string& origin, const std::string& what) {
  throw Error(ErrorCode::ManifestMalformed, origin + ": " + what);
}

bool is_scalar(const nlohmann::ordered_json& v) {
  return v.is_number() || v.is_string() || v.is_boolean();
}

}  // namespace

KvFile::KvFile(nlohmann::ordered_json object, std::string origin)
    : object_(std::move(object)), origin_(std::move(origin)) {
  if (!object_.is_object()) malformed(origin_, "top level must be an object");
  for (const auto& [key, value] : object_.items()) {
    if (is_scalar(value)) continue;
    if (value.is_array()) {
      for (const auto& element : value) {
        if (!is_scalar(element)) {
          malformed(origin_, "key '" + key + "' nests deeper than one level");
        }
      }
      continue;
    }
    malformed(origin_, "key '" + key + "' has an unsupported value type");
  }
}

KvFile KvFile::parse(const std::string& text, const std::string& origin) {
  nlohmann::ordered_json parsed;
  try {
    parsed = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    malformed(origin, e.what());
  }
  return KvFile(std::move(parsed), origin);
}

KvFile KvFile::load(const std::filesystem::path& path) {
  const Bytes bytes = read_file_bytes(path);
  return parse(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
               path.string());
}

bool KvFile::has(const std::string& key) const { return object_.contains(key); }

const nlohmann::ordered_json& KvFile::at(const std::string& key) const {
  auto it = object_.find(key);
  if (it == object_.end()) malformed(origin_, "missing key '" + key + "'");
  return *it;
}

std::int64_t KvFile::get_int(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number_integer()) malformed(origin_, "key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

double KvFile::get_double(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_number()) malformed(origin_, "key '" + key + "' must be a number");
  return v.get<double>();
}

std::string KvFile::get_string(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) malformed(origin_, "key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> KvFile::get_double_list(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) malformed(origin_, "key '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) malformed(origin_, "key '" + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::int64_t> KvFile::get_int_list(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_array()) malformed(origin_, "key '" + key + "' must be a list");
  std::vector<std::int64_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) {
      malformed(origin_, "key '" + key + "' must hold integers");
    }
    out.push_back(e.get<std::int64_t>());
  }
  return out;
}

std::optional<std::int64_t> KvFile::find_int(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_int(key);
}

std::optional<double> KvFile::find_double(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

std::optional<std::string> KvFile::find_string(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_string(key);
}

std::string KvFile::dump() const { return object_.dump(2) + "\n"; }

}  // namespace evtag
