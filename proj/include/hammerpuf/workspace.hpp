#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hammerpuf/errors.hpp"

namespace hammerpuf {

/// On-disk layout rooted at --workspace, $HAMMERPUF_WORKSPACE, or
/// ./hammerpuf-workspace, in that order.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path devices_dir() const { return root / "devices"; }
  std::filesystem::path measurements_dir() const { return root / "measurements"; }
  std::filesystem::path helpers_dir() const { return root / "helpers"; }
  std::filesystem::path reports_dir() const { return root / "reports"; }
  std::filesystem::path calibration_file() const {
    return root / "calibration" / "model-params.json";
  }
};

inline Workspace resolve_workspace(const std::string& flag_value) {
  if (!flag_value.empty()) return {std::filesystem::path(flag_value)};
  if (const char* env = std::getenv("HAMMERPUF_WORKSPACE"); env && *env)
    return {std::filesystem::path(env)};
  return {std::filesystem::path("hammerpuf-workspace")};
}

/// Writes via a temporary file and rename so readers never observe partial
/// content. Refuses to replace an existing file unless force is set.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ConfigError("refusing to overwrite existing file " + path.string() +
                      " (use --force)");
  }
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

/// Removes volatile keys (timestamps, runtimes) so that hashes compare only
/// the reproducible content.
inline nlohmann::json strip_volatile(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("created_at");
    j.erase("runtime");
    for (auto& [key, value] : j.items()) value = strip_volatile(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_volatile(value);
  }
  return j;
}

inline std::string now_iso8601_utc() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace hammerpuf
