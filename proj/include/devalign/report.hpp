#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace devalign::report {

std::string_view tool_version() noexcept;

// Doubles as %.17g (exact round trip); integers, strings, bools as usual.
// Non-finite doubles become null. Object keys keep insertion order.
std::string format_double(double v);
std::string dump_json(const nlohmann::ordered_json& value);

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> options;  // every parsed option, canonical text
  std::string format = "json";

  // FNV-1a over "command\nkey=value\n..." (keys sorted), as 16 hex digits.
  std::string config_hash() const;
  nlohmann::ordered_json header() const;
  // "# devalign <version> command=... seed=... config_hash=..."
  std::string csv_header() const;
};

// Writes `bytes` to `path`, creating parent directories. Throws IoFailure.
void write_text(const std::filesystem::path& path, const std::string& bytes);

}  // namespace devalign::report
