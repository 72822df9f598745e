#include "devalign/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "devalign/error.hpp"
#include "devalign/rng.hpp"

#ifndef DEVALIGN_VERSION
#define DEVALIGN_VERSION "0.0.0"
#endif

namespace devalign::report {

std::string_view tool_version() noexcept { return DEVALIGN_VERSION; }

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump(const nlohmann::ordered_json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::ordered_json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(v[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value) {
  std::string out;
  dump(value, out, 0);
  out += "\n";
  return out;
}

std::string RunConfig::config_hash() const {
  std::string canon = command + "\nformat=" + format + "\nseed=" + std::to_string(seed) + "\n";
  for (const auto& [k, v] : options) canon += k + "=" + v + "\n";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

nlohmann::ordered_json RunConfig::header() const {
  nlohmann::ordered_json h;
  h["tool"] = "devalign";
  h["version"] = std::string(tool_version());
  h["command"] = command;
  h["seed"] = seed;
  h["config_hash"] = config_hash();
  return h;
}

std::string RunConfig::csv_header() const {
  return "# devalign " + std::string(tool_version()) + " command=" + command + " seed=" + std::to_string(seed) +
         " config_hash=" + config_hash() + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace devalign::report
