#include "devalign/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "devalign/error.hpp"

namespace devalign {

namespace {

constexpr const char* kManifestFile = "manifest.txt";
constexpr const char* kIndexFile = "index.tsv";
constexpr const char* kPayloadFile = "embeddings.bin";

constexpr std::array<const char*, 8> kKeys = {"format_version", "model_id", "epoch", "layer",
                                              "dim",            "count",    "dtype", "order"};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, path.filename().string() + ": missing or unreadable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_lines(const std::string& text, const std::string& file) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      throw Error(ErrorCode::FormatError,
                  file + " line " + std::to_string(lines.size() + 1) + ": missing LF terminator");
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

template <typename Int>
Int parse_number(const std::string& value, const std::string& where) {
  Int out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::FormatError, where + ": not an integer '" + value + "'");
  }
  return out;
}

StoreManifest parse_manifest(const std::string& text) {
  const auto lines = split_lines(text, kManifestFile);
  if (lines.size() < kKeys.size()) {
    throw Error(ErrorCode::FormatError, std::string(kManifestFile) + ": expected at least " +
                                            std::to_string(kKeys.size()) + " lines");
  }
  StoreManifest m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = std::string(kManifestFile) + " line " + std::to_string(i + 1);
    const auto eq = lines[i].find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::FormatError, where + ": expected key=value");
    const std::string key = lines[i].substr(0, eq);
    const std::string value = lines[i].substr(eq + 1);
    if (i >= kKeys.size()) {
      m.extra.emplace_back(key, value);
      continue;
    }
    if (key != kKeys[i]) {
      throw Error(ErrorCode::FormatError, where + ": expected key '" + kKeys[i] + "', got '" + key + "'");
    }
    switch (i) {
      case 0: m.format_version = parse_number<int>(value, where); break;
      case 1: m.model_id = value; break;
      case 2: m.epoch = parse_number<int>(value, where); break;
      case 3: m.layer = value; break;
      case 4: m.dim = parse_number<std::size_t>(value, where); break;
      case 5: m.count = parse_number<std::size_t>(value, where); break;
      case 6: m.dtype = value; break;
      case 7: m.order = value; break;
    }
  }
  if (m.format_version != 1) throw Error(ErrorCode::FormatError, "manifest.txt: unsupported format_version");
  if (m.epoch < 0) throw Error(ErrorCode::FormatError, "manifest.txt: epoch must be >= 0");
  if (m.dim < 1 || m.count < 1) throw Error(ErrorCode::FormatError, "manifest.txt: dim and count must be >= 1");
  if (m.dtype != "f32le") throw Error(ErrorCode::FormatError, "manifest.txt: dtype must be f32le");
  if (m.order != "row_major") throw Error(ErrorCode::FormatError, "manifest.txt: order must be row_major");
  return m;
}

float load_f32le(const unsigned char* p) {
  std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
                       std::uint32_t(p[3]) << 24;
  return std::bit_cast<float>(bits);
}

void store_f32le(float v, char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) p[k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace

EmbeddingStore::EmbeddingStore(StoreManifest manifest, std::vector<std::string> ids,
                               std::vector<float> values, std::size_t dim)
    : manifest_(std::move(manifest)), ids_(std::move(ids)), values_(std::move(values)) {
  if (dim < 1) throw Error(ErrorCode::FormatError, "dim must be >= 1");
  if (ids_.empty()) throw Error(ErrorCode::FormatError, "store must hold at least one vector");
  if (values_.size() != ids_.size() * dim) {
    throw Error(ErrorCode::FormatError, "payload holds " + std::to_string(values_.size()) +
                                            " floats, expected " + std::to_string(ids_.size() * dim));
  }
  manifest_.dim = dim;
  manifest_.count = ids_.size();

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const auto& id = ids_[i];
    if (id.empty() || id.find_first_of("\t\r\n") != std::string::npos) {
      throw Error(ErrorCode::FormatError, "index.tsv line " + std::to_string(i + 1) + ": invalid id");
    }
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, id);
    bool nonzero = false;
    for (float v : row(i)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, id);
      nonzero = nonzero || v != 0.0f;
    }
    if (!nonzero) throw Error(ErrorCode::ZeroVector, id);
  }
}

std::size_t EmbeddingStore::find(const std::string& id) const {
  return static_cast<std::size_t>(std::find(ids_.begin(), ids_.end(), id) - ids_.begin());
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  return a.manifest_ == b.manifest_ && a.ids_ == b.ids_ && a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0;
}

std::string manifest_text(const StoreManifest& m) {
  std::string out;
  out += "format_version=" + std::to_string(m.format_version) + "\n";
  out += "model_id=" + m.model_id + "\n";
  out += "epoch=" + std::to_string(m.epoch) + "\n";
  out += "layer=" + m.layer + "\n";
  out += "dim=" + std::to_string(m.dim) + "\n";
  out += "count=" + std::to_string(m.count) + "\n";
  out += "dtype=" + m.dtype + "\n";
  out += "order=" + m.order + "\n";
  for (const auto& [k, v] : m.extra) out += k + "=" + v + "\n";
  return out;
}

EmbeddingStore read_store(const std::filesystem::path& dir) {
  StoreManifest manifest = parse_manifest(slurp(dir / kManifestFile));

  auto ids = split_lines(slurp(dir / kIndexFile), kIndexFile);
  if (ids.size() != manifest.count) {
    throw Error(ErrorCode::FormatError, std::string(kIndexFile) + ": " + std::to_string(ids.size()) +
                                            " lines, manifest count " + std::to_string(manifest.count));
  }

  const std::string payload = slurp(dir / kPayloadFile);
  const std::size_t expected = manifest.dim * manifest.count * 4;
  if (payload.size() != expected) {
    throw Error(ErrorCode::FormatError, std::string(kPayloadFile) + ": " + std::to_string(payload.size()) +
                                            " bytes, expected " + std::to_string(expected) + " at offset " +
                                            std::to_string(std::min(payload.size(), expected)));
  }
  std::vector<float> values(manifest.dim * manifest.count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = load_f32le(bytes + 4 * i);

  const std::size_t dim = manifest.dim;
  return EmbeddingStore(std::move(manifest), std::move(ids), std::move(values), dim);
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& dir) {
  EmbeddingStore checked(store.manifest(), store.ids(),
                         std::vector<float>(store.values().begin(), store.values().end()), store.dim());

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  }

  std::string index;
  for (const auto& id : checked.ids()) index += id + "\n";

  std::string payload(checked.values().size() * 4, '\0');
  for (std::size_t i = 0; i < checked.values().size(); ++i) store_f32le(checked.values()[i], payload.data() + 4 * i);

  write_file(dir / kManifestFile, manifest_text(checked.manifest()));
  write_file(dir / kIndexFile, index);
  write_file(dir / kPayloadFile, payload);
}

}  // namespace devalign
