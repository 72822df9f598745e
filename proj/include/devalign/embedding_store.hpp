#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace devalign {

struct StoreManifest {
  int format_version = 1;
  std::string model_id;
  int epoch = 0;
  std::string layer = "penultimate";
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string dtype = "f32le";
  std::string order = "row_major";
  // Trailing keys written by producers (e.g. preprocess=...), kept verbatim.
  std::vector<std::pair<std::string, std::string>> extra;

  friend bool operator==(const StoreManifest&, const StoreManifest&) = default;
};

// Per-stimulus representation vectors for one checkpoint.
//
// On disk a store is a directory holding
//   manifest.txt    key=value lines in fixed order (see StoreManifest)
//   index.tsv       one identifier per line, row order
//   embeddings.bin  count x dim little-endian float32, row-major
//
// Identifiers are usually StimulusId strings (s1-n3-l2-r0) but the odd-one-out
// battery uses gt-cNN-iK; the store treats them as opaque text.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  // Validates: unique ids, ids.size() == rows, finite values, no zero rows.
  // manifest.dim and manifest.count are overwritten from the data.
  EmbeddingStore(StoreManifest manifest, std::vector<std::string> ids, std::vector<float> values,
                 std::size_t dim);

  const StoreManifest& manifest() const noexcept { return manifest_; }
  std::size_t dim() const noexcept { return manifest_.dim; }
  std::size_t count() const noexcept { return manifest_.count; }
  int epoch() const noexcept { return manifest_.epoch; }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values_).subspan(i * manifest_.dim, manifest_.dim);
  }
  std::span<const float> values() const noexcept { return values_; }

  // Row index of `id`, or count() if absent.
  std::size_t find(const std::string& id) const;

  // Bitwise equality of manifest, ids and payload.
  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  StoreManifest manifest_;
  std::vector<std::string> ids_;
  std::vector<float> values_;
};

EmbeddingStore read_store(const std::filesystem::path& dir);
void write_store(const EmbeddingStore& store, const std::filesystem::path& dir);

std::string manifest_text(const StoreManifest& manifest);

}  // namespace devalign
