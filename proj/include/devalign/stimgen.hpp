#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "devalign/core_model.hpp"
#include "devalign/rng.hpp"

namespace devalign::stimgen {

inline constexpr int kCanvasPx = 720;
inline constexpr double kMinGapPx = 2.0;
inline constexpr double kCanvasMarginPx = 4.0;
inline constexpr int kMaxPlacementAttempts = 10000;

enum class Shape { Circle, Square, Triangle };

const char* shape_name(Shape s) noexcept;

// `size_param` is the radius for circles and the side length for squares and
// (equilateral) triangles. Triangles are centred on their centroid.
struct Item {
  Shape shape = Shape::Circle;
  double cx = 0.0;
  double cy = 0.0;
  double size_param = 0.0;
  double rotation = 0.0;
};

double item_area(const Item& item) noexcept;
double item_perimeter(const Item& item) noexcept;
// Radius of the smallest disc about the item centre that contains the item.
double bounding_radius(const Item& item) noexcept;

struct StimulusPlan {
  StimulusId id;
  int canvas_px = kCanvasPx;
  std::vector<Item> items;
  std::optional<double> target_area_px;
  std::optional<double> target_perimeter_px;
};

struct SetParams {
  int set = 1;
  std::array<double, 5> area_levels_px = {103, 207, 311, 414, 518};
  std::array<double, 5> perimeter_levels_px = {100, 150, 200, 250, 300};
  int replicates_per_cell = 1;
  std::uint64_t rng_seed = 0;
};

// Throws InvalidArgument on non-increasing levels or replicates < 1, and
// UnsupportedSet for sets outside 1..5.
void validate(const SetParams& params);

// Lays out the items of one stimulus. Sizes satisfy the set's constraint
// analytically; centres are rejection-sampled with bounding discs at least
// 2 px apart and 4 px inside the canvas.
StimulusPlan plan_items(const SetParams& params, const StimulusId& id, Rng& rng);

// Same, with the generator seeded from (params.rng_seed, id).
StimulusPlan plan_stimulus(const SetParams& params, const StimulusId& id);

class Raster {
 public:
  Raster() = default;
  Raster(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool black(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set_black(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  std::size_t black_count() const noexcept;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const { return std::size_t(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// A pixel is black iff its centre (x + 0.5, y + 0.5) lies inside some item.
Raster render(const StimulusPlan& plan);

// Number of 8-connected black components.
int count_components(const Raster& raster);

// Binary PGM: P5, maxval 255, 0 = black, 255 = white.
std::string encode_pgm(const Raster& raster);
Raster decode_pgm(const std::string& bytes);
void write_pgm(const Raster& raster, const std::filesystem::path& path);
Raster read_pgm(const std::filesystem::path& path);

// Cells of a corpus in manifest order: numerosity-major, then level (sets
// 1-2 only), then replicate.
std::vector<StimulusId> corpus_cells(const SetParams& params);

struct ManifestRow {
  StimulusId id;
  std::string relative_path;
};

struct CorpusManifest {
  int set = 1;
  std::vector<ManifestRow> rows;
};

// Writes one PGM per cell plus manifest.tsv into `out_dir`.
CorpusManifest generate_corpus(const SetParams& params, const std::filesystem::path& out_dir);

std::string manifest_tsv(const CorpusManifest& manifest);

}  // namespace devalign::stimgen
