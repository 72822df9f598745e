#include "devalign/stimgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "devalign/error.hpp"
#include "devalign/parallel.hpp"

namespace devalign::stimgen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

bool has_levels(int set) { return set == 1 || set == 2; }

Shape draw_shape(Rng& rng) { return static_cast<Shape>(rng.index(3)); }

// Size parameter giving the requested per-item perimeter.
double size_for_perimeter(Shape shape, double perimeter) {
  switch (shape) {
    case Shape::Circle: return perimeter / (2.0 * kPi);
    case Shape::Square: return perimeter / 4.0;
    case Shape::Triangle: return perimeter / 3.0;
  }
  return 0.0;
}

// Size parameter giving the requested per-item area.
double size_for_area(Shape shape, double area) {
  switch (shape) {
    case Shape::Circle: return std::sqrt(area / kPi);
    case Shape::Square: return std::sqrt(area);
    case Shape::Triangle: return std::sqrt(4.0 * area / kSqrt3);
  }
  return 0.0;
}

double draw_rotation(Shape shape, Rng& rng) {
  return shape == Shape::Circle ? 0.0 : rng.uniform(0.0, 2.0 * kPi);
}

void place_items(StimulusPlan& plan, Rng& rng) {
  int attempts = 0;
  const double canvas = plan.canvas_px;
  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    Item& item = plan.items[i];
    const double r = bounding_radius(item);
    const double lo = r + kCanvasMarginPx;
    const double hi = canvas - r - kCanvasMarginPx;
    if (hi < lo) {
      throw Error(ErrorCode::PlacementFailure,
                  to_string(plan.id) + ": item larger than the canvas");
    }
    for (;;) {
      if (attempts++ >= kMaxPlacementAttempts) {
        throw Error(ErrorCode::PlacementFailure,
                    to_string(plan.id) + ": exhausted " + std::to_string(kMaxPlacementAttempts) +
                        " placement attempts");
      }
      item.cx = rng.uniform(lo, hi);
      item.cy = rng.uniform(lo, hi);
      bool clear = true;
      for (std::size_t j = 0; j < i && clear; ++j) {
        const Item& other = plan.items[j];
        const double min_dist = r + bounding_radius(other) + kMinGapPx;
        const double dx = item.cx - other.cx;
        const double dy = item.cy - other.cy;
        clear = dx * dx + dy * dy >= min_dist * min_dist;
      }
      if (clear) break;
    }
  }
}

bool inside(const Item& item, double px, double py) {
  const double dx = px - item.cx;
  const double dy = py - item.cy;
  switch (item.shape) {
    case Shape::Circle:
      return dx * dx + dy * dy <= item.size_param * item.size_param;
    case Shape::Square: {
      const double c = std::cos(item.rotation);
      const double s = std::sin(item.rotation);
      const double lx = c * dx + s * dy;
      const double ly = -s * dx + c * dy;
      const double h = item.size_param / 2.0;
      return std::abs(lx) <= h && std::abs(ly) <= h;
    }
    case Shape::Triangle: {
      const double radius = item.size_param / kSqrt3;
      double vx[3];
      double vy[3];
      for (int k = 0; k < 3; ++k) {
        const double a = item.rotation + kPi / 2.0 + k * 2.0 * kPi / 3.0;
        vx[k] = radius * std::cos(a);
        vy[k] = radius * std::sin(a);
      }
      // Counter-clockwise vertices: inside iff left of (or on) every edge.
      for (int k = 0; k < 3; ++k) {
        const int n = (k + 1) % 3;
        const double cross = (vx[n] - vx[k]) * (dy - vy[k]) - (vy[n] - vy[k]) * (dx - vx[k]);
        if (cross < 0.0) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

const char* shape_name(Shape s) noexcept {
  switch (s) {
    case Shape::Circle: return "circle";
    case Shape::Square: return "square";
    case Shape::Triangle: return "triangle";
  }
  return "?";
}

double item_area(const Item& item) noexcept {
  const double s = item.size_param;
  switch (item.shape) {
    case Shape::Circle: return kPi * s * s;
    case Shape::Square: return s * s;
    case Shape::Triangle: return kSqrt3 / 4.0 * s * s;
  }
  return 0.0;
}

double item_perimeter(const Item& item) noexcept {
  const double s = item.size_param;
  switch (item.shape) {
    case Shape::Circle: return 2.0 * kPi * s;
    case Shape::Square: return 4.0 * s;
    case Shape::Triangle: return 3.0 * s;
  }
  return 0.0;
}

double bounding_radius(const Item& item) noexcept {
  const double s = item.size_param;
  switch (item.shape) {
    case Shape::Circle: return s;
    case Shape::Square: return s / std::numbers::sqrt2;
    case Shape::Triangle: return s / kSqrt3;
  }
  return 0.0;
}

void validate(const SetParams& params) {
  if (params.set == 6) {
    throw Error(ErrorCode::UnsupportedSet,
                "set 6 is ingested from naturally occurring images, not generated");
  }
  if (params.set < 1 || params.set > 5) {
    throw Error(ErrorCode::UnsupportedSet, "set " + std::to_string(params.set) + " not in 1..5");
  }
  if (params.replicates_per_cell < 1) {
    throw Error(ErrorCode::InvalidArgument, "replicates_per_cell must be >= 1");
  }
  for (const auto* levels : {&params.area_levels_px, &params.perimeter_levels_px}) {
    for (std::size_t i = 0; i < levels->size(); ++i) {
      if (!((*levels)[i] > 0.0) || (i > 0 && !((*levels)[i] > (*levels)[i - 1]))) {
        throw Error(ErrorCode::InvalidArgument, "level lists must be positive and strictly increasing");
      }
    }
  }
}

StimulusPlan plan_items(const SetParams& params, const StimulusId& id, Rng& rng) {
  validate(params);
  if (id.set != params.set) {
    throw Error(ErrorCode::InvalidArgument,
                to_string(id) + ": id set differs from params set " + std::to_string(params.set));
  }
  if (id.numerosity < 1 || id.numerosity > 9) {
    throw Error(ErrorCode::InvalidArgument, to_string(id) + ": numerosity not in 1..9");
  }
  if (has_levels(params.set)) {
    if (!id.level || *id.level < 1 || *id.level > 5) {
      throw Error(ErrorCode::InvalidLevel, to_string(id) + ": sets 1-2 need a level in 1..5");
    }
  } else if (id.level) {
    throw Error(ErrorCode::InvalidLevel, to_string(id) + ": sets 3-5 draw their level internally");
  }

  const int n = id.numerosity;
  StimulusPlan plan;
  plan.id = id;
  plan.items.resize(static_cast<std::size_t>(n));

  switch (params.set) {
    case 1: {
      const double area = params.area_levels_px[*id.level - 1];
      plan.target_area_px = area;
      for (auto& item : plan.items) item.size_param = std::sqrt(area / (n * kPi));
      break;
    }
    case 2: {
      const double perimeter = params.perimeter_levels_px[*id.level - 1];
      plan.target_perimeter_px = perimeter;
      for (auto& item : plan.items) item.size_param = perimeter / (2.0 * kPi * n);
      break;
    }
    case 3: {
      const double perimeter = params.perimeter_levels_px[rng.index(5)];
      const Shape shape = draw_shape(rng);
      plan.target_perimeter_px = perimeter;
      for (auto& item : plan.items) {
        item.shape = shape;
        item.size_param = size_for_perimeter(shape, perimeter / n);
        item.rotation = draw_rotation(shape, rng);
      }
      break;
    }
    case 4: {
      const double area = params.area_levels_px[rng.index(5)];
      const Shape shape = draw_shape(rng);
      plan.target_area_px = area;
      for (auto& item : plan.items) {
        item.shape = shape;
        item.size_param = size_for_area(shape, area / n);
        item.rotation = draw_rotation(shape, rng);
      }
      break;
    }
    case 5: {
      const double lo = params.area_levels_px.front() / 9.0;
      const double hi = params.area_levels_px.back() / n;
      for (auto& item : plan.items) {
        item.shape = draw_shape(rng);
        item.size_param = size_for_area(item.shape, rng.uniform(lo, hi));
        item.rotation = draw_rotation(item.shape, rng);
      }
      break;
    }
  }

  place_items(plan, rng);
  return plan;
}

StimulusPlan plan_stimulus(const SetParams& params, const StimulusId& id) {
  Rng rng(derive_seed(params.rng_seed, to_string(id)));
  return plan_items(params, id, rng);
}

std::size_t Raster::black_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Raster render(const StimulusPlan& plan) {
  Raster raster(plan.canvas_px, plan.canvas_px);
  for (const Item& item : plan.items) {
    const double r = bounding_radius(item);
    const int x0 = std::max(0, static_cast<int>(std::floor(item.cx - r)));
    const int x1 = std::min(plan.canvas_px - 1, static_cast<int>(std::ceil(item.cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(item.cy - r)));
    const int y1 = std::min(plan.canvas_px - 1, static_cast<int>(std::ceil(item.cy + r)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (inside(item, x + 0.5, y + 0.5)) raster.set_black(x, y);
      }
    }
  }
  return raster;
}

int count_components(const Raster& raster) {
  const int w = raster.width();
  const int h = raster.height();
  std::vector<std::uint8_t> seen(std::size_t(w) * h, 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!raster.black(x, y) || seen[std::size_t(y) * w + x]) continue;
      ++components;
      seen[std::size_t(y) * w + x] = 1;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx;
            const int ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            auto& mark = seen[std::size_t(ny) * w + nx];
            if (mark || !raster.black(nx, ny)) continue;
            mark = 1;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return components;
}

std::string encode_pgm(const Raster& raster) {
  std::string out = "P5\n" + std::to_string(raster.width()) + " " +
                    std::to_string(raster.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + std::size_t(raster.width()) * raster.height());
  std::size_t k = header;
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      out[k++] = static_cast<char>(raster.black(x, y) ? 0 : 255);
    }
  }
  return out;
}

Raster decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P5") throw Error(ErrorCode::FormatError, "not a binary PGM (P5)");
  int w = 0;
  int h = 0;
  int maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::FormatError, "malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::FormatError, "unsupported PGM geometry or maxval");
  }
  ++pos;  // single whitespace after maxval
  if (bytes.size() - std::min(pos, bytes.size()) != std::size_t(w) * h) {
    throw Error(ErrorCode::FormatError, "PGM payload size mismatch");
  }
  Raster raster(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Anything darker than mid-grey counts as an item pixel.
      if (static_cast<unsigned char>(bytes[pos++]) < 128) raster.set_black(x, y);
    }
  }
  return raster;
}

void write_pgm(const Raster& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  const std::string bytes = encode_pgm(raster);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_pgm(buf.str());
}

std::vector<StimulusId> corpus_cells(const SetParams& params) {
  std::vector<StimulusId> cells;
  for (int n = 1; n <= 9; ++n) {
    if (has_levels(params.set)) {
      for (int level = 1; level <= 5; ++level) {
        for (int r = 0; r < params.replicates_per_cell; ++r) {
          cells.push_back({params.set, n, level, r});
        }
      }
    } else {
      for (int r = 0; r < params.replicates_per_cell; ++r) {
        cells.push_back({params.set, n, std::nullopt, r});
      }
    }
  }
  return cells;
}

std::string manifest_tsv(const CorpusManifest& manifest) {
  std::string out = "stimulus_id\trelative_path\tset\tnumerosity\tlevel\treplicate\n";
  for (const auto& row : manifest.rows) {
    out += to_string(row.id) + '\t' + row.relative_path + '\t' + std::to_string(row.id.set) + '\t' +
           std::to_string(row.id.numerosity) + '\t' +
           (row.id.level ? std::to_string(*row.id.level) : std::string("x")) + '\t' +
           std::to_string(row.id.replicate) + '\n';
  }
  return out;
}

CorpusManifest generate_corpus(const SetParams& params, const std::filesystem::path& out_dir) {
  validate(params);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  }

  CorpusManifest manifest;
  manifest.set = params.set;
  for (const auto& id : corpus_cells(params)) {
    manifest.rows.push_back({id, to_string(id) + ".pgm"});
  }

  constexpr std::size_t kChunk = 64;
  std::vector<std::string> encoded;
  for (std::size_t start = 0; start < manifest.rows.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, manifest.rows.size() - start);
    encoded.assign(n, std::string());
    parallel_for(n, [&](std::size_t i) {
      encoded[i] = encode_pgm(render(plan_stimulus(params, manifest.rows[start + i].id)));
    });
    for (std::size_t i = 0; i < n; ++i) {
      const auto path = out_dir / manifest.rows[start + i].relative_path;
      std::ofstream out(path, std::ios::binary);
      out.write(encoded[i].data(), static_cast<std::streamsize>(encoded[i].size()));
      if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    }
  }

  std::ofstream out(out_dir / "manifest.tsv", std::ios::binary);
  out << manifest_tsv(manifest);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest.tsv in " + out_dir.string());
  return manifest;
}

}  // namespace devalign::stimgen
