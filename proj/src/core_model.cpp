#include "devalign/core_model.hpp"

#include <charconv>

#include "devalign/error.hpp"

namespace devalign {

namespace {

constexpr auto T = ConceptClass::Topology;
constexpr auto E = ConceptClass::EuclideanGeometry;
constexpr auto F = ConceptClass::GeometricalFigures;
constexpr auto S = ConceptClass::SymmetricalFigures;
constexpr auto C = ConceptClass::ChiralFigures;
constexpr auto M = ConceptClass::MetricProperties;
constexpr auto G = ConceptClass::GeometricalTransformations;

constexpr std::array<ConceptEntry, 45> kTable = {{
    {0, "Color", std::nullopt, false},
    {0, "Orientation", std::nullopt, false},
    {1, "Holes", T, true},
    {2, "Inside", T, true},
    {3, "Closure", T, true},
    {4, "Connectedness", T, true},
    {5, "Alignment of points in lines", E, true},
    {6, "Curve", E, true},
    {7, "Convex shape", F, true},
    {8, "Straight line", E, true},
    {9, "Alignment of points in lines", E, true},
    {10, "Quadilateral", F, true},
    {11, "Right angled triangle", F, true},
    {12, "Right angle", E, true},
    {13, "Right angle", E, true},
    {14, "Distance", M, true},
    {15, "Circle", F, true},
    {16, "Center of circle", M, true},
    {17, "Middle of segment", M, true},
    {18, "Equilateral triangle", F, true},
    {19, "Fixed proportion", M, true},
    {20, "Center of quadilateral", M, true},
    {21, "Square", F, true},
    {22, "Rectangle", F, true},
    {23, "Parallelogram", F, true},
    {24, "Trapezoid", F, true},
    {25, "Vertical symmetry", G, true},
    {26, "Vertical axis", S, true},
    {27, "Horizontal axis", S, true},
    {28, "Oblique axis", S, true},
    {29, "Translation", G, true},
    {30, "Point symmetry", G, true},
    {31, "Horizontal symmetry", G, true},
    {32, "Rotation", G, true},
    {33, "Oblique symmetry", G, true},
    {34, "Homothecy (fixed orientation)", G, true},
    {35, "Parallel lines", E, true},
    {36, "Oblique axis", C, true},
    {37, "Homothecy (fixed size)", G, true},
    {38, "Secant lines", E, true},
    {39, "Vertical axis", C, true},
    {40, "Vertical axis", C, true},
    {41, "Equidistance", M, true},
    {42, "Oblique axis", C, true},
    {43, "Increasing distance", M, true},
}};

constexpr std::size_t kTrainingRows = 2;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string_view class_name(ConceptClass c) noexcept {
  switch (c) {
    case ConceptClass::Topology: return "Topology";
    case ConceptClass::EuclideanGeometry: return "EuclideanGeometry";
    case ConceptClass::GeometricalFigures: return "GeometricalFigures";
    case ConceptClass::SymmetricalFigures: return "SymmetricalFigures";
    case ConceptClass::ChiralFigures: return "ChiralFigures";
    case ConceptClass::MetricProperties: return "MetricProperties";
    case ConceptClass::GeometricalTransformations: return "GeometricalTransformations";
  }
  return "?";
}

std::optional<ConceptClass> parse_class(std::string_view name) noexcept {
  for (auto c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

std::span<const ConceptEntry> concept_table() noexcept { return kTable; }

std::span<const ConceptEntry> scored_concepts() noexcept {
  return std::span<const ConceptEntry>(kTable).subspan(kTrainingRows);
}

ConceptClass class_of(int concept_index) {
  if (concept_index < 1 || concept_index > kNumConcepts) {
    throw Error(ErrorCode::IndexOutOfRange,
                "concept index " + std::to_string(concept_index) + " not in 1..43");
  }
  return *kTable[kTrainingRows + static_cast<std::size_t>(concept_index - 1)].concept_class;
}

std::string concept_table_tsv() {
  std::string out;
  for (const auto& e : scored_concepts()) {
    out += std::to_string(e.index);
    out += '\t';
    out += e.label;
    out += '\t';
    out += class_name(*e.concept_class);
    out += '\n';
  }
  return out;
}

double epoch_to_age(int epoch, const EpochAgeMap& map) {
  if (epoch < 1) {
    throw Error(ErrorCode::InvalidEpoch, "epoch " + std::to_string(epoch) + " < 1");
  }
  if (map.epochs_per_year < 1) {
    throw Error(ErrorCode::InvalidArgument, "epochs_per_year must be >= 1");
  }
  return map.base_age_years + static_cast<double>(epoch) / map.epochs_per_year;
}

std::string to_string(const StimulusId& id) {
  std::string out = "s" + std::to_string(id.set) + "-n" + std::to_string(id.numerosity) + "-l";
  out += id.level ? std::to_string(*id.level) : std::string("x");
  out += "-r" + std::to_string(id.replicate);
  return out;
}

std::optional<StimulusId> parse_stimulus_id(std::string_view text) {
  // Exactly four dash-separated fields with fixed prefixes.
  std::array<std::string_view, 4> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t end = text.find('-', start);
    if (i == 3) {
      if (end != std::string_view::npos) return std::nullopt;
      end = text.size();
    } else if (end == std::string_view::npos) {
      return std::nullopt;
    }
    parts[i] = text.substr(start, end - start);
    start = end + 1;
  }
  constexpr std::array<char, 4> prefixes = {'s', 'n', 'l', 'r'};
  for (std::size_t i = 0; i < 4; ++i) {
    if (parts[i].size() < 2 || parts[i][0] != prefixes[i]) return std::nullopt;
    parts[i].remove_prefix(1);
  }
  StimulusId id;
  if (!parse_int(parts[0], id.set) || !parse_int(parts[1], id.numerosity) ||
      !parse_int(parts[3], id.replicate)) {
    return std::nullopt;
  }
  if (parts[2] == "x") {
    id.level = std::nullopt;
  } else {
    int level = 0;
    if (!parse_int(parts[2], level)) return std::nullopt;
    id.level = level;
  }
  if (id.set < 1 || id.set > 6 || id.numerosity < 1 || id.numerosity > 9 || id.replicate < 0 ||
      (id.level && (*id.level < 1 || *id.level > 5))) {
    return std::nullopt;
  }
  // Canonical spellings only (no leading zeros).
  if (to_string(id) != text) return std::nullopt;
  return id;
}

}  // namespace devalign
