#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace devalign {

inline constexpr int kNumConcepts = 43;
inline constexpr int kNumClasses = 7;

enum class ConceptClass {
  Topology,
  EuclideanGeometry,
  GeometricalFigures,
  SymmetricalFigures,
  ChiralFigures,
  MetricProperties,
  GeometricalTransformations,
};

inline constexpr std::array<ConceptClass, kNumClasses> kAllClasses = {
    ConceptClass::Topology,           ConceptClass::EuclideanGeometry,
    ConceptClass::GeometricalFigures, ConceptClass::SymmetricalFigures,
    ConceptClass::ChiralFigures,      ConceptClass::MetricProperties,
    ConceptClass::GeometricalTransformations,
};

std::string_view class_name(ConceptClass c) noexcept;
std::optional<ConceptClass> parse_class(std::string_view name) noexcept;

struct ConceptEntry {
  int index;  // 1..43 for test concepts, 0 for the two training concepts
  std::string_view label;
  std::optional<ConceptClass> concept_class;  // empty for training concepts
  bool scored;
};

// The odd-one-out battery: 2 training concepts followed by 43 scored ones,
// in battery order. Labels repeat (two "Right angle" rows, ...); the
// positional index is the only identifier.
std::span<const ConceptEntry> concept_table() noexcept;
std::span<const ConceptEntry> scored_concepts() noexcept;

// Throws IndexOutOfRange outside 1..43.
ConceptClass class_of(int concept_index);

// index<TAB>label<TAB>class, one line per scored concept, LF-terminated.
std::string concept_table_tsv();

struct EpochAgeMap {
  int epochs_per_year = 2;
  double base_age_years = 5.0;
};

// age = base + epoch / epochs_per_year. Throws InvalidEpoch for epoch < 1.
double epoch_to_age(int epoch, const EpochAgeMap& map = {});

struct StimulusId {
  int set = 1;
  int numerosity = 1;
  std::optional<int> level;
  int replicate = 0;

  friend bool operator==(const StimulusId&, const StimulusId&) = default;
};

// s{set}-n{numerosity}-l{level|x}-r{replicate}
std::string to_string(const StimulusId& id);
std::optional<StimulusId> parse_stimulus_id(std::string_view text);

}  // namespace devalign
