#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "devalign/core_model.hpp"
#include "devalign/embedding_store.hpp"

namespace devalign::oddoneout {

inline constexpr std::size_t kImagesPerTrial = 6;
inline constexpr double kChance = 1.0 / 6.0;

// One odd-one-out item: six image embeddings, one of which (answer_index)
// does not embody the concept.
struct Trial {
  int concept_index = 0;
  std::array<std::vector<float>, kImagesPerTrial> images;
  int answer_index = 0;
};

struct ConceptResult {
  int concept_index = 0;
  ConceptClass concept_class = ConceptClass::Topology;
  int chosen = 0;
  bool correct = false;
};

struct ClassAccuracyReport {
  std::vector<ConceptResult> per_concept;  // ascending concept index
  std::map<ConceptClass, double> per_class;  // only classes with at least one trial
  std::map<ConceptClass, int> class_counts;
  double overall = 0.0;
  double chance = kChance;
  bool complete = false;  // all 43 concepts present
};

// dot(u, v) / (|u| |v|), accumulated in double. Throws DimensionMismatch or ZeroVector.
double cosine(std::span<const float> u, std::span<const float> v);

// Index whose mean cosine to the other five is lowest; ties go to the lowest index.
int choose_odd(const std::array<std::vector<float>, kImagesPerTrial>& images);

// Scores trials against the concept table. Throws DuplicateConcept when a
// concept appears twice and IndexOutOfRange for indices outside 1..43.
ClassAccuracyReport score_concepts(std::span<const Trial> trials);

// Answer key TSV: concept_index<TAB>answer_index. A non-numeric first line is
// taken as a header; '#' lines are skipped.
std::map<int, int> read_answer_key(const std::filesystem::path& path);

// Assembles trials from a store whose ids are gt-cNN-iK (NN = 01..43, K = 0..5).
std::vector<Trial> trials_from_store(const EmbeddingStore& store, const std::map<int, int>& key);

}  // namespace devalign::oddoneout
