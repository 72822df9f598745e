#include "devalign/oddoneout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "devalign/error.hpp"

namespace devalign::oddoneout {

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i];
    const double b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

int choose_odd(const std::array<std::vector<float>, kImagesPerTrial>& images) {
  double sim[kImagesPerTrial][kImagesPerTrial] = {};
  for (std::size_t i = 0; i < kImagesPerTrial; ++i) {
    for (std::size_t j = i + 1; j < kImagesPerTrial; ++j) {
      sim[i][j] = sim[j][i] = cosine(images[i], images[j]);
    }
  }
  int best = 0;
  double best_mean = 0.0;
  for (std::size_t i = 0; i < kImagesPerTrial; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < kImagesPerTrial; ++j) {
      if (j != i) total += sim[i][j];
    }
    const double m = total / static_cast<double>(kImagesPerTrial - 1);
    if (i == 0 || m < best_mean) {
      best = static_cast<int>(i);
      best_mean = m;
    }
  }
  return best;
}

ClassAccuracyReport score_concepts(std::span<const Trial> trials) {
  ClassAccuracyReport report;
  std::set<int> seen;
  std::map<ConceptClass, int> class_correct;
  int correct = 0;
  for (const Trial& trial : trials) {
    const ConceptClass cls = class_of(trial.concept_index);
    if (!seen.insert(trial.concept_index).second) {
      throw Error(ErrorCode::DuplicateConcept, "concept " + std::to_string(trial.concept_index));
    }
    if (trial.answer_index < 0 || trial.answer_index >= static_cast<int>(kImagesPerTrial)) {
      throw Error(ErrorCode::IndexOutOfRange, "answer index " + std::to_string(trial.answer_index));
    }
    ConceptResult result;
    result.concept_index = trial.concept_index;
    result.concept_class = cls;
    result.chosen = choose_odd(trial.images);
    result.correct = result.chosen == trial.answer_index;
    report.per_concept.push_back(result);
    report.class_counts[cls] += 1;
    class_correct[cls] += result.correct ? 1 : 0;
    correct += result.correct ? 1 : 0;
  }
  std::sort(report.per_concept.begin(), report.per_concept.end(),
            [](const auto& a, const auto& b) { return a.concept_index < b.concept_index; });
  for (const auto& [cls, n] : report.class_counts) {
    report.per_class[cls] = static_cast<double>(class_correct[cls]) / n;
  }
  report.overall = trials.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(trials.size());
  report.complete = seen.size() == static_cast<std::size_t>(kNumConcepts);
  return report;
}

std::map<int, int> read_answer_key(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::map<int, int> key;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string where = path.filename().string() + " line " + std::to_string(lineno);
    int concept_index = 0;
    int answer = 0;
    try {
      if (tab == std::string::npos) throw std::invalid_argument("no tab");
      std::size_t used = 0;
      concept_index = std::stoi(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
      const std::string rest = line.substr(tab + 1);
      answer = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header
      throw Error(ErrorCode::FormatError, where + ": expected concept_index<TAB>answer_index");
    }
    if (answer < 0 || answer >= static_cast<int>(kImagesPerTrial)) {
      throw Error(ErrorCode::FormatError, where + ": answer index not in 0..5");
    }
    class_of(concept_index);
    if (!key.emplace(concept_index, answer).second) {
      throw Error(ErrorCode::DuplicateConcept, where + ": concept " + std::to_string(concept_index));
    }
  }
  return key;
}

std::vector<Trial> trials_from_store(const EmbeddingStore& store, const std::map<int, int>& key) {
  std::vector<Trial> trials;
  for (const auto& [concept_index, answer] : key) {
    Trial trial;
    trial.concept_index = concept_index;
    trial.answer_index = answer;
    char cc[8];
    std::snprintf(cc, sizeof cc, "%02d", concept_index);
    for (std::size_t k = 0; k < kImagesPerTrial; ++k) {
      const std::string id = "gt-c" + std::string(cc) + "-i" + std::to_string(k);
      const std::size_t row = store.find(id);
      if (row == store.count()) throw Error(ErrorCode::FormatError, "store has no row for " + id);
      const auto v = store.row(row);
      trial.images[k].assign(v.begin(), v.end());
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

}  // namespace devalign::oddoneout
