#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "devalign/embedding_store.hpp"

namespace devalign::numeffects {

inline constexpr int kMaxNumerosity = 9;
inline constexpr std::size_t kNumPairs = 36;
inline constexpr int kDefaultSamplesPerPair = 8;

struct PairRow {
  int n1 = 0;
  int n2 = 0;  // n1 < n2
  double mean_similarity = 0.0;

  int distance() const noexcept { return n2 - n1; }
  double avg_size() const noexcept { return (n1 + n2) / 2.0; }
  double ratio() const noexcept { return static_cast<double>(n2) / n1; }
};

// All 36 unordered numerosity pairs in lexicographic order (1,2), (1,3) ... (8,9).
struct PairTable {
  std::array<PairRow, kNumPairs> rows;

  static std::array<std::pair<int, int>, kNumPairs> pairs();
  // Table with the given similarity for every pair (tests, analytic oracles).
  template <typename F>
  static PairTable from_function(F&& similarity) {
    PairTable t;
    const auto ps = pairs();
    for (std::size_t i = 0; i < kNumPairs; ++i) {
      t.rows[i] = {ps[i].first, ps[i].second, similarity(ps[i].first, ps[i].second)};
    }
    return t;
  }
};

struct NegExpFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r2 = 0.0;

  double operator()(double ratio) const noexcept;
};

struct EffectStats {
  double distance_r = 0.0;
  double size_r = 0.0;
  double ratio_r2 = 0.0;
  NegExpFit negexp;
};

struct EpochStats {
  int epoch = 0;
  EffectStats stats;
};

struct EffectTrajectory {
  int set = 1;
  std::vector<EpochStats> per_epoch;  // strictly increasing epochs
};

// For every pair, draws samples_per_pair (n1, n2) stimulus pairs from the
// store's rows of stimulus set `set` and records the mean cosine. When the set
// carries levels the k-th draw uses the k-th level (cyclically). Rows whose ids are not StimulusIds are ignored.
PairTable build_pair_table(const EmbeddingStore& store, int set, int samples_per_pair, std::uint64_t seed);

// Pearson r of (|n1 - n2|, similarity) over the 36 rows.
double distance_effect(const PairTable& table);
// Pearson r of ((n1 + n2) / 2, similarity).
double size_effect(const PairTable& table);

// Least squares sim ~ a * exp(-b * (ratio - 1)) + c with b in [1e-3, 50]:
// log grid over b with the linear (a, c) solve at each node, then golden
// section on b around the best node.
NegExpFit fit_negexp(const PairTable& table);

inline constexpr double kNegExpMinB = 1e-3;
inline constexpr double kNegExpMaxB = 50.0;
inline constexpr int kNegExpGridSize = 200;

// Best (a, c) and the resulting SS_res for a fixed b.
struct LinearSolve {
  double a = 0.0;
  double c = 0.0;
  double ss_res = 0.0;
};
LinearSolve solve_negexp_linear(std::span<const double> ratios, std::span<const double> sims, double b);

EffectStats compute_effects(const PairTable& table);

// Effects for every store, each epoch sampled with the same seed. Stores must share model_id
// and dim and have strictly increasing epochs.
EffectTrajectory effects_over_epochs(std::span<const EmbeddingStore> stores, int set, int samples_per_pair,
                                     std::uint64_t seed);

// Throws InconsistentStores unless model_id and dim match and epochs increase.
void check_consistent(std::span<const EmbeddingStore> stores);

}  // namespace devalign::numeffects
