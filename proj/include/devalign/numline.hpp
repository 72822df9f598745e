#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "devalign/embedding_store.hpp"
#include "devalign/numeffects.hpp"

namespace devalign::numline {

inline constexpr std::size_t kN = 9;

using Matrix9 = std::array<std::array<double, kN>, kN>;

// Symmetric numerosity-by-numerosity cosine similarities, unit diagonal.
class SimilarityMatrix {
 public:
  // Throws InvalidArgument if asymmetric beyond 1e-9 or non-finite. The
  // diagonal is set to exactly 1 and the two triangles are averaged.
  explicit SimilarityMatrix(const Matrix9& entries);

  static SimilarityMatrix from_pair_table(const numeffects::PairTable& table);

  double operator()(std::size_t i, std::size_t j) const { return entries_[i][j]; }
  const Matrix9& entries() const noexcept { return entries_; }

 private:
  Matrix9 entries_;
};

struct NumberLine {
  std::array<double, kN> coords{};  // numerosity k at index k - 1, mean zero
  double eigenvalue_1 = 0.0;
};

// Eigen-decomposition of a small dense symmetric matrix by cyclic Jacobi
// rotations. Eigenvalues descending; vectors[k] is the unit eigenvector of values[k].
struct EigenSystem {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
EigenSystem jacobi_eigen(const std::vector<std::vector<double>>& symmetric, double tol = 1e-15,
                         int max_sweeps = 100);

// B = -1/2 J D^2 J for d_ij = max(0, 1 - sim_ij).
Matrix9 double_centered_squared_dissimilarity(const SimilarityMatrix& sim);

// Torgerson MDS in one dimension. Orientation: coords[8] >= coords[0].
// Throws DegenerateMatrix when the leading eigenvalue is <= 1e-12.
NumberLine classical_mds_1d(const SimilarityMatrix& sim);

struct EpochLine {
  int epoch = 0;
  NumberLine line;
};

// Mean-similarity matrix per store (same sampling as the pair table) and its number line.
std::vector<EpochLine> line_over_epochs(std::span<const EmbeddingStore> stores, int set, std::uint64_t seed,
                                        int samples_per_pair = numeffects::kDefaultSamplesPerPair);

}  // namespace devalign::numline
