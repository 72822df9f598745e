#include "devalign/numline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "devalign/error.hpp"
#include "devalign/parallel.hpp"

namespace devalign::numline {

SimilarityMatrix::SimilarityMatrix(const Matrix9& entries) : entries_(entries) {
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) {
      if (!std::isfinite(entries[i][j])) throw Error(ErrorCode::NonFinite, "similarity matrix entry");
      if (std::abs(entries[i][j] - entries[j][i]) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "similarity matrix is not symmetric");
      }
    }
  }
  for (std::size_t i = 0; i < kN; ++i) {
    entries_[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kN; ++j) {
      const double v = 0.5 * (entries[i][j] + entries[j][i]);
      entries_[i][j] = entries_[j][i] = v;
    }
  }
}

SimilarityMatrix SimilarityMatrix::from_pair_table(const numeffects::PairTable& table) {
  Matrix9 m{};
  for (const auto& row : table.rows) {
    const auto i = static_cast<std::size_t>(row.n1 - 1);
    const auto j = static_cast<std::size_t>(row.n2 - 1);
    m[i][j] = m[j][i] = row.mean_similarity;
  }
  return SimilarityMatrix(m);
}

EigenSystem jacobi_eigen(const std::vector<std::vector<double>>& symmetric, double tol, int max_sweeps) {
  const std::size_t n = symmetric.size();
  auto a = symmetric;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
    v[i][i] = 1.0;
  }

  double scale = 0.0;
  for (const auto& row : a) {
    for (double x : row) scale += x * x;
  }
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off <= tol * tol * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        // Rotation angle that annihilates a[p][q] (smaller root for stability).
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] > a[y][y]; });
  EigenSystem out;
  for (auto k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

Matrix9 double_centered_squared_dissimilarity(const SimilarityMatrix& sim) {
  Matrix9 d2{};
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) {
      const double d = std::max(0.0, 1.0 - sim(i, j));
      d2[i][j] = d * d;
    }
  }
  std::array<double, kN> row_mean{};
  double grand = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) row_mean[i] += d2[i][j];
    grand += row_mean[i];
    row_mean[i] /= kN;
  }
  grand /= kN * kN;
  Matrix9 b{};
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) b[i][j] = -0.5 * (d2[i][j] - row_mean[i] - row_mean[j] + grand);
  }
  return b;
}

NumberLine classical_mds_1d(const SimilarityMatrix& sim) {
  const Matrix9 b = double_centered_squared_dissimilarity(sim);
  std::vector<std::vector<double>> dense(kN, std::vector<double>(kN));
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t j = 0; j < kN; ++j) dense[i][j] = b[i][j];
  }
  const EigenSystem eig = jacobi_eigen(dense);
  const double lambda = eig.values.front();
  if (!(lambda > 1e-12)) {
    throw Error(ErrorCode::DegenerateMatrix, "leading eigenvalue " + std::to_string(lambda) + " <= 1e-12");
  }
  std::vector<double> u = eig.vectors.front();

  bool flip = u[kN - 1] < u[0];
  if (u[kN - 1] == u[0]) {
    // Tie: make the first nonzero component negative.
    const auto it = std::find_if(u.begin(), u.end(), [](double x) { return x != 0.0; });
    flip = it != u.end() && *it > 0.0;
  }
  if (flip) {
    for (double& x : u) x = -x;
  }

  NumberLine line;
  line.eigenvalue_1 = lambda;
  const double s = std::sqrt(std::max(lambda, 0.0));
  for (std::size_t i = 0; i < kN; ++i) line.coords[i] = s * u[i];
  return line;
}

std::vector<EpochLine> line_over_epochs(std::span<const EmbeddingStore> stores, int set, std::uint64_t seed,
                                        int samples_per_pair) {
  numeffects::check_consistent(stores);
  std::vector<EpochLine> out(stores.size());
  parallel_for(stores.size(), [&](std::size_t i) {
    const auto table = numeffects::build_pair_table(stores[i], set, samples_per_pair, seed);
    out[i].epoch = stores[i].epoch();
    out[i].line = classical_mds_1d(SimilarityMatrix::from_pair_table(table));
  });
  return out;
}

}  // namespace devalign::numline
