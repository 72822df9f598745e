#include "devalign/numeffects.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "devalign/core_model.hpp"
#include "devalign/error.hpp"
#include "devalign/oddoneout.hpp"
#include "devalign/parallel.hpp"
#include "devalign/rng.hpp"
#include "devalign/stats.hpp"

namespace devalign::numeffects {

std::array<std::pair<int, int>, kNumPairs> PairTable::pairs() {
  std::array<std::pair<int, int>, kNumPairs> out;
  std::size_t k = 0;
  for (int n1 = 1; n1 <= kMaxNumerosity; ++n1) {
    for (int n2 = n1 + 1; n2 <= kMaxNumerosity; ++n2) out[k++] = {n1, n2};
  }
  return out;
}

double NegExpFit::operator()(double ratio) const noexcept { return a * std::exp(-b * (ratio - 1.0)) + c; }

PairTable build_pair_table(const EmbeddingStore& store, int set, int samples_per_pair, std::uint64_t seed) {
  if (samples_per_pair < 1) throw Error(ErrorCode::InvalidArgument, "samples_per_pair must be >= 1");

  // level (x sorts first) -> numerosity -> rows
  std::map<std::optional<int>, std::array<std::vector<std::size_t>, kMaxNumerosity + 1>> pools;
  for (std::size_t i = 0; i < store.count(); ++i) {
    const auto id = parse_stimulus_id(store.ids()[i]);
    if (!id || id->set != set) continue;
    pools[id->level][static_cast<std::size_t>(id->numerosity)].push_back(i);
  }
  for (int n = 1; n <= kMaxNumerosity; ++n) {
    if (pools.empty()) {
      throw Error(ErrorCode::MissingNumerosity, "set " + std::to_string(set) + " n " + std::to_string(n));
    }
    for (const auto& [level, by_n] : pools) {
      if (by_n[static_cast<std::size_t>(n)].empty()) {
        throw Error(ErrorCode::MissingNumerosity,
                    "set " + std::to_string(set) + " n " + std::to_string(n) +
                        (level ? " level " + std::to_string(*level) : std::string()));
      }
    }
  }
  std::vector<const std::array<std::vector<std::size_t>, kMaxNumerosity + 1>*> strata;
  for (const auto& [level, by_n] : pools) strata.push_back(&by_n);

  Rng rng(derive_seed(seed, "pair-table-s" + std::to_string(set)));
  PairTable table;
  const auto ps = PairTable::pairs();
  for (std::size_t p = 0; p < kNumPairs; ++p) {
    const auto [n1, n2] = ps[p];
    double total = 0.0;
    for (int k = 0; k < samples_per_pair; ++k) {
      const auto& stratum = *strata[static_cast<std::size_t>(k) % strata.size()];
      const auto& pool1 = stratum[static_cast<std::size_t>(n1)];
      const auto& pool2 = stratum[static_cast<std::size_t>(n2)];
      const std::size_t i = pool1[rng.index(pool1.size())];
      const std::size_t j = pool2[rng.index(pool2.size())];
      total += oddoneout::cosine(store.row(i), store.row(j));
    }
    table.rows[p] = {n1, n2, total / samples_per_pair};
  }
  return table;
}

namespace {

template <typename F>
std::array<double, kNumPairs> column(const PairTable& table, F&& f) {
  std::array<double, kNumPairs> out;
  for (std::size_t i = 0; i < kNumPairs; ++i) out[i] = f(table.rows[i]);
  return out;
}

std::array<double, kNumPairs> similarities(const PairTable& table) {
  return column(table, [](const PairRow& r) { return r.mean_similarity; });
}

}  // namespace

double distance_effect(const PairTable& table) {
  const auto x = column(table, [](const PairRow& r) { return static_cast<double>(r.distance()); });
  return stats::pearson_r(x, similarities(table));
}

double size_effect(const PairTable& table) {
  const auto x = column(table, [](const PairRow& r) { return r.avg_size(); });
  return stats::pearson_r(x, similarities(table));
}

LinearSolve solve_negexp_linear(std::span<const double> ratios, std::span<const double> sims, double b) {
  const std::size_t n = ratios.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::exp(-b * (ratios[i] - 1.0));
  const double mz = stats::mean(z);
  const double my = stats::mean(sims);
  double szz = 0.0;
  double szy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    szz += (z[i] - mz) * (z[i] - mz);
    szy += (z[i] - mz) * (sims[i] - my);
  }
  LinearSolve out;
  if (!(szz > 0.0)) {
    out.ss_res = std::numeric_limits<double>::infinity();
    return out;
  }
  out.a = szy / szz;
  out.c = my - out.a * mz;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = sims[i] - (out.a * z[i] + out.c);
    out.ss_res += e * e;
  }
  return out;
}

NegExpFit fit_negexp(const PairTable& table) {
  const auto ratios = column(table, [](const PairRow& r) { return r.ratio(); });
  const auto sims = similarities(table);

  std::set<double> distinct(ratios.begin(), ratios.end());
  if (distinct.size() < 4) throw Error(ErrorCode::InvalidArgument, "need at least 4 distinct ratios");

  const double my = stats::mean(sims);
  double ss_tot = 0.0;
  for (double y : sims) ss_tot += (y - my) * (y - my);
  if (ss_tot == 0.0) throw Error(ErrorCode::DegenerateVariance, "constant similarities");

  auto objective = [&](double b) {
    const double v = solve_negexp_linear(ratios, sims, b).ss_res;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  const double log_lo = std::log(kNegExpMinB);
  const double log_hi = std::log(kNegExpMaxB);
  std::array<double, kNegExpGridSize> grid;
  int best = -1;
  double best_ss = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kNegExpGridSize; ++k) {
    grid[k] = k == kNegExpGridSize - 1 ? kNegExpMaxB
                                       : std::exp(log_lo + (log_hi - log_lo) * k / (kNegExpGridSize - 1));
    const double ss = objective(grid[k]);
    if (ss < best_ss) {
      best_ss = ss;
      best = k;
    }
  }
  if (best < 0) throw Error(ErrorCode::FitFailure, "no finite objective on the b grid");

  // Golden section on the bracket spanned by the neighbouring grid nodes.
  double lo = grid[std::max(best - 1, 0)];
  double hi = grid[std::min(best + 1, kNegExpGridSize - 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
    }
  }
  double b = grid[best];
  double ss = best_ss;
  for (const auto& [cand, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f < ss) {
      ss = f;
      b = cand;
    }
  }

  const auto solve = solve_negexp_linear(ratios, sims, b);
  NegExpFit fit;
  fit.a = solve.a;
  fit.b = b;
  fit.c = solve.c;
  fit.r2 = 1.0 - solve.ss_res / ss_tot;
  return fit;
}

EffectStats compute_effects(const PairTable& table) {
  EffectStats s;
  s.distance_r = distance_effect(table);
  s.size_r = size_effect(table);
  s.negexp = fit_negexp(table);
  s.ratio_r2 = s.negexp.r2;
  return s;
}

void check_consistent(std::span<const EmbeddingStore> stores) {
  if (stores.empty()) throw Error(ErrorCode::InconsistentStores, "no stores");
  for (std::size_t i = 1; i < stores.size(); ++i) {
    const auto& first = stores.front().manifest();
    const auto& m = stores[i].manifest();
    if (m.model_id != first.model_id) {
      throw Error(ErrorCode::InconsistentStores, "model_id '" + m.model_id + "' != '" + first.model_id + "'");
    }
    if (m.dim != first.dim) {
      throw Error(ErrorCode::InconsistentStores,
                  "dim " + std::to_string(m.dim) + " != " + std::to_string(first.dim));
    }
    if (m.epoch <= stores[i - 1].epoch()) {
      throw Error(ErrorCode::InconsistentStores, "epochs must be strictly increasing (epoch " +
                                                     std::to_string(m.epoch) + ")");
    }
  }
}

EffectTrajectory effects_over_epochs(std::span<const EmbeddingStore> stores, int set, int samples_per_pair,
                                     std::uint64_t seed) {
  check_consistent(stores);
  EffectTrajectory traj;
  traj.set = set;
  traj.per_epoch.resize(stores.size());
  parallel_for(stores.size(), [&](std::size_t i) {
    traj.per_epoch[i].epoch = stores[i].epoch();
    traj.per_epoch[i].stats = compute_effects(build_pair_table(stores[i], set, samples_per_pair, seed));
  });
  return traj;
}

}  // namespace devalign::numeffects
