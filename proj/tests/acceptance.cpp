// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fail.
#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "devalign/cli.hpp"
#include "devalign/error.hpp"
#include "devalign/growth.hpp"
#include "devalign/numeffects.hpp"
#include "devalign/numline.hpp"
#include "devalign/report.hpp"
#include "devalign/oddoneout.hpp"
#include "devalign/rng.hpp"
#include "devalign/stats.hpp"
#include "devalign/stimgen.hpp"
#include "devalign/synthetic_oracle.hpp"
#include "test_util.hpp"

using namespace devalign;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cli_run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int rc = cli::run(args, out, err);
  if (rc != 0) std::fprintf(stderr, "  cli %s -> %d %s", args.front().c_str(), rc, err.str().c_str());
  return rc;
}

// ---- 1: oracle trajectory ---------------------------------------------------

Verdict criterion_1() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  testutil::TempDir dir;
  for (int seed : {1, 2, 3, 4, 5}) {
    const std::string o = (dir / ("orc" + std::to_string(seed))).string();
    const std::string js = (dir / ("num" + std::to_string(seed) + ".json")).string();
    const std::string s = std::to_string(seed);
    if (cli_run({"oracle", "--sigma", "0.5", "--epochs", "1:1.0,2:0.5,10:0.1,90:0.0", "--seed", s, "--out", o}) != 0 ||
        cli_run({"eval-number", "--embeddings-glob", o + "/epoch_*", "--seed", s, "--out", js}) != 0) {
      v.check(false, "pipeline failed for seed " + s);
      continue;
    }
    const auto j = nlohmann::json::parse(testutil::slurp(js));
    const auto& rows = j["per_epoch"];
    if (rows.size() != 4) {
      v.check(false, "expected 4 epochs");
      continue;
    }
    std::string traj;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double r = std::abs(rows[i]["distance_r"].get<double>());
      traj += fmt("%s%.3f", i ? "," : "", r);
      if (i > 0) {
        const double prev = std::abs(rows[i - 1]["distance_r"].get<double>());
        v.check(r >= prev - 0.05, fmt("seed %d |distance_r| drops %.3f -> %.3f", seed, prev, r));
      }
    }
    const double final_r = rows[3]["distance_r"].get<double>();
    const double final_r2 = rows[3]["ratio_r2"].get<double>();
    v.check(final_r <= -0.8, fmt("seed %d final distance_r %.4f", seed, final_r));
    v.check(final_r2 >= 0.9, fmt("seed %d final ratio_r2 %.4f", seed, final_r2));
    if (seed == 1) v.detail += "|r| " + traj + fmt(", final r %.4f, R2 %.4f", final_r, final_r2);
  }
  const double secs = seconds_since(t0);
  v.check(secs < 30.0, fmt("runtime %.1fs", secs));
  v.detail += fmt(", 5 seeds, %.2fs", secs);
  return v;
}

// ---- 2: MDS number line -----------------------------------------------------

Verdict criterion_2() {
  Verdict v;
  oracle::OracleParams p;
  p.seed = 1;
  const std::vector<EmbeddingStore> stores{oracle::gen_oracle_store(p, 90)};
  const auto c = numline::line_over_epochs(stores, 1, 1).front().line.coords;
  for (std::size_t k = 1; k < numline::kN; ++k) v.check(c[k] > c[k - 1], fmt("coords not increasing at n=%zu", k + 1));
  const double g12 = c[1] - c[0];
  const double g89 = c[8] - c[7];
  v.check(g12 > g89, fmt("gap(1,2) %.4f <= gap(8,9) %.4f", g12, g89));

  numline::Matrix9 m{};
  for (std::size_t i = 0; i < numline::kN; ++i) {
    for (std::size_t j = 0; j < numline::kN; ++j) m[i][j] = 1.0 - 0.1 * std::abs(double(i) - double(j));
  }
  const auto line = numline::classical_mds_1d(numline::SimilarityMatrix(m));
  const std::vector<double> xs(line.coords.begin(), line.coords.end());
  const std::vector<double> ns{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const double r = stats::pearson_r(xs, ns);
  v.check(std::abs(r) >= 0.999, fmt("line |r| %.6f", r));
  v.detail = fmt("gap(1,2) %.4f > gap(8,9) %.4f; line |r| %.12f", g12, g89, std::abs(r)) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- 3: chance level --------------------------------------------------------

Verdict criterion_3() {
  Verdict v;
  Rng rng(derive_seed(3, "chance"));
  int correct = 0;
  int total = 0;
  while (total < 10000) {
    std::vector<oddoneout::Trial> batch;
    for (int c = 1; c <= kNumConcepts && total + static_cast<int>(batch.size()) < 10000; ++c) {
      oddoneout::Trial t;
      t.concept_index = c;
      t.answer_index = static_cast<int>(rng.index(6));
      for (auto& im : t.images) {
        im.resize(32);
        for (auto& x : im) x = static_cast<float>(rng.normal());
      }
      batch.push_back(std::move(t));
    }
    const auto rep = oddoneout::score_concepts(batch);
    for (const auto& res : rep.per_concept) correct += res.correct;
    total += static_cast<int>(batch.size());
  }
  const double acc = double(correct) / total;
  v.check(std::abs(acc - 0.167) <= 0.02, fmt("accuracy %.4f", acc));
  v.detail = fmt("%d trials, accuracy %.4f", total, acc) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- 4: choose_odd vs brute force ------------------------------------------

Verdict criterion_4() {
  Verdict v;
  Rng rng(derive_seed(4, "brute"));
  int agree = 0;
  for (int t = 0; t < 1000; ++t) {
    std::array<std::vector<float>, 6> im;
    const std::size_t dim = 2 + rng.index(63);
    for (auto& x : im) {
      x.resize(dim);
      for (auto& y : x) y = static_cast<float>(rng.normal());
    }
    // All 15 unordered pairs, each added to both endpoints.
    std::array<double, 6> sum{};
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        long double dot = 0, a = 0, b = 0;
        for (std::size_t d = 0; d < dim; ++d) {
          dot += (long double)im[i][d] * im[j][d];
          a += (long double)im[i][d] * im[i][d];
          b += (long double)im[j][d] * im[j][d];
        }
        const double cs = double(dot / std::sqrt(a * b));
        sum[i] += cs;
        sum[j] += cs;
      }
    }
    int best = 0;
    for (int i = 1; i < 6; ++i) {
      if (sum[i] < sum[best]) best = i;
    }
    agree += oddoneout::choose_odd(im) == best;
  }
  v.check(agree == 1000, fmt("%d/1000 agree", agree));
  if (v.pass) v.detail = "1000/1000 agree";
  return v;
}

// ---- 5: set-1 stimuli -------------------------------------------------------

Verdict criterion_5() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  stimgen::SetParams params;
  params.set = 1;
  params.rng_seed = 7;
  double worst_big = 0.0;
  double worst_small = 0.0;
  int cells = 0;
  for (const auto& id : stimgen::corpus_cells(params)) {
    const auto plan = stimgen::plan_stimulus(params, id);
    const auto raster = stimgen::render(plan);
    const int comps = stimgen::count_components(raster);
    v.check(comps == id.numerosity, devalign::to_string(id) + fmt(" has %d components", comps));
    double min_r = 1e300;
    for (const auto& it : plan.items) min_r = std::min(min_r, it.size_param);
    const double area = params.area_levels_px[static_cast<std::size_t>(*id.level - 1)];
    const double rel = std::abs(double(raster.black_count()) - area) / area;
    const double tol = min_r >= 4.0 ? 0.03 : 0.15;
    (min_r >= 4.0 ? worst_big : worst_small) = std::max(min_r >= 4.0 ? worst_big : worst_small, rel);
    v.check(rel <= tol, devalign::to_string(id) + fmt(" pixel error %.4f > %.2f", rel, tol));
    ++cells;
  }
  const double secs = seconds_since(t0);
  v.check(cells == 45, fmt("%d cells", cells));
  v.check(secs < 60.0, fmt("runtime %.1fs", secs));
  v.detail = fmt("%d cells, worst pixel error %.4f (r>=4) / %.4f (r<4), %.2fs", cells, worst_big, worst_small, secs) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- 6: curve fits ----------------------------------------------------------

double negexp_grid_r2(const numeffects::PairTable& t) {
  std::vector<double> x;
  std::vector<double> y;
  double my = 0;
  for (const auto& r : t.rows) {
    x.push_back(r.ratio());
    y.push_back(r.mean_similarity);
    my += r.mean_similarity;
  }
  my /= double(y.size());
  double sst = 0;
  for (double yi : y) sst += (yi - my) * (yi - my);
  double best = INFINITY;
  const int nodes = 200000;
  for (int k = 0; k < nodes; ++k) {
    const double b = 1e-3 * std::pow(5e4, k / double(nodes - 1));
    best = std::min(best, numeffects::solve_negexp_linear(x, y, b).ss_res);
  }
  return 1.0 - best / sst;
}

double power_grid_r2(const growth::Trajectory& t) {
  const auto& p = t.points();
  double my = 0;
  for (const auto& q : p) my += q.y;
  my /= double(p.size());
  double sst = 0;
  for (const auto& q : p) sst += (q.y - my) * (q.y - my);
  auto sse = [&](double a, double b) {
    double s = 0;
    for (const auto& q : p) s += std::pow(q.y - a * std::pow(q.x, b), 2);
    return s;
  };
  double a_lo = 0.1, a_hi = 5.0, b_lo = -1.0, b_hi = 2.0;
  double ba = 0, bb = 0, best = INFINITY;
  for (int round = 0; round < 5; ++round) {
    const int n = 300;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double a = a_lo + (a_hi - a_lo) * i / n;
        const double b = b_lo + (b_hi - b_lo) * j / n;
        const double s = sse(a, b);
        if (s < best) {
          best = s;
          ba = a;
          bb = b;
        }
      }
    }
    const double wa = 4 * (a_hi - a_lo) / n;
    const double wb = 4 * (b_hi - b_lo) / n;
    a_lo = ba - wa;
    a_hi = ba + wa;
    b_lo = bb - wb;
    b_hi = bb + wb;
  }
  return 1.0 - best / sst;
}

Verdict criterion_6() {
  Verdict v;
  std::vector<growth::Point> exact;
  for (int x = 1; x <= 20; ++x) exact.push_back({double(x), 2.0 * std::sqrt(double(x))});
  const auto pf = growth::fit_power(growth::Trajectory("exact", exact));
  v.check(std::abs(pf.a - 2.0) <= 1e-6 && std::abs(pf.b - 0.5) <= 1e-6, fmt("power a=%.9f b=%.9f", pf.a, pf.b));

  const auto nt = numeffects::PairTable::from_function(
      [](int a, int b) { return 0.5 * std::exp(-1.0 * (double(b) / a - 1.0)) + 0.4; });
  const auto nf = numeffects::fit_negexp(nt);
  v.check(std::abs(nf.a - 0.5) <= 1e-4 && std::abs(nf.b - 1.0) <= 1e-4 && std::abs(nf.c - 0.4) <= 1e-4,
          fmt("negexp a=%.6f b=%.6f c=%.6f", nf.a, nf.b, nf.c));
  v.check(nf.r2 >= 1.0 - 1e-8, fmt("negexp R2 %.12f", nf.r2));

  double worst_pow = 0.0;
  double worst_neg = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(derive_seed(seed, "fits"));
    std::vector<growth::Point> noisy;
    for (int x = 1; x <= 20; ++x) noisy.push_back({double(x), 2.0 * std::sqrt(double(x)) + 0.01 * rng.normal()});
    const growth::Trajectory t("noisy", noisy);
    worst_pow = std::max(worst_pow, std::abs(growth::fit_power(t).r2 - power_grid_r2(t)));

    const auto tab = numeffects::PairTable::from_function([&](int a, int b) {
      return 0.3 * std::exp(-1.5 * (double(b) / a - 1.0)) + 0.5 + 0.02 * rng.normal();
    });
    worst_neg = std::max(worst_neg, std::abs(numeffects::fit_negexp(tab).r2 - negexp_grid_r2(tab)));
  }
  v.check(worst_pow <= 1e-4, fmt("power vs grid %.2e", worst_pow));
  v.check(worst_neg <= 1e-4, fmt("negexp vs grid %.2e", worst_neg));
  v.detail = fmt("power |da|,|db| <= %.1e; negexp R2 1-%.1e; noisy vs grid %.1e / %.1e",
                 std::max(std::abs(pf.a - 2.0), std::abs(pf.b - 0.5)), 1.0 - nf.r2, worst_pow, worst_neg) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- 7: pearson and the pair table -----------------------------------------

Verdict criterion_7() {
  Verdict v;
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const std::vector<double> ys{2, 1, 4, 3, 5};
  // Textbook formula: r = (n Sxy - Sx Sy) / sqrt((n Sxx - Sx^2)(n Syy - Sy^2)) = (5*53-15*15)/sqrt(50*50) = 0.8
  const double r_fixture = 0.8;
  const auto c = growth::pearson(xs, ys);
  v.check(std::abs(c.r - r_fixture) <= 1e-12, fmt("r %.17g", c.r));
  const double df = 3.0;
  const double t = r_fixture * std::sqrt(df / (1.0 - r_fixture * r_fixture));
  const double p_oracle = boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
  v.check(std::abs(c.p - p_oracle) <= 1e-8, fmt("p %.17g vs %.17g", c.p, p_oracle));

  std::size_t min_rows = 1000;
  std::size_t max_rows = 0;
  oracle::OracleParams p;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    p.seed = seed;
    for (const auto& e : p.epochs) {
      const auto tab = numeffects::build_pair_table(oracle::gen_oracle_store(p, e.epoch), 1, 1 + int(seed), seed);
      std::set<std::pair<int, int>> distinct;
      for (const auto& row : tab.rows) {
        if (row.n1 >= 1 && row.n1 < row.n2 && row.n2 <= 9) distinct.insert({row.n1, row.n2});
      }
      min_rows = std::min(min_rows, distinct.size());
      max_rows = std::max(max_rows, distinct.size());
    }
  }
  v.check(min_rows == 36 && max_rows == 36, fmt("pair rows %zu..%zu", min_rows, max_rows));
  v.detail = fmt("r %.15f, p %.12f (oracle %.12f), 36 distinct pairs in every table", c.r, c.p, p_oracle) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

// ---- 8: determinism ---------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testutil::slurp(e.path());
  }
  return out;
}

bool run_all_pipelines(const fs::path& d) {
  const std::string o = (d / "orc").string();
  const std::string g = o + "/epoch_*";
  bool ok = true;
  for (int set = 1; set <= 5; ++set) {
    ok = ok && cli_run({"gen-stimuli", "--set", std::to_string(set), "--seed", "11", "--replicates", "1", "--out",
                        (d / ("stim" + std::to_string(set))).string()}) == 0;
  }
  ok = ok && cli_run({"oracle", "--seed", "11", "--out", o}) == 0;
  ok = ok && cli_run({"eval-number", "--embeddings-glob", g, "--seed", "11", "--out", (d / "num.json").string()}) == 0;
  ok = ok && cli_run({"mds", "--embeddings-glob", g, "--seed", "11", "--out", (d / "mds.json").string()}) == 0;
  ok = ok && cli_run({"fit-growth", "--traj", (d / "num.json").string(), "--out", (d / "fit.json").string()}) == 0;

  // Odd-one-out battery store and key, built from a seeded stream.
  Rng rng(11);
  std::vector<std::string> ids;
  std::vector<float> values;
  std::string key = "concept_index\tanswer_index\n";
  for (int c = 1; c <= kNumConcepts; ++c) {
    for (int k = 0; k < 6; ++k) {
      ids.push_back(fmt("gt-c%02d-i%d", c, k));
      for (int x = 0; x < 16; ++x) values.push_back(static_cast<float>(rng.normal()));
    }
    key += std::to_string(c) + "\t" + std::to_string(rng.index(6)) + "\n";
  }
  StoreManifest m;
  m.model_id = "battery";
  write_store(EmbeddingStore(m, ids, values, 16), d / "gt");
  testutil::spit(d / "key.tsv", key);
  ok = ok && cli_run({"eval-odd", "--embeddings", (d / "gt").string(), "--key", (d / "key.tsv").string(), "--out",
                      (d / "odd.json").string()}) == 0;

  std::string human = "age,distance_r\n";
  for (int age = 6; age <= 50; ++age) human += std::to_string(age) + "," + fmt("%.6f", -0.8 * (1 - std::exp(-age / 10.0))) + "\n";
  testutil::spit(d / "human.csv", human);
  ok = ok && cli_run({"align", "--human", (d / "human.csv").string(), "--model", (d / "num.csv").string(), "--out",
                      (d / "align.json").string()}) == 0;
  return ok;
}

Verdict criterion_8() {
  Verdict v;
  testutil::TempDir dir;
  const fs::path d = dir / "run";
  v.check(run_all_pipelines(d), "first run failed");
  const auto first = snapshot(d);
  fs::remove_all(d);
  v.check(run_all_pipelines(d), "second run failed");
  const auto second = snapshot(d);
  std::size_t same = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      v.check(false, name + " differs");
    } else {
      ++same;
    }
  }
  v.check(first.size() == second.size(), "file sets differ");
  std::size_t pgm = 0;
  for (const auto& [name, bytes] : first) pgm += name.ends_with(".pgm");
  v.detail = fmt("%zu files byte-identical (%zu PGM) across gen-stimuli x5, oracle, eval-number, mds, fit-growth, "
                 "eval-odd, align",
                 same, pgm) +
             (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"1 oracle trajectory", criterion_1},  {"2 MDS number line", criterion_2},
      {"3 chance level", criterion_3},       {"4 choose_odd brute force", criterion_4},
      {"5 set-1 stimuli", criterion_5},      {"6 curve fits", criterion_6},
      {"7 pearson and pair table", criterion_7}, {"8 CLI determinism", criterion_8},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
