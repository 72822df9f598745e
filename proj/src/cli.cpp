#include "devalign/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "devalign/embedding_store.hpp"
#include "devalign/error.hpp"
#include "devalign/growth.hpp"
#include "devalign/numeffects.hpp"
#include "devalign/numline.hpp"
#include "devalign/oddoneout.hpp"
#include "devalign/report.hpp"
#include "devalign/stimgen.hpp"
#include "devalign/synthetic_oracle.hpp"

namespace devalign::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      if (fs::is_directory(g.gl_pathv[i])) out.emplace_back(g.gl_pathv[i]);
    }
  }
  globfree(&g);
  if (out.empty()) throw Error(ErrorCode::FormatError, "no store directories match '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EmbeddingStore> load_stores(const std::string& pattern) {
  std::vector<EmbeddingStore> stores;
  for (const auto& dir : expand_glob(pattern)) {
    try {
      stores.push_back(read_store(dir));
    } catch (const Error& e) {
      throw Error(e.code(), dir.string() + ": " + e.detail());
    }
  }
  std::stable_sort(stores.begin(), stores.end(),
                   [](const auto& a, const auto& b) { return a.epoch() < b.epoch(); });
  return stores;
}

fs::path sibling_csv(const fs::path& json_path) {
  fs::path p = json_path;
  p.replace_extension(".csv");
  return p;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "not an integer list: '" + text + "'");
    }
  }
  return out;
}

json error_json(const Error& e) {
  json j;
  j["code"] = std::string(code_name(e.code()));
  j["detail"] = e.detail();
  return j;
}

json stats_json(const numeffects::EffectStats& s) {
  json j;
  j["distance_r"] = s.distance_r;
  j["size_r"] = s.size_r;
  j["ratio_r2"] = s.ratio_r2;
  j["negexp"] = {{"a", s.negexp.a}, {"b", s.negexp.b}, {"c", s.negexp.c}};
  return j;
}

// ---- subcommands ----------------------------------------------------------

struct GenStimuliArgs {
  int set = 1;
  std::string out;
  std::uint64_t seed = 0;
  int replicates = 1;
};

int cmd_gen_stimuli(const GenStimuliArgs& a, std::ostream& out) {
  report::RunConfig cfg{"gen-stimuli", a.seed, {{"set", std::to_string(a.set)}, {"out", a.out},
                                                {"replicates", std::to_string(a.replicates)}}};
  stimgen::SetParams params;
  params.set = a.set;
  params.replicates_per_cell = a.replicates;
  params.rng_seed = a.seed;
  const auto manifest = stimgen::generate_corpus(params, a.out);

  json j;
  j["meta"] = cfg.header();
  j["set"] = a.set;
  j["replicates"] = a.replicates;
  j["files"] = manifest.rows.size();
  j["manifest"] = "manifest.tsv";
  json levels = json::array();
  for (double v : (a.set == 2 || a.set == 3 ? params.perimeter_levels_px : params.area_levels_px)) levels.push_back(v);
  j[a.set == 2 || a.set == 3 ? "perimeter_levels_px" : "area_levels_px"] = levels;
  report::write_text(fs::path(a.out) / "run.json", report::dump_json(j));
  out << "wrote " << manifest.rows.size() << " stimuli to " << a.out << "\n";
  return 0;
}

int cmd_validate(const std::string& dir, std::ostream& out) {
  const auto store = read_store(dir);
  out << "OK\t" << store.count() << "\t" << store.dim() << "\n";
  return 0;
}

struct EvalOddArgs {
  std::string embeddings;
  std::string key;
  std::string out;
};

int cmd_eval_odd(const EvalOddArgs& a, std::ostream& out) {
  report::RunConfig cfg{"eval-odd", 0, {{"embeddings", a.embeddings}, {"key", a.key}, {"out", a.out}}};
  const auto store = read_store(a.embeddings);
  const auto key = oddoneout::read_answer_key(a.key);
  const auto trials = oddoneout::trials_from_store(store, key);
  const auto rep = oddoneout::score_concepts(trials);

  json j;
  j["meta"] = cfg.header();
  j["model_id"] = store.manifest().model_id;
  j["epoch"] = store.epoch();
  j["overall"] = rep.overall;
  j["chance"] = rep.chance;
  j["n_concepts"] = rep.per_concept.size();
  j["complete"] = rep.complete;
  json classes = json::object();
  for (auto cls : kAllClasses) {
    const auto it = rep.per_class.find(cls);
    if (it == rep.per_class.end()) continue;
    classes[std::string(class_name(cls))] = {{"accuracy", it->second}, {"n", rep.class_counts.at(cls)}};
  }
  j["per_class"] = classes;
  std::string csv = cfg.csv_header() + "class,n,accuracy\n";
  for (auto cls : kAllClasses) {
    const auto it = rep.per_class.find(cls);
    if (it == rep.per_class.end()) continue;
    csv += std::string(class_name(cls)) + "," + std::to_string(rep.class_counts.at(cls)) + "," +
           report::format_double(it->second) + "\n";
  }
  csv += "overall," + std::to_string(rep.per_concept.size()) + "," + report::format_double(rep.overall) + "\n";
  json concepts = json::array();
  for (const auto& c : rep.per_concept) {
    const auto& entry = scored_concepts()[static_cast<std::size_t>(c.concept_index - 1)];
    concepts.push_back({{"concept_index", c.concept_index},
                        {"label", std::string(entry.label)},
                        {"class", std::string(class_name(c.concept_class))},
                        {"chosen", c.chosen},
                        {"answer", key.at(c.concept_index)},
                        {"correct", c.correct}});
  }
  j["per_concept"] = concepts;
  report::write_text(a.out, report::dump_json(j));
  report::write_text(sibling_csv(a.out), csv);
  out << "overall accuracy " << report::format_double(rep.overall) << " over " << rep.per_concept.size()
      << " concepts\n";
  return 0;
}

struct EvalNumberArgs {
  std::string glob;
  int set = 1;
  int samples = numeffects::kDefaultSamplesPerPair;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_eval_number(const EvalNumberArgs& a, std::ostream& out) {
  report::RunConfig cfg{"eval-number", a.seed, {{"embeddings-glob", a.glob}, {"set", std::to_string(a.set)},
                                                {"samples", std::to_string(a.samples)}, {"out", a.out}}};
  const auto stores = load_stores(a.glob);
  const auto traj = numeffects::effects_over_epochs(stores, a.set, a.samples, a.seed);

  json j;
  j["meta"] = cfg.header();
  j["model_id"] = stores.front().manifest().model_id;
  j["set"] = traj.set;
  j["samples_per_pair"] = a.samples;
  json epochs = json::array();
  std::string csv = cfg.csv_header() + "epoch,distance_r,size_r,ratio_r2\n";
  for (const auto& e : traj.per_epoch) {
    json row;
    row["epoch"] = e.epoch;
    const json stats = stats_json(e.stats);
    for (const auto& [k, v] : stats.items()) row[k] = v;
    epochs.push_back(row);
    csv += std::to_string(e.epoch) + "," + report::format_double(e.stats.distance_r) + "," +
           report::format_double(e.stats.size_r) + "," + report::format_double(e.stats.ratio_r2) + "\n";
  }
  j["per_epoch"] = epochs;
  report::write_text(a.out, report::dump_json(j));
  report::write_text(sibling_csv(a.out), csv);
  out << "effects for " << traj.per_epoch.size() << " epochs written to " << a.out << "\n";
  return 0;
}

struct MdsArgs {
  std::string glob;
  std::string epochs;
  int set = 1;
  int samples = numeffects::kDefaultSamplesPerPair;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_mds(const MdsArgs& a, std::ostream& out) {
  report::RunConfig cfg{"mds", a.seed, {{"embeddings-glob", a.glob}, {"epochs", a.epochs},
                                        {"set", std::to_string(a.set)}, {"samples", std::to_string(a.samples)},
                                        {"out", a.out}}};
  auto stores = load_stores(a.glob);
  if (!a.epochs.empty()) {
    const auto wanted = parse_int_list(a.epochs);
    std::vector<EmbeddingStore> picked;
    for (int e : wanted) {
      const auto it = std::find_if(stores.begin(), stores.end(), [&](const auto& s) { return s.epoch() == e; });
      if (it == stores.end()) throw Error(ErrorCode::InvalidEpoch, "no store for epoch " + std::to_string(e));
      picked.push_back(*it);
    }
    std::stable_sort(picked.begin(), picked.end(), [](const auto& x, const auto& y) { return x.epoch() < y.epoch(); });
    stores = std::move(picked);
  }
  const auto lines = numline::line_over_epochs(stores, a.set, a.seed, a.samples);

  json j;
  j["meta"] = cfg.header();
  j["model_id"] = stores.front().manifest().model_id;
  j["set"] = a.set;
  json arr = json::array();
  std::string csv = cfg.csv_header() + "epoch,numerosity,coord\n";
  for (const auto& l : lines) {
    json coords = json::array();
    for (std::size_t k = 0; k < numline::kN; ++k) {
      coords.push_back(l.line.coords[k]);
      csv += std::to_string(l.epoch) + "," + std::to_string(k + 1) + "," + report::format_double(l.line.coords[k]) + "\n";
    }
    arr.push_back({{"epoch", l.epoch}, {"eigenvalue_1", l.line.eigenvalue_1}, {"coords", coords}});
  }
  j["per_epoch"] = arr;
  report::write_text(a.out, report::dump_json(j));
  report::write_text(sibling_csv(a.out), csv);
  out << "number lines for " << lines.size() << " epochs written to " << a.out << "\n";
  return 0;
}

// Series to fit, each with an optional effect transform.
struct Series {
  growth::Trajectory traj;
  std::string transform;
};

std::vector<Series> load_series(const fs::path& path) {
  std::vector<Series> out;
  auto effect_of = [](const std::string& name) -> std::optional<growth::Effect> {
    if (name == "distance_r") return growth::Effect::Distance;
    if (name == "size_r") return growth::Effect::Size;
    if (name == "ratio_r2") return growth::Effect::Ratio;
    return std::nullopt;
  };
  auto strength = [](growth::Effect e, double v) {
    numeffects::EffectStats s;
    s.distance_r = v;
    s.size_r = v;
    s.ratio_r2 = v;
    return growth::effect_strength(s, e);
  };

  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::FormatError, path.filename().string() + ": " + e.what());
    }
    if (!doc.contains("per_epoch") || !doc["per_epoch"].is_array()) {
      throw Error(ErrorCode::FormatError, path.filename().string() + ": expected an eval-number trajectory");
    }
    for (const char* name : {"distance_r", "size_r", "ratio_r2"}) {
      std::vector<growth::Point> pts;
      for (const auto& row : doc["per_epoch"]) {
        if (!row.contains("epoch") || !row.contains(name) || !row[name].is_number()) {
          throw Error(ErrorCode::FormatError, path.filename().string() + ": row lacks epoch or " + name);
        }
        pts.push_back({row["epoch"].get<double>(), strength(*effect_of(name), row[name].get<double>())});
      }
      out.push_back({growth::Trajectory(name, std::move(pts)), "strength"});
    }
    return out;
  }

  const auto table = growth::read_table(path);
  for (std::size_t c = 1; c < table.columns.size(); ++c) {
    const auto& name = table.columns[c];
    auto traj = table.series(name);
    if (auto e = effect_of(name)) {
      std::vector<growth::Point> pts = traj.points();
      for (auto& p : pts) p.y = strength(*e, p.y);
      out.push_back({growth::Trajectory(name, std::move(pts)), "strength"});
    } else {
      out.push_back({std::move(traj), "identity"});
    }
  }
  return out;
}

int cmd_fit_growth(const std::string& traj_path, const std::string& out_path, std::ostream& out) {
  report::RunConfig cfg{"fit-growth", 0, {{"traj", traj_path}, {"out", out_path}}};
  const auto series = load_series(traj_path);
  json j;
  j["meta"] = cfg.header();
  j["model"] = "y = a * x^b";
  json fits = json::array();
  std::size_t ok = 0;
  std::optional<Error> first_error;
  for (const auto& s : series) {
    json f;
    f["series"] = s.traj.label();
    f["transform"] = s.transform;
    f["n"] = s.traj.size();
    try {
      const auto fit = growth::fit_power(s.traj);
      f["a"] = fit.a;
      f["b"] = fit.b;
      f["r2"] = fit.r2;
      f["iterations"] = fit.iterations;
      ++ok;
    } catch (const Error& e) {
      f["error"] = error_json(e);
      if (!first_error) first_error = e;
    }
    fits.push_back(f);
  }
  j["fits"] = fits;
  report::write_text(out_path, report::dump_json(j));
  if (ok == 0 && first_error) throw *first_error;
  out << "fitted " << ok << " of " << series.size() << " series\n";
  return 0;
}

struct AlignArgs {
  std::string human;
  std::string model;
  std::string out;
  int epochs_per_year = 2;
  double base_age = 5.0;
};

int cmd_align(const AlignArgs& a, std::ostream& out) {
  report::RunConfig cfg{"align", 0, {{"human", a.human}, {"model", a.model}, {"out", a.out},
                                     {"epochs-per-year", std::to_string(a.epochs_per_year)},
                                     {"base-age", report::format_double(a.base_age)}}};
  const auto human = growth::read_table(a.human);
  const auto model = growth::read_table(a.model);
  const EpochAgeMap map{a.epochs_per_year, a.base_age};

  json j;
  j["meta"] = cfg.header();
  j["mapping"] = {{"epochs_per_year", map.epochs_per_year}, {"base_age_years", map.base_age_years}};
  json results = json::array();
  std::size_t ok = 0;
  std::optional<Error> first_error;
  for (std::size_t c = 1; c < human.columns.size(); ++c) {
    const auto& name = human.columns[c];
    if (std::find(model.columns.begin() + 1, model.columns.end(), name) == model.columns.end()) continue;
    json r;
    r["series"] = name;
    try {
      const auto res = growth::align_trajectories(human.series(name), model.series(name), map);
      r["pearson_r"] = res.correlation.r;
      r["p_value"] = res.correlation.p;
      r["n_pairs"] = res.n_pairs;
      r["dropped_human"] = res.dropped_human;
      r["dropped_model"] = res.dropped_model;
      ++ok;
    } catch (const Error& e) {
      r["error"] = error_json(e);
      if (!first_error) first_error = e;
    }
    results.push_back(r);
  }
  if (results.empty()) throw Error(ErrorCode::InsufficientOverlap, "no series shared by the two tables");
  j["series"] = results;
  report::write_text(a.out, report::dump_json(j));
  if (ok == 0 && first_error) throw *first_error;
  out << "aligned " << ok << " of " << results.size() << " series\n";
  return 0;
}

struct OracleArgs {
  double sigma = 0.5;
  int dim = 64;
  std::string epochs = "1:1.0,2:0.5,10:0.1,90:0.0";
  std::uint64_t seed = 0;
  int replicates = 16;
  std::string out;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  report::RunConfig cfg{"oracle", a.seed, {{"sigma", report::format_double(a.sigma)}, {"dim", std::to_string(a.dim)},
                                           {"epochs", a.epochs}, {"replicates", std::to_string(a.replicates)},
                                           {"out", a.out}}};
  oracle::OracleParams params;
  params.sigma = a.sigma;
  params.dim = a.dim;
  params.epochs = oracle::parse_schedule(a.epochs);
  params.seed = a.seed;
  params.replicates = a.replicates;
  oracle::validate(params);

  json dirs = json::array();
  for (const auto& e : params.epochs) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04d", e.epoch);
    write_store(oracle::gen_oracle_store(params, e.epoch), fs::path(a.out) / name);
    dirs.push_back({{"epoch", e.epoch}, {"noise_level", e.noise_level}, {"dir", name}});
  }
  json j;
  j["meta"] = cfg.header();
  j["sigma"] = a.sigma;
  j["dim"] = a.dim;
  j["replicates"] = a.replicates;
  j["stores"] = dirs;
  report::write_text(fs::path(a.out) / "run.json", report::dump_json(j));
  out << "wrote " << params.epochs.size() << " oracle stores to " << a.out << "\n";
  return 0;
}

void print_error(std::ostream& err, std::string_view code, const std::string& detail) {
  std::string d = detail;
  std::replace_if(d.begin(), d.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  err << "ERR\t" << code << "\t" << d << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"devalign: developmental alignment analyses for vision-model embeddings", "devalign"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::tool_version()));

  GenStimuliArgs gen;
  auto* sub_gen = app.add_subcommand("gen-stimuli", "Generate numerosity stimulus set 1-5 as PGM rasters");
  sub_gen->add_option("--set", gen.set, "Stimulus set (1-5)")->required();
  sub_gen->add_option("--out", gen.out, "Output directory")->required();
  sub_gen->add_option("--seed", gen.seed, "RNG seed");
  sub_gen->add_option("--replicates", gen.replicates, "Replicates per cell");

  std::string validate_dir;
  auto* sub_validate = app.add_subcommand("validate-embeddings", "Validate an embedding store directory");
  sub_validate->add_option("dir", validate_dir, "Store directory")->required();

  EvalOddArgs odd;
  auto* sub_odd = app.add_subcommand("eval-odd", "Score the odd-one-out battery");
  sub_odd->add_option("--embeddings", odd.embeddings, "Store with gt-cNN-iK ids")->required();
  sub_odd->add_option("--key", odd.key, "Answer key TSV")->required();
  sub_odd->add_option("--out", odd.out, "Report JSON")->required();

  EvalNumberArgs num;
  auto* sub_num = app.add_subcommand("eval-number", "Distance, size and ratio effects over epochs");
  sub_num->add_option("--embeddings-glob", num.glob, "Glob matching store directories")->required();
  sub_num->add_option("--set", num.set, "Stimulus set");
  sub_num->add_option("--samples", num.samples, "Samples per numerosity pair");
  sub_num->add_option("--seed", num.seed, "Pair sampling seed");
  sub_num->add_option("--out", num.out, "Trajectory JSON (CSV written alongside)")->required();

  MdsArgs mds;
  auto* sub_mds = app.add_subcommand("mds", "1D classical MDS number line per epoch");
  sub_mds->add_option("--embeddings-glob", mds.glob, "Glob matching store directories")->required();
  sub_mds->add_option("--epochs", mds.epochs, "Comma-separated epochs (default: all)");
  sub_mds->add_option("--set", mds.set, "Stimulus set");
  sub_mds->add_option("--samples", mds.samples, "Samples per numerosity pair");
  sub_mds->add_option("--seed", mds.seed, "Pair sampling seed");
  sub_mds->add_option("--out", mds.out, "Lines JSON (CSV written alongside)")->required();

  std::string fit_traj;
  std::string fit_out;
  auto* sub_fit = app.add_subcommand("fit-growth", "Power-function fits to trajectories");
  sub_fit->add_option("--traj", fit_traj, "Trajectory CSV or eval-number JSON")->required();
  sub_fit->add_option("--out", fit_out, "Fit JSON")->required();

  AlignArgs align;
  auto* sub_align = app.add_subcommand("align", "Correlate human and model trajectories");
  sub_align->add_option("--human", align.human, "Human CSV (age,...)")->required();
  sub_align->add_option("--model", align.model, "Model CSV (epoch,...)")->required();
  sub_align->add_option("--out", align.out, "Alignment JSON")->required();
  sub_align->add_option("--epochs-per-year", align.epochs_per_year, "Epochs per year of age");
  sub_align->add_option("--base-age", align.base_age, "Age at epoch 0");

  OracleArgs orc;
  auto* sub_oracle = app.add_subcommand("oracle", "Write synthetic stores with a planted number line");
  sub_oracle->add_option("--sigma", orc.sigma, "Radians per unit of ln n");
  sub_oracle->add_option("--dim", orc.dim, "Embedding dimension");
  sub_oracle->add_option("--epochs", orc.epochs, "Schedule epoch:noise,... (noise in units of sigma)");
  sub_oracle->add_option("--seed", orc.seed, "Seed");
  sub_oracle->add_option("--replicates", orc.replicates, "Stimuli per numerosity");
  sub_oracle->add_option("--out", orc.out, "Output directory")->required();

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("devalign");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << report::tool_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "Usage", e.what());
    return 2;
  }

  try {
    if (*sub_gen) return cmd_gen_stimuli(gen, out);
    if (*sub_validate) return cmd_validate(validate_dir, out);
    if (*sub_odd) return cmd_eval_odd(odd, out);
    if (*sub_num) return cmd_eval_number(num, out);
    if (*sub_mds) return cmd_mds(mds, out);
    if (*sub_fit) return cmd_fit_growth(fit_traj, fit_out, out);
    if (*sub_align) return cmd_align(align, out);
    if (*sub_oracle) return cmd_oracle(orc, out);
  } catch (const Error& e) {
    print_error(err, code_name(e.code()), e.detail());
    return e.code() == ErrorCode::IoFailure ? 1 : 2;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return 1;
  }
  print_error(err, "Usage", "no subcommand");
  return 2;
}

}  // namespace devalign::cli
