#include "sctree/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "sctree/text.hpp"

namespace sctree {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::optional<InferenceMode> parse_inference_mode(std::string_view text) {
  if (text == "aiscp") return InferenceMode::Aiscp;
  if (text == "expert") return InferenceMode::Expert;
  if (text == "fed-ablation") return InferenceMode::FedAblation;
  if (text == "direct") return InferenceMode::Direct;
  return std::nullopt;
}

std::vector<std::string> data_side_phones(const CorrespondenceTable& corrs, const PhoneFeatureTable& table) {
  std::set<std::string> out;
  const auto& inv = table.inventory();
  auto consider = [&](const std::string& p) {
    if (is_null_phone(p) || std::binary_search(inv.begin(), inv.end(), p)) return;
    out.insert(table.canonical(p));
  };
  for (const auto& c : corrs.rows) {
    consider(c.proto);
    for (const auto& r : c.reflexes) {
      if (r) consider(*r);
    }
  }
  return {out.begin(), out.end()};
}

PathSet predict_paths(const PhoneGraph& graph, const CorrespondenceTable& corrs, std::size_t k) {
  PathSet out;
  for (const auto& c : corrs.rows) {
    for (const auto& r : c.distinct_reflexes()) {
      if (r == c.proto) continue;
      auto found = graph.shortest_paths(c.proto, r, k);
      auto& list = out[c.id];
      list.insert(list.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
  }
  return out;
}

PathSet direct_paths(const PhoneFeatureTable& table, const CorrespondenceTable& corrs) {
  PathSet out;
  for (const auto& c : corrs.rows) {
    for (const auto& r : c.distinct_reflexes()) {
      if (r == c.proto) continue;
      const double w = fed(table, c.proto, r);
      out[c.id].push_back(IntermediatePath{{c.proto, r}, {w}, w});
    }
  }
  return out;
}

void reweight_paths(PathSet& paths, const PhoneGraph& graph) {
  for (auto& [id, list] : paths) {
    for (auto& p : list) {
      p.edge_costs.clear();
      p.total_cost = 0.0;
      for (std::size_t e = 0; e < p.edges(); ++e) {
        p.edge_costs.push_back(graph.weight(p.phones[e], p.phones[e + 1]));
        p.total_cost += p.edge_costs.back();
      }
    }
  }
}

CharacterBuild build_characters(const CorrespondenceTable& corrs, const PathSet& paths, MatrixMode mode,
                                std::optional<double> penalty) {
  CharacterBuild out;
  for (const auto& [id, list] : paths) {
    bool known = false;
    for (const auto& c : corrs.rows) known = known || c.id == id;
    if (!known) throw Error("paths refer to correspondence " + std::to_string(id) + ", which is not in the table");
  }
  for (const auto& c : corrs.rows) {
    std::vector<IntermediatePath> list;
    if (auto it = paths.find(c.id); it != paths.end()) list = it->second;
    for (const auto& r : c.distinct_reflexes()) {
      const bool covered = std::any_of(list.begin(), list.end(), [&](const IntermediatePath& p) {
        return p.proto() == c.proto && p.reflex() == r;
      });
      if (covered) continue;
      if (r != c.proto) {
        throw Error("correspondence " + std::to_string(c.id) + ": no path from " + c.proto + " to reflex " + r);
      }
      list.push_back(IntermediatePath{{c.proto}, {}, 0.0});
    }
    auto matrix = build_matrix(c, list, mode, penalty);
    out.matrices.emplace_back(c.id, matrix);
    out.characters.emplace_back(make_sankoff_character(c, corrs.languages, std::move(matrix)));
  }
  return out;
}

std::vector<RunOutcome> run_searches(std::span<const Character> characters,
                                     const std::vector<std::string>& leaves, const SearchParams& params,
                                     std::size_t runs, std::size_t threads, double consensus_threshold,
                                     bool keep_log) {
  if (runs == 0) throw Error("at least one run is required");
  std::vector<RunOutcome> out(runs);
  std::vector<std::string> errors(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        SearchParams p = params;
        p.seed = derive_seed(params.seed, "search", r);
        std::ostringstream log;
        out[r].run = r;
        out[r].search = genetic_search(characters, leaves, p, keep_log ? &log : nullptr);
        out[r].tree = majority_consensus(out[r].search.archive, consensus_threshold);
        out[r].log = log.str();
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, runs);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t r = 0; r < runs; ++r) {
    if (!errors[r].empty()) throw Error("run " + std::to_string(r) + ": " + errors[r]);
  }
  return out;
}

GqdSummary summarize(std::span<const double> values) {
  if (values.empty()) throw Error("nothing to summarize");
  GqdSummary s;
  s.count = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("spearman needs two equal-length samples");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(ra.size());
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(rb.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

namespace {

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string fmt3(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.3f}", v == 0.0 ? 0.0 : v);
}

// Run manifest: configuration, input hashes, seeds, outputs, timing.
class Manifest {
 public:
  explicit Manifest(std::string command) : started_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = json::object();
    doc_["inputs"] = json::object();
    doc_["seeds"] = json::object();
    doc_["outputs"] = json::array();
  }
  void config(const CLI::App& app) {
    for (const auto* opt : app.get_options()) {
      if (opt->get_name() == "--help" || opt->count() == 0) continue;
      const auto results = opt->results();
      std::string value;
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
      doc_["config"][opt->get_name()] = value;
    }
  }
  void input(const fs::path& p) { doc_["inputs"][p.string()] = "fnv1a64:" + hex64(fnv1a64(read_file(p))); }
  void seed(const std::string& name, std::uint64_t value) { doc_["seeds"][name] = value; }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
  json& at(const std::string& key) { return doc_[key]; }

  void write(const fs::path& p) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    doc_["timing"] = {{"finished_utc", stamp}, {"seconds", elapsed}};
    write_file(p, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point started_;
};

// Loads a prior stage's output; format errors name the stage that writes it.
template <class F>
auto from_stage(std::string_view producer, F&& load) {
  try {
    return load();
  } catch (const ParseError& e) {
    throw Error(std::string(e.what()) + " (expected the output of `sctree " + std::string(producer) + "`)");
  }
}

std::string write_text(const fs::path& p, const std::string& text, Manifest& m) {
  write_file(p, text);
  m.output(p);
  return text;
}

std::vector<RootedTree> read_trees(const fs::path& p) {
  const auto text = read_file(p);
  std::vector<RootedTree> out;
  std::size_t start = 0;
  while (true) {
    const auto semi = text.find(';', start);
    if (semi == std::string::npos) {
      if (!trim(std::string_view(text).substr(start)).empty()) {
        throw ParseError(p.string(), 0, "trailing text without ';'");
      }
      break;
    }
    try {
      out.push_back(RootedTree::parse_newick(std::string_view(text).substr(start, semi + 1 - start)));
    } catch (const NewickError& e) {
      throw ParseError(p.string(), 0, fmt::format("tree {}: {}", out.size() + 1, e.what()));
    }
    start = semi + 1;
  }
  if (out.empty()) throw ParseError(p.string(), 0, "no trees");
  return out;
}

std::string gqd_table(const std::string& label, std::span<const double> values) {
  const auto s = summarize(values);
  return fmt::format("label\truns\tmin\tmean\tsd\n{}\t{}\t{}\t{}\t{}\n", label, s.count, fmt3(s.min),
                     fmt3(s.mean), fmt3(s.sd));
}

// --- train ---------------------------------------------------------------

struct TrainOptions {
  fs::path features, changes, out, loss, manifest;
  int depth = 1;
  TrainingConfig cfg;
  std::vector<std::string> excluded{"Altaic"};
};

int cmd_train(const TrainOptions& o, const CLI::App& app) {
  Manifest m("train");
  m.config(app);
  const auto table = load_feature_table(o.features);
  m.input(o.features);
  m.input(o.changes);
  const auto data = load_sound_changes(o.changes, table, o.excluded);
  TrainingConfig cfg = o.cfg;
  cfg.depth = o.depth;
  m.seed("master", cfg.seed);
  m.seed("split", derive_seed(cfg.seed, "split"));
  m.seed("init", derive_seed(cfg.seed, "init"));
  m.seed("batches", derive_seed(cfg.seed, "batches"));
  auto model = [&] {
    try {
      return train(data.records, table, cfg);
    } catch (const TrainingError& e) {
      throw Error(std::string("training failed: ") + e.what());
    }
  }();
  model.save(o.out);
  m.output(o.out);
  std::string loss = "epoch\ttrain_bce\ttest_bce\n";
  for (const auto& e : model.history) {
    loss += fmt::format("{}\t{:.6f}\t{}\n", e.epoch, e.train_bce,
                        e.test_bce ? fmt::format("{:.6f}", *e.test_bce) : std::string("-"));
  }
  const fs::path loss_path = o.loss.empty() ? fs::path(o.out.string() + ".loss.tsv") : o.loss;
  write_text(loss_path, loss, m);
  m.at("records") = {{"used", data.records.size()},
                     {"skipped_unknown", data.skipped_unknown},
                     {"skipped_identity", data.skipped_identity},
                     {"skipped_family", data.skipped_family}};
  m.write(o.manifest.empty() ? fs::path(o.out.string() + ".manifest.json") : o.manifest);
  std::cout << fmt::format("trained depth {} on {} changes; final train BCE {:.6f}\n", o.depth,
                           data.records.size(), model.history.empty() ? 0.0 : model.history.back().train_bce);
  return 0;
}

// --- graph-backed stages --------------------------------------------------

struct GraphOptions {
  fs::path model;
  bool fed_ablation = false;
  std::uint64_t seed = 411;
};

std::optional<FeatureEditModel> load_model(const GraphOptions& g, Manifest& m) {
  if (g.fed_ablation) return std::nullopt;
  m.input(g.model);
  return from_stage("train", [&] { return FeatureEditModel::load(g.model); });
}

PhoneGraph make_graph(const PhoneFeatureTable& table, const std::optional<FeatureEditModel>& model,
                      const CorrespondenceTable& corrs, std::uint64_t seed, Manifest& m) {
  GraphConfig cfg;
  cfg.seed = derive_seed(seed, "graph");
  m.seed("graph", cfg.seed);
  return PhoneGraph::build(table, model ? &*model : nullptr, cfg, data_side_phones(corrs, table));
}

void require_graph_source(const GraphOptions& g) {
  if (g.fed_ablation == !g.model.empty()) throw UsageError("give exactly one of --model and --fed-ablation");
}

struct PathsOptions {
  fs::path features, correspondences, out, expert, manifest;
  GraphOptions graph;
  std::size_t k = 1;
};

int cmd_paths(const PathsOptions& o, const CLI::App& app) {
  require_graph_source(o.graph);
  Manifest m("paths");
  m.config(app);
  const auto table = load_feature_table(o.features);
  m.input(o.features);
  m.input(o.correspondences);
  const auto corrs = load_correspondences(o.correspondences, &table);
  const auto model = load_model(o.graph, m);
  const auto graph = make_graph(table, model, corrs, o.graph.seed, m);
  const auto paths = predict_paths(graph, corrs, o.k);
  std::ostringstream dump;
  write_path_dump(dump, paths);
  write_text(o.out, dump.str(), m);
  const auto stats = path_stats(paths);
  std::string report = fmt::format("avg_num_paths\t{:.3f}\navg_edges_per_path\t{:.3f}\n", stats.avg_num_paths,
                                   stats.avg_edges_per_path);
  m.at("stats") = {{"avg_num_paths", stats.avg_num_paths}, {"avg_edges_per_path", stats.avg_edges_per_path}};
  if (!o.expert.empty()) {
    m.input(o.expert);
    const auto expert = from_stage("paths", [&] { return load_expert_paths(o.expert, table); });
    const double recall = expert_path_recall(paths, expert);
    report += fmt::format("recall\t{:.3f}\n", recall);
    m.at("stats")["recall"] = recall;
  }
  std::cout << report;
  m.write(o.manifest.empty() ? fs::path(o.out.string() + ".manifest.json") : o.manifest);
  return 0;
}

std::string matrices_text(const CharacterBuild& build) {
  std::ostringstream out;
  for (std::size_t i = 0; i < build.matrices.size(); ++i) {
    if (i) out << '\n';
    write_matrix(out, build.matrices[i].first, build.matrices[i].second);
  }
  return out.str();
}

struct MatrixOptions {
  fs::path features, correspondences, paths, out, manifest;
  std::string mode = "unit";
  GraphOptions graph;
  std::optional<double> penalty;
};

int cmd_matrix(const MatrixOptions& o, const CLI::App& app) {
  Manifest m("matrix");
  m.config(app);
  const auto table = load_feature_table(o.features);
  m.input(o.features);
  m.input(o.correspondences);
  m.input(o.paths);
  const auto corrs = load_correspondences(o.correspondences, &table);
  auto paths = from_stage("paths", [&] { return read_path_dump(o.paths, &table); });
  MatrixMode mode = MatrixMode::ExpertUnitEdges;
  if (o.mode == "weighted") {
    require_graph_source(o.graph);
    const auto model = load_model(o.graph, m);
    reweight_paths(paths, make_graph(table, model, corrs, o.graph.seed, m));
    mode = MatrixMode::Weighted;
  }
  const auto build = build_characters(corrs, paths, mode, o.penalty);
  write_text(o.out, matrices_text(build), m);
  m.write(o.manifest.empty() ? fs::path(o.out.string() + ".manifest.json") : o.manifest);
  return 0;
}

// --- inference --------------------------------------------------------------

struct SearchOptions {
  SearchParams params;
  std::size_t runs = 10;
  std::size_t threads = 0;
  double threshold = 0.5;
  bool log = false;
};

struct InferOptions {
  fs::path features, correspondences, model, expert, gold, out, manifest;
  std::string mode;
  std::size_t k = 1;
  std::uint64_t seed = 411;
  SearchOptions search;
};

std::size_t thread_count(const SearchOptions& s) {
  if (s.threads) return s.threads;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Writes per-run trees, archives and the run table; returns run trees.
std::vector<RootedTree> write_runs(const fs::path& dir, const std::vector<RunOutcome>& runs,
                                   const std::optional<RootedTree>& gold, const std::string& label,
                                   Manifest& m) {
  std::string table = "run\tseed\tevaluated\tgenerations\tbest_score\tarchive_size\tgqd\ttree\n";
  std::vector<double> gqds, scores;
  std::vector<RootedTree> trees;
  for (const auto& r : runs) {
    std::string archive;
    for (const auto& t : r.search.archive) archive += t.to_newick() + "\n";
    write_text(dir / fmt::format("run_{:02d}.archive.nwk", r.run), archive, m);
    write_text(dir / fmt::format("run_{:02d}.nwk", r.run), r.tree.to_newick() + "\n", m);
    std::string g = "-";
    if (gold) {
      gqds.push_back(gqd(r.tree, *gold));
      scores.push_back(r.search.best_score);
      g = fmt3(gqds.back());
    }
    table += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", r.run, r.search.seed, r.search.evaluated,
                         r.search.generations, format_cost(r.search.best_score), r.search.archive.size(), g,
                         r.tree.to_newick());
    trees.push_back(r.tree);
    if (!r.log.empty()) std::cerr << "# run " << r.run << '\n' << r.log;
  }
  write_text(dir / "runs.tsv", table, m);
  if (gold) {
    const auto text = gqd_table(label, gqds);
    write_text(dir / "gqd.tsv", text, m);
    std::cout << text;
    const auto s = summarize(gqds);
    m.at("gqd") = {{"min", s.min}, {"mean", s.mean}, {"sd", s.sd}, {"runs", s.count}};
    if (gqds.size() >= 2) {
      const double rho = spearman(scores, gqds);
      write_text(dir / "correlation.tsv", "statistic\tvalue\nspearman_parsimony_gqd\t" + fmt3(rho) + "\n", m);
      m.at("spearman_parsimony_gqd") = std::isnan(rho) ? json(nullptr) : json(rho);
    }
  }
  return trees;
}

int cmd_infer(const InferOptions& o, const CLI::App& app) {
  const auto mode = parse_inference_mode(o.mode);
  if (!mode) throw UsageError("--mode must be one of aiscp, expert, fed-ablation, direct");
  if (*mode == InferenceMode::Aiscp && o.model.empty()) throw UsageError("--mode aiscp needs --model");
  if (*mode == InferenceMode::Expert && o.expert.empty()) throw UsageError("--mode expert needs --expert");
  Manifest m("infer");
  m.config(app);
  const auto table = load_feature_table(o.features);
  m.input(o.features);
  m.input(o.correspondences);
  const auto corrs = load_correspondences(o.correspondences, &table);
  fs::create_directories(o.out);

  PathSet paths;
  MatrixMode matrix_mode = MatrixMode::Weighted;
  switch (*mode) {
    case InferenceMode::Expert:
      m.input(o.expert);
      paths = from_stage("paths", [&] { return load_expert_paths(o.expert, table); });
      matrix_mode = MatrixMode::ExpertUnitEdges;
      break;
    case InferenceMode::Direct:
      paths = direct_paths(table, corrs);
      break;
    case InferenceMode::Aiscp:
    case InferenceMode::FedAblation: {
      GraphOptions g;
      g.model = o.model;
      g.fed_ablation = *mode == InferenceMode::FedAblation;
      g.seed = o.seed;
      const auto model = load_model(g, m);
      paths = predict_paths(make_graph(table, model, corrs, o.seed, m), corrs, o.k);
      break;
    }
  }
  if (*mode != InferenceMode::Expert) {
    std::ostringstream dump;
    write_path_dump(dump, paths);
    write_text(o.out / "paths.tsv", dump.str(), m);
  }
  const auto build = build_characters(corrs, paths, matrix_mode);
  write_text(o.out / "matrices.tsv", matrices_text(build), m);

  SearchParams params = o.search.params;
  params.seed = o.seed;
  m.seed("master", o.seed);
  for (std::size_t r = 0; r < o.search.runs; ++r) {
    m.seed(fmt::format("search_{:02d}", r), derive_seed(o.seed, "search", r));
  }
  std::optional<RootedTree> gold;
  if (!o.gold.empty()) {
    m.input(o.gold);
    gold = read_trees(o.gold).front();
  }
  const auto runs = run_searches(build.characters, corrs.languages, params, o.search.runs,
                                 thread_count(o.search), o.search.threshold, o.search.log);
  const auto trees = write_runs(o.out, runs, gold, o.mode, m);
  write_text(o.out / "consensus.nwk", majority_consensus(trees, o.search.threshold).to_newick() + "\n", m);
  m.write(o.manifest.empty() ? o.out / "manifest.json" : o.manifest);
  return 0;
}

// --- trees ------------------------------------------------------------------

struct ConsensusOptions {
  std::vector<fs::path> trees;
  fs::path out;
  double threshold = 0.5;
};

int cmd_consensus(const ConsensusOptions& o) {
  std::vector<RootedTree> all;
  for (const auto& p : o.trees) {
    auto t = from_stage("infer", [&] { return read_trees(p); });
    all.insert(all.end(), t.begin(), t.end());
  }
  const auto text = majority_consensus(all, o.threshold).to_newick() + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
  return 0;
}

struct GqdOptions {
  fs::path gold, out;
  std::vector<fs::path> hyp;
  std::string label;
};

int cmd_gqd(const GqdOptions& o) {
  const auto gold = from_stage("infer", [&] { return read_trees(o.gold); }).front();
  std::vector<double> values;
  for (const auto& p : o.hyp) {
    for (const auto& t : from_stage("infer", [&] { return read_trees(p); })) values.push_back(gqd(t, gold));
  }
  const auto text = gqd_table(o.label.empty() ? o.hyp.front().stem().string() : o.label, values);
  std::cout << text;
  if (!o.out.empty()) write_file(o.out, text);
  return 0;
}

int cmd_render(const fs::path& tree) {
  for (const auto& t : read_trees(tree)) std::cout << t.render_ascii();
  return 0;
}

// --- induction and baselines ---------------------------------------------------

struct AsliOptions {
  fs::path features, cognates, out, manifest;
  std::string generalization = "set";
  std::string accuracy = "pooled";
  InductionConfig cfg;
};

int cmd_asli(const AsliOptions& o, const CLI::App& app) {
  InductionConfig cfg = o.cfg;
  cfg.generalization = o.generalization == "class" ? GeneralizationMode::FeatureClass : GeneralizationMode::Set;
  cfg.accuracy = o.accuracy == "per-language" ? AccuracyMode::PerLanguage : AccuracyMode::Pooled;
  Manifest m("asli");
  m.config(app);
  const auto table = load_feature_table(o.features);
  m.input(o.features);
  m.input(o.cognates);
  const auto load = load_cognates(o.cognates, table);
  for (const auto& w : load.warnings) std::cerr << "warning: " << w << '\n';
  const auto corpus = align_corpus(load.entries, table);
  for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << '\n';
  fs::create_directories(o.out);

  std::string aligned = "cogid\tlanguage\tproto\tdaughter\tcost\n";
  for (const auto& f : corpus.forms) {
    std::vector<std::string> ps, ds;
    for (const auto& c : f.alignment.columns) {
      ps.push_back(c.proto);
      ds.push_back(c.daughter);
    }
    aligned += fmt::format("{}\t{}\t{}\t{}\t{}\n", f.cogid, f.language, fmt::join(ps, " "), fmt::join(ds, " "),
                           format_cost(f.alignment.total_cost));
  }
  write_text(o.out / "alignments.tsv", aligned, m);

  const auto laws = induce_sound_laws(corpus, table, cfg);
  std::ostringstream dump;
  write_law_dump(dump, laws, &table);
  write_text(o.out / "laws.tsv", dump.str(), m);

  std::ostringstream corr;
  write_correspondences(corr, export_correspondences(laws, corpus, table));
  write_text(o.out / "correspondences.tsv", corr.str(), m);
  std::ostringstream inn;
  write_binary_matrix(inn, shared_innovation_matrix(laws, corpus.languages));
  write_text(o.out / "shared_innovations.tsv", inn.str(), m);
  std::ostringstream cog;
  write_binary_matrix(cog, cognacy_matrix(load.entries));
  write_text(o.out / "cognacy.tsv", cog.str(), m);

  std::map<std::size_t, std::size_t> spread;
  for (const auto& l : laws) ++spread[l.languages().size()];
  std::cout << fmt::format("{} laws over {} languages\nlanguages_per_law\tlaws\n", laws.size(),
                           corpus.languages.size());
  for (const auto& [k, v] : spread) std::cout << k << '\t' << v << '\n';
  m.at("laws") = laws.size();
  m.write(o.manifest.empty() ? o.out / "manifest.json" : o.manifest);
  return 0;
}

struct BaselineOptions {
  std::string kind;
  fs::path matrix, gold, out, manifest;
  std::uint64_t seed = 411;
  SearchOptions search;
};

int cmd_baseline(const BaselineOptions& o, const CLI::App& app) {
  Manifest m("baseline");
  m.config(app);
  m.input(o.matrix);
  const auto matrix = from_stage("asli", [&] { return read_binary_matrix(o.matrix); });
  if (matrix.characters.empty()) throw Error("binary matrix has no characters");
  std::vector<Character> chars(matrix.characters.begin(), matrix.characters.end());
  fs::create_directories(o.out);
  SearchParams params = o.search.params;
  params.seed = o.seed;
  m.seed("master", o.seed);
  for (std::size_t r = 0; r < o.search.runs; ++r) {
    m.seed(fmt::format("search_{:02d}", r), derive_seed(o.seed, "search", r));
  }
  std::optional<RootedTree> gold;
  if (!o.gold.empty()) {
    m.input(o.gold);
    gold = read_trees(o.gold).front();
  }
  const auto runs = run_searches(chars, matrix.languages, params, o.search.runs, thread_count(o.search),
                                 o.search.threshold, o.search.log);
  const auto trees = write_runs(o.out, runs, gold, o.kind, m);
  write_text(o.out / "baseline.nwk", majority_consensus(trees, o.search.threshold).to_newick() + "\n", m);
  m.write(o.manifest.empty() ? o.out / "manifest.json" : o.manifest);
  return 0;
}

// --- argument handling --------------------------------------------------------

void add_search_options(CLI::App* sub, SearchOptions& s, std::size_t default_runs) {
  s.runs = default_runs;
  sub->add_option("--runs", s.runs, "independent searches")->check(CLI::PositiveNumber);
  sub->add_option("--budget", s.params.budget, "trees scored per search")->check(CLI::PositiveNumber);
  sub->add_option("--population", s.params.population)->check(CLI::PositiveNumber);
  sub->add_option("--elite", s.params.elite)->check(CLI::PositiveNumber);
  sub->add_option("--exploration", s.params.exploration, "share of fresh random trees")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--threads", s.threads, "worker threads (0 = all cores)");
  sub->add_option("--consensus-threshold", s.threshold)->check(CLI::Range(0.5, 0.999999));
  sub->add_flag("--log", s.log, "per-generation best score on stderr");
}

// Splices `key = value` lines from --config in right after the subcommand so
// that explicit flags, which come later, take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  std::vector<std::string> injected;
  std::vector<std::string> lines;
  try {
    lines = read_lines(*config);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(fmt::format("{}:{}: expected key = value", *config, n + 1));
    }
    injected.push_back(fmt::format("--{}={}", trim(line.substr(0, eq)), trim(line.substr(eq + 1))));
  }
  auto pos = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (pos != rest.end()) ++pos;
  rest.insert(pos, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw) {
  CLI::App app{"Sound-change-based phylogenetic inference"};
  app.name("sctree");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "key = value file; explicit flags override it");

  TrainOptions train_o;
  auto* train_c = app.add_subcommand("train", "fit the feature-change network");
  train_c->add_option("--features", train_o.features)->required()->check(CLI::ExistingFile);
  train_c->add_option("--changes", train_o.changes)->required()->check(CLI::ExistingFile);
  train_c->add_option("--depth", train_o.depth, "1, 4, 8 or 16")->check(CLI::IsMember({1, 4, 8, 16}));
  train_c->add_option("--seed", train_o.cfg.seed);
  train_c->add_option("--epochs", train_o.cfg.epochs)->check(CLI::PositiveNumber);
  train_c->add_option("--batch-size", train_o.cfg.batch_size)->check(CLI::PositiveNumber);
  train_c->add_option("--learning-rate", train_o.cfg.learning_rate)->check(CLI::PositiveNumber);
  train_c->add_option("--train-fraction", train_o.cfg.train_fraction)->check(CLI::Range(0.0, 1.0));
  train_c->add_option("--exclude-family", train_o.excluded);
  train_c->add_option("--out", train_o.out, "model file")->required();
  train_c->add_option("--loss", train_o.loss, "loss curve TSV (default <out>.loss.tsv)");
  train_c->add_option("--manifest", train_o.manifest);

  PathsOptions paths_o;
  auto* paths_c = app.add_subcommand("paths", "predict intermediate sound-change paths");
  paths_c->add_option("--features", paths_o.features)->required()->check(CLI::ExistingFile);
  paths_c->add_option("--correspondences", paths_o.correspondences)->required()->check(CLI::ExistingFile);
  paths_c->add_option("--model", paths_o.graph.model)->check(CLI::ExistingFile);
  paths_c->add_flag("--fed-ablation", paths_o.graph.fed_ablation, "unweighted feature edit distance graph");
  paths_c->add_option("--k", paths_o.k, "paths per proto/reflex pair")->check(CLI::PositiveNumber);
  paths_c->add_option("--seed", paths_o.graph.seed);
  paths_c->add_option("--expert", paths_o.expert, "expert paths, for recall")->check(CLI::ExistingFile);
  paths_c->add_option("--out", paths_o.out)->required();
  paths_c->add_option("--manifest", paths_o.manifest);

  MatrixOptions matrix_o;
  std::optional<double> penalty;
  auto* matrix_c = app.add_subcommand("matrix", "build per-correspondence transition matrices");
  matrix_c->add_option("--features", matrix_o.features)->required()->check(CLI::ExistingFile);
  matrix_c->add_option("--correspondences", matrix_o.correspondences)->required()->check(CLI::ExistingFile);
  matrix_c->add_option("--paths", matrix_o.paths)->required()->check(CLI::ExistingFile);
  matrix_c->add_option("--mode", matrix_o.mode)->check(CLI::IsMember({"unit", "weighted"}));
  matrix_c->add_option("--model", matrix_o.graph.model)->check(CLI::ExistingFile);
  matrix_c->add_flag("--fed-ablation", matrix_o.graph.fed_ablation);
  matrix_c->add_option("--seed", matrix_o.graph.seed);
  matrix_c->add_option("--penalty", penalty, "cost of disconnected pairs")->check(CLI::PositiveNumber);
  matrix_c->add_option("--out", matrix_o.out)->required();
  matrix_c->add_option("--manifest", matrix_o.manifest);

  InferOptions infer_o;
  auto* infer_c = app.add_subcommand("infer", "search for the most parsimonious trees");
  infer_c->add_option("--features", infer_o.features)->required()->check(CLI::ExistingFile);
  infer_c->add_option("--correspondences", infer_o.correspondences)->required()->check(CLI::ExistingFile);
  infer_c->add_option("--mode", infer_o.mode)
      ->required()
      ->check(CLI::IsMember({"aiscp", "expert", "fed-ablation", "direct"}));
  infer_c->add_option("--model", infer_o.model)->check(CLI::ExistingFile);
  infer_c->add_option("--expert", infer_o.expert, "expert paths (expert mode)")->check(CLI::ExistingFile);
  infer_c->add_option("--k", infer_o.k)->check(CLI::PositiveNumber);
  infer_c->add_option("--seed", infer_o.seed);
  infer_c->add_option("--gold", infer_o.gold)->check(CLI::ExistingFile);
  infer_c->add_option("--out", infer_o.out, "output directory")->required();
  infer_c->add_option("--manifest", infer_o.manifest);
  add_search_options(infer_c, infer_o.search, 10);

  ConsensusOptions cons_o;
  auto* cons_c = app.add_subcommand("consensus", "majority-rule consensus of Newick trees");
  cons_c->add_option("--trees", cons_o.trees)->required()->check(CLI::ExistingFile)->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  cons_c->add_option("--threshold", cons_o.threshold)->check(CLI::Range(0.5, 0.999999));
  cons_c->add_option("--out", cons_o.out);

  GqdOptions gqd_o;
  auto* gqd_c = app.add_subcommand("gqd", "generalized quartet distance to a gold tree");
  gqd_c->add_option("--gold", gqd_o.gold)->required()->check(CLI::ExistingFile);
  gqd_c->add_option("--hyp", gqd_o.hyp)->required()->check(CLI::ExistingFile)->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  gqd_c->add_option("--label", gqd_o.label);
  gqd_c->add_option("--out", gqd_o.out);

  fs::path render_tree;
  auto* render_c = app.add_subcommand("render", "print trees as an indented outline");
  render_c->add_option("--tree", render_tree)->required()->check(CLI::ExistingFile);

  AsliOptions asli_o;
  auto* asli_c = app.add_subcommand("asli", "induce sound laws from aligned cognates");
  asli_c->add_option("--features", asli_o.features)->required()->check(CLI::ExistingFile);
  asli_c->add_option("--cognates", asli_o.cognates)->required()->check(CLI::ExistingFile);
  asli_c->add_option("--generalization", asli_o.generalization)->check(CLI::IsMember({"set", "class"}));
  asli_c->add_option("--accuracy", asli_o.accuracy)->check(CLI::IsMember({"pooled", "per-language"}));
  asli_c->add_option("--threshold", asli_o.cfg.threshold)->check(CLI::Range(0.0, 1.0));
  asli_c->add_option("--max-rounds", asli_o.cfg.max_rounds)->check(CLI::PositiveNumber);
  asli_c->add_option("--max-set-size", asli_o.cfg.max_set_size, "largest context phone set (0 = no limit)");
  asli_c->add_option("--out", asli_o.out, "output directory")->required();
  asli_c->add_option("--manifest", asli_o.manifest);

  BaselineOptions base_o;
  auto* base_c = app.add_subcommand("baseline", "binary-character parsimony baseline");
  base_c->add_option("--kind", base_o.kind)->required()->check(CLI::IsMember({"cognacy", "innovations"}));
  base_c->add_option("--matrix", base_o.matrix, "binary matrix TSV")->required()->check(CLI::ExistingFile);
  base_c->add_option("--seed", base_o.seed);
  base_c->add_option("--gold", base_o.gold)->check(CLI::ExistingFile);
  base_c->add_option("--out", base_o.out, "output directory")->required();
  base_c->add_option("--manifest", base_o.manifest);
  add_search_options(base_c, base_o.search, 1);

  try {
    auto args = expand_config(raw);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train_c) return cmd_train(train_o, *train_c);
    if (*paths_c) return cmd_paths(paths_o, *paths_c);
    if (*matrix_c) {
      matrix_o.penalty = penalty;
      return cmd_matrix(matrix_o, *matrix_c);
    }
    if (*infer_c) return cmd_infer(infer_o, *infer_c);
    if (*cons_c) return cmd_consensus(cons_o);
    if (*gqd_c) return cmd_gqd(gqd_o);
    if (*render_c) return cmd_render(render_tree);
    if (*asli_c) return cmd_asli(asli_o, *asli_c);
    if (*base_c) return cmd_baseline(base_o, *base_c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace sctree
