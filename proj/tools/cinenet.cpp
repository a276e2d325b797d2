#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "cinenet/cinenet.hpp"

namespace fs = std::filesystem;
using namespace cinenet;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string seed_override;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "flat key=value config file");
  sub->add_option("--out", args.out_dir,
                  "run directory (default: runs/<cmd>-<timestamp>-seed<seed>)");
  sub->add_option("--seed", args.seed_override, "seed, overriding the config file");
  sub->add_option("--threads", args.threads, "worker thread cap; 1 keeps runs byte-reproducible")
      ->check(CLI::PositiveNumber);
}

RunConfig open_config(const CommonArgs& a) {
  RunConfig cfg = a.config_path.empty() ? RunConfig() : RunConfig::from_file(a.config_path);
  if (!a.seed_override.empty()) cfg.override_value("seed", a.seed_override);
  return cfg;
}

std::string make_run_dir(const CommonArgs& a, const std::string& sub, uint64_t seed) {
  std::string dir = a.out_dir;
  if (dir.empty()) {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
    std::string base = "runs/" + sub + "-" + stamp + "-seed" + std::to_string(seed);
    dir = base;
    for (int k = 2; fs::exists(dir); ++k) dir = base + "-" + std::to_string(k);
  }
  fs::create_directories(dir);
  return dir;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ComputeError("cannot write " + path);
  out << content;
}

SynthConfig read_synth(RunConfig& cfg, uint64_t seed) {
  SynthConfig s;
  s.seed = seed;
  s.n_actors = static_cast<int>(cfg.get_ll("synth.n_actors", s.n_actors));
  s.n_directors = static_cast<int>(cfg.get_ll("synth.n_directors", s.n_directors));
  s.n_casting_directors =
      static_cast<int>(cfg.get_ll("synth.n_casting_directors", s.n_casting_directors));
  s.n_writers = static_cast<int>(cfg.get_ll("synth.n_writers", s.n_writers));
  s.n_agents = static_cast<int>(cfg.get_ll("synth.n_agents", s.n_agents));
  s.n_titles = static_cast<int>(cfg.get_ll("synth.n_titles", s.n_titles));
  s.actors_per_title_min =
      static_cast<int>(cfg.get_ll("synth.actors_per_title_min", s.actors_per_title_min));
  s.actors_per_title_max =
      static_cast<int>(cfg.get_ll("synth.actors_per_title_max", s.actors_per_title_max));
  s.skill_weights.w_director = cfg.get_double("synth.w_director", s.skill_weights.w_director);
  s.skill_weights.w_casting = cfg.get_double("synth.w_casting", s.skill_weights.w_casting);
  s.skill_weights.w_actor = cfg.get_double("synth.w_actor", s.skill_weights.w_actor);
  s.skill_weights.w_writer = cfg.get_double("synth.w_writer", s.skill_weights.w_writer);
  s.noise_sigma = cfg.get_double("synth.noise_sigma", s.noise_sigma);
  s.popularity_exponent = cfg.get_double("synth.popularity_exponent", s.popularity_exponent);
  s.validate();
  return s;
}

FireConfig read_fire(RunConfig& cfg, uint64_t seed) {
  FireConfig f;
  f.seed = seed;
  f.n_seed_actors = static_cast<int>(cfg.get_ll("fire.n_seed_actors", f.n_seed_actors));
  f.p_burn = cfg.get_double("fire.p_burn", f.p_burn);
  long long budget = cfg.get_ll("fire.node_budget", -1);
  f.node_budget = budget < 0 ? SIZE_MAX : static_cast<size_t>(budget);
  return f;
}

WalkConfig read_walk(RunConfig& cfg, uint64_t seed) {
  WalkConfig w;
  w.seed = seed;
  w.p = cfg.get_double("walk.p", 2.0);
  w.q = cfg.get_double("walk.q", 2.0);
  w.walks_per_node = static_cast<int>(cfg.get_ll("walk.walks_per_node", w.walks_per_node));
  w.walk_length = static_cast<int>(cfg.get_ll("walk.walk_length", w.walk_length));
  w.validate();
  return w;
}

EmbedConfig read_embed(RunConfig& cfg, uint64_t seed) {
  EmbedConfig e;
  e.seed = seed;
  e.dim = static_cast<int>(cfg.get_ll("embed.dim", e.dim));
  e.window = static_cast<int>(cfg.get_ll("embed.window", e.window));
  e.negatives_per_positive =
      static_cast<int>(cfg.get_ll("embed.negatives", e.negatives_per_positive));
  e.epochs = static_cast<int>(cfg.get_ll("embed.epochs", e.epochs));
  e.learning_rate = cfg.get_double("embed.learning_rate", e.learning_rate);
  e.hogwild_threads = static_cast<int>(cfg.get_ll("embed.hogwild_threads", e.hogwild_threads));
  e.validate();
  return e;
}

MaxFeatures parse_max_features(const std::string& s, const std::string& key) {
  if (s == "auto") return MaxFeatures::Auto;
  if (s == "all") return MaxFeatures::All;
  if (s == "fraction") return MaxFeatures::Fraction;
  throw ParseError("config key " + key + ": expected auto|all|fraction, got '" + s + "'");
}

TreeParams read_tree(RunConfig& cfg, const std::string& prefix, TreeParams t) {
  t.max_depth = static_cast<int>(cfg.get_ll(prefix + "max_depth", t.max_depth));
  std::string mf =
      cfg.get_string(prefix + "max_features", max_features_name(t.max_features));
  t.max_features = parse_max_features(mf, prefix + "max_features");
  if (t.max_features == MaxFeatures::Fraction)
    t.fraction = cfg.get_double(prefix + "fraction", t.fraction);
  std::string crit = cfg.get_string(prefix + "criterion", "gini");
  if (crit != "gini")
    throw ParseError("config key " + prefix + "criterion: only gini is supported");
  t.min_samples_leaf =
      static_cast<int>(cfg.get_ll(prefix + "min_samples_leaf", t.min_samples_leaf));
  return t;
}

ExperimentConfig read_experiment(RunConfig& cfg, uint64_t seed, bool all_models) {
  ExperimentConfig e;
  e.seed = seed;
  e.model = parse_model_kind(cfg.get_string("model", "gbdt"));
  e.with_sna = cfg.get_bool("with_sna", true);
  std::string am = cfg.get_string("actor_mode", "mean");
  if (am == "mean") {
    e.actor_mode = ActorMode::Mean;
  } else if (am == "concat4") {
    e.actor_mode = ActorMode::Concat4;
  } else {
    throw ParseError("config key actor_mode: expected mean|concat4, got '" + am + "'");
  }
  e.top_k_categories = static_cast<int>(cfg.get_ll("top_k_categories", e.top_k_categories));
  e.smote = cfg.get_bool("smote", true);
  e.smote_k = static_cast<int>(cfg.get_ll("smote.k", e.smote_k));
  e.split_ratio = cfg.get_double("split_ratio", e.split_ratio);
  e.stratified = cfg.get_bool("stratified", true);

  if (all_models || e.model == ModelKind::Tree) {
    TreeParams d;
    d.max_depth = 300;
    d.max_features = MaxFeatures::Auto;
    e.tree = read_tree(cfg, "tree.", d);
  }
  if (all_models || e.model == ModelKind::Forest) {
    e.forest.n_estimators = static_cast<int>(cfg.get_ll("forest.n_estimators", 250));
    e.forest.bootstrap = cfg.get_bool("forest.bootstrap", true);
    TreeParams d;
    d.max_depth = 6;
    d.max_features = MaxFeatures::Auto;
    e.forest.tree = read_tree(cfg, "forest.", d);
  }
  if (all_models || e.model == ModelKind::Gbdt) {
    e.boost.n_iterations = static_cast<int>(cfg.get_ll("gbdt.n_iterations", 200));
    e.boost.depth = static_cast<int>(cfg.get_ll("gbdt.depth", 5));
    e.boost.learning_rate = cfg.get_double("gbdt.learning_rate", 0.05);
    e.boost.l2_leaf_reg = cfg.get_double("gbdt.l2_leaf_reg", 1.0);
  }
  if (all_models || e.model == ModelKind::Mlp) {
    e.mlp.epochs = static_cast<int>(cfg.get_ll("mlp.epochs", 30));
    e.mlp.learning_rate = cfg.get_double("mlp.learning_rate", 0.01);
    e.mlp.batch_size = static_cast<int>(cfg.get_ll("mlp.batch_size", 32));
    e.mlp.dropout_rate = cfg.get_double("mlp.dropout_rate", 0.2);
  }
  e.validate();
  return e;
}

/// Embeddings for experiment subcommands: either loaded from a previous
/// run's CSV or computed in-run and saved next to the reports.
EmbeddingTable prepare_embeddings(RunConfig& cfg, const Catalog& catalog, uint64_t seed,
                                  const std::string& run_dir) {
  std::string file = cfg.get_string("embeddings_file", "");
  if (!file.empty()) return load_embeddings(file);
  WalkConfig w = read_walk(cfg, seed);
  EmbedConfig e = read_embed(cfg, seed);
  CommunityGraph graph = CommunityGraph::build(catalog);
  EmbeddingTable table = embed_pipeline(graph, w, e);
  write_text(run_dir + "/embeddings.csv", embeddings_csv(table));
  return table;
}

std::array<double, kNumBuckets> bucket_shares(const Catalog& c) {
  std::array<double, kNumBuckets> shares{};
  long long n = 0;
  for (const auto& t : c.titles()) {
    shares[static_cast<int>(bucketize(t.imdb_rating))] += 1;
    ++n;
  }
  if (n > 0)
    for (auto& s : shares) s /= static_cast<double>(n);
  return shares;
}

void print_confusion(std::ostream& out, const ExperimentReport& rep) {
  out << "confusion (rows = actual):\n";
  for (int i = 0; i < kNumBuckets; ++i) {
    out << "  " << bucket_name(static_cast<RatingBucket>(i)) << ":";
    for (int j = 0; j < kNumBuckets; ++j) out << " " << rep.confusion[i][j];
    out << "\n";
  }
}

int cmd_synth(const CommonArgs& a) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  SynthConfig sc = read_synth(cfg, seed);
  cfg.reject_unknown();
  std::string dir = make_run_dir(a, "synth", seed);
  auto [catalog, truth] = generate(sc);
  write_catalog(catalog, dir);
  write_text(dir + "/ground_truth.csv", truth.csv());
  write_text(dir + "/effective.cfg", cfg.effective());
  SignalReport sig = planted_signal_check(catalog, truth);
  auto shares = bucket_shares(catalog);
  std::cout << "generated " << catalog.titles().size() << " titles, "
            << catalog.people().size() << " people, " << catalog.credits().size()
            << " credits\n";
  std::cout << "bucket shares:";
  for (int b = 0; b < kNumBuckets; ++b)
    std::cout << " " << bucket_name(static_cast<RatingBucket>(b)) << "="
              << format_double(shares[b]);
  std::cout << "\n" << sig.str();
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_ingest(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  cfg.reject_unknown();
  Catalog catalog = load_catalog_dir(in_dir);
  StatsReport rep = summary_stats(catalog);
  std::string dir = make_run_dir(a, "ingest", seed);
  write_text(dir + "/stats.txt", rep.str());
  write_text(dir + "/effective.cfg", cfg.effective());
  std::cout << rep.str();
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_graph(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  cfg.reject_unknown();
  Catalog catalog = load_catalog_dir(in_dir);
  CommunityGraph g = CommunityGraph::build(catalog);
  std::string dir = make_run_dir(a, "graph", seed);
  write_text(dir + "/nodes.csv", g.nodes_csv());
  write_text(dir + "/edges.csv", g.edges_csv());
  write_text(dir + "/effective.cfg", cfg.effective());
  int by_kind[4] = {0, 0, 0, 0};
  for (const auto& node : g.nodes()) by_kind[static_cast<int>(node.kind)] += 1;
  std::cout << "graph: " << g.n_nodes() << " nodes (" << by_kind[0] << " actors, " << by_kind[1]
            << " directors, " << by_kind[2] << " casting, " << by_kind[3] << " agents), "
            << g.n_edges() << " directed edges\n";
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_sample(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  FireConfig fc = read_fire(cfg, seed);
  cfg.reject_unknown();
  Catalog full = load_catalog_dir(in_dir);
  Catalog reduced = forest_fire_sample(full, fc);
  std::string dir = make_run_dir(a, "sample", seed);
  write_catalog(reduced, dir);
  write_text(dir + "/effective.cfg", cfg.effective());
  auto fs_full = bucket_shares(full);
  auto fs_red = bucket_shares(reduced);
  std::string shares = "bucket,full,reduced\n";
  for (int b = 0; b < kNumBuckets; ++b)
    shares += csv_row({std::string(bucket_name(static_cast<RatingBucket>(b))),
                       format_double(fs_full[b]), format_double(fs_red[b])});
  write_text(dir + "/shares.csv", shares);
  std::cout << "reduced " << full.titles().size() << " -> " << reduced.titles().size()
            << " titles, " << full.people().size() << " -> " << reduced.people().size()
            << " people\n";
  std::cout << "bucket shares (full vs reduced):\n";
  for (int b = 0; b < kNumBuckets; ++b)
    std::cout << "  " << bucket_name(static_cast<RatingBucket>(b)) << ": "
              << format_double(fs_full[b]) << " vs " << format_double(fs_red[b]) << "\n";
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_stats(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  int sample_pairs = static_cast<int>(cfg.get_ll("stats.sample_pairs", 20000));
  cfg.reject_unknown();
  Catalog catalog = load_catalog_dir(in_dir);
  CommunityGraph g = CommunityGraph::build(catalog);
  GraphSummary summary;
  summary.n_nodes = g.n_nodes();
  summary.n_edges = g.n_edges();
  summary.clustering = avg_clustering(g, a.threads);
  summary.avg_path = avg_shortest_path(g, sample_pairs, seed);
  std::string dir = make_run_dir(a, "stats", seed);
  write_text(dir + "/summary.csv", summary_csv(summary));
  write_text(dir + "/stats.csv", stats_csv(g, a.threads));
  write_text(dir + "/effective.cfg", cfg.effective());
  std::cout << "nodes: " << summary.n_nodes << "\nedges: " << summary.n_edges
            << "\navg clustering: " << format_double(summary.clustering)
            << "\navg shortest path: " << format_double(summary.avg_path) << "\n";
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_embed(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  WalkConfig w = read_walk(cfg, seed);
  EmbedConfig e = read_embed(cfg, seed);
  cfg.reject_unknown();
  Catalog catalog = load_catalog_dir(in_dir);
  CommunityGraph g = CommunityGraph::build(catalog);
  EmbeddingTable table = embed_pipeline(g, w, e);
  std::string dir = make_run_dir(a, "embed", seed);
  write_text(dir + "/embeddings.csv", embeddings_csv(table));
  write_text(dir + "/effective.cfg", cfg.effective());
  std::cout << "embedded " << table.node_ids.size() << " nodes into " << table.dim
            << " dimensions (p=" << format_double(table.p) << ", q=" << format_double(table.q)
            << ")\n";
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int run_single_experiment(const CommonArgs& a, const std::string& in_dir, bool with_importance) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  ExperimentConfig e = read_experiment(cfg, seed, false);
  int n_repeats =
      with_importance ? static_cast<int>(cfg.get_ll("importance.n_repeats", 10)) : 0;
  Catalog catalog = load_catalog_dir(in_dir);
  std::string dir = make_run_dir(a, with_importance ? "report" : "train", seed);
  EmbeddingTable table;
  if (e.with_sna) table = prepare_embeddings(cfg, catalog, seed, dir);
  cfg.reject_unknown();
  ExperimentArtifacts artifacts;
  ExperimentReport rep =
      run_experiment(catalog, e.with_sna ? &table : nullptr, e, a.threads, &artifacts);
  write_text(dir + "/report.csv", experiment_report_csv(rep));
  write_text(dir + "/report.md", experiment_report_md(rep));
  save_model_file(*artifacts.model, dir + "/model.txt");
  write_text(dir + "/effective.cfg", cfg.effective());
  std::cout << "accuracy: " << format_double(rep.accuracy) << " (" << rep.n_test
            << " test rows)\n";
  print_confusion(std::cout, rep);
  if (with_importance) {
    auto imps = permutation_importance(*artifacts.model, artifacts.test_X, artifacts.test_y,
                                       artifacts.column_groups, n_repeats,
                                       mix_seed(seed, "importance"));
    write_text(dir + "/importance.csv", importance_csv(imps));
    write_text(dir + "/importance.md", importance_md(imps));
    std::cout << "permutation importance (grouped):\n";
    for (const auto& gi : imps)
      std::cout << "  " << feature_group_name(gi.group) << ": " << format_double(gi.importance)
                << "\n";
  }
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_grid(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  ExperimentConfig e = read_experiment(cfg, seed, false);
  WalkConfig w = read_walk(cfg, seed);
  EmbedConfig emb = read_embed(cfg, seed);
  std::vector<double> p_list = cfg.get_double_list("grid.p_list", "1,2,3,4");
  std::vector<double> q_list = cfg.get_double_list("grid.q_list", "1,2,3,4");
  cfg.reject_unknown();
  Catalog catalog = load_catalog_dir(in_dir);
  GridResult grid = grid_pq(catalog, e, w, emb, p_list, q_list, a.threads);
  std::string dir = make_run_dir(a, "grid", seed);
  write_text(dir + "/report.csv", grid_csv(grid));
  write_text(dir + "/report.md", grid_md(grid));
  write_text(dir + "/effective.cfg", cfg.effective());
  for (const auto& cell : grid.cells)
    std::cout << "p=" << format_double(cell.p) << " q=" << format_double(cell.q)
              << " accuracy=" << format_double(cell.accuracy) << (cell.best ? "  <- best" : "")
              << "\n";
  std::cout << "spread: " << format_double(grid.spread()) << "\n";
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

int cmd_compare(const CommonArgs& a, const std::string& in_dir) {
  RunConfig cfg = open_config(a);
  uint64_t seed = cfg.require_seed();
  ExperimentConfig base = read_experiment(cfg, seed, true);
  Catalog catalog = load_catalog_dir(in_dir);
  std::string dir = make_run_dir(a, "compare", seed);
  EmbeddingTable table = prepare_embeddings(cfg, catalog, seed, dir);
  cfg.reject_unknown();
  CompareResult result = compare_models(catalog, table, base, a.threads);
  write_text(dir + "/report.csv", compare_csv(result));
  write_text(dir + "/report.md", compare_md(result));
  write_text(dir + "/effective.cfg", cfg.effective());
  std::cout << "model      without_sna  with_sna\n";
  for (ModelKind kind : {ModelKind::Gbdt, ModelKind::Forest, ModelKind::Tree, ModelKind::Mlp}) {
    std::string name = model_kind_name(kind);
    name.resize(10, ' ');
    std::cout << name << " " << format_double(result.cell(kind, false)) << "  "
              << format_double(result.cell(kind, true)) << "\n";
  }
  std::cout << "run dir: " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"movie catalog network experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string in_dir;
  int rc = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic catalog with planted signal");
  add_common(synth, args);
  synth->callback([&] { rc = cmd_synth(args); });

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("input", in_dir, "catalog directory (titles.csv, people.csv, credits.csv)")
        ->required();
  };

  auto* ingest = app.add_subcommand("ingest", "validate a catalog and print summary stats");
  add_input(ingest);
  add_common(ingest, args);
  ingest->callback([&] { rc = cmd_ingest(args, in_dir); });

  auto* graph = app.add_subcommand("graph", "build the community graph and export it");
  add_input(graph);
  add_common(graph, args);
  graph->callback([&] { rc = cmd_graph(args, in_dir); });

  auto* sample = app.add_subcommand("sample", "forest-fire reduce a catalog");
  add_input(sample);
  add_common(sample, args);
  sample->callback([&] { rc = cmd_sample(args, in_dir); });

  auto* stats = app.add_subcommand("stats", "network diagnostics for a catalog's graph");
  add_input(stats);
  add_common(stats, args);
  stats->callback([&] { rc = cmd_stats(args, in_dir); });

  auto* embed = app.add_subcommand("embed", "learn node embeddings for a catalog's graph");
  add_input(embed);
  add_common(embed, args);
  embed->callback([&] { rc = cmd_embed(args, in_dir); });

  auto* train = app.add_subcommand("train", "run one experiment and write its report");
  add_input(train);
  add_common(train, args);
  train->callback([&] { rc = run_single_experiment(args, in_dir, false); });

  auto* grid = app.add_subcommand("grid", "p/q embedding grid with one experiment per cell");
  add_input(grid);
  add_common(grid, args);
  grid->callback([&] { rc = cmd_grid(args, in_dir); });

  auto* compare = app.add_subcommand("compare", "all model families with and without SNA");
  add_input(compare);
  add_common(compare, args);
  compare->callback([&] { rc = cmd_compare(args, in_dir); });

  auto* report = app.add_subcommand(
      "report", "experiment report plus grouped permutation importance");
  add_input(report);
  add_common(report, args);
  report->callback([&] { rc = run_single_experiment(args, in_dir, true); });

  auto started = std::chrono::steady_clock::now();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cinenet::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cinenet::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count();
  std::cerr << "done in " << static_cast<long long>(elapsed) << " ms\n";
  return rc;
}
