#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace cinenet;

namespace {

const Catalog& pipeline_catalog() {
  static Catalog cat = [] {
    SynthConfig cfg;
    cfg.n_actors = 120;
    cfg.n_directors = 20;
    cfg.n_casting_directors = 6;
    cfg.n_writers = 30;
    cfg.n_agents = 10;
    cfg.n_titles = 150;
    cfg.seed = 3;
    return generate(cfg).first;
  }();
  return cat;
}

const EmbeddingTable& small_embeddings() {
  static EmbeddingTable table = [] {
    auto g = CommunityGraph::build(pipeline_catalog());
    WalkConfig w;
    w.walks_per_node = 2;
    w.walk_length = 10;
    w.seed = 1;
    EmbedConfig e;
    e.dim = 8;
    e.epochs = 1;
    e.seed = 1;
    return embed_pipeline(g, w, e);
  }();
  return table;
}

ExperimentConfig fast_cfg() {
  ExperimentConfig cfg;
  cfg.model = ModelKind::Gbdt;
  cfg.boost.n_iterations = 20;
  cfg.boost.depth = 3;
  cfg.boost.learning_rate = 0.1;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("stratified split keeps class proportions") {
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) y.push_back(i % 2);
  auto s = split(y, 0.8, true, 1);
  REQUIRE(s.train.size() == 80);
  REQUIRE(s.test.size() == 20);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));
  CHECK(std::is_sorted(s.test.begin(), s.test.end()));

  int train0 = 0, test0 = 0;
  for (int i : s.train) train0 += y[i] == 0;
  for (int i : s.test) test0 += y[i] == 0;
  CHECK(train0 == 40);
  CHECK(test0 == 10);

  std::vector<int> joined = s.train;
  joined.insert(joined.end(), s.test.begin(), s.test.end());
  std::sort(joined.begin(), joined.end());
  std::vector<int> everything(100);
  std::iota(everything.begin(), everything.end(), 0);
  CHECK(joined == everything);  // disjoint and complete

  CHECK(split(y, 0.8, true, 1).train == s.train);
  CHECK(split(y, 0.8, true, 2).train != s.train);

  auto plain = split(y, 0.8, false, 1);
  CHECK(plain.train.size() == 80);
  CHECK(std::is_sorted(plain.train.begin(), plain.train.end()));
}

TEST_CASE("split clamps so every class reaches both folds") {
  std::vector<int> y = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
  for (double ratio : {0.95, 0.05}) {
    auto s = split(y, ratio, true, 7);
    std::set<int> train_classes, test_classes;
    for (int i : s.train) train_classes.insert(y[i]);
    for (int i : s.test) test_classes.insert(y[i]);
    CHECK(train_classes == std::set<int>{0, 1});
    CHECK(test_classes == std::set<int>{0, 1});
  }

  CHECK_THROWS_AS(split({0, 1, 1}, 0.8, true, 1), ValidationError);  // singleton class
  CHECK_THROWS_AS(split({}, 0.8, true, 1), ValidationError);
  CHECK_THROWS_AS(split(y, 0.0, true, 1), ValidationError);
  CHECK_THROWS_AS(split(y, 1.0, true, 1), ValidationError);
}

TEST_CASE("accuracy recounts hits") {
  CHECK(accuracy({0, 1, 1, 2}, {0, 1, 2, 2}) == Catch::Approx(0.75));
  CHECK(accuracy({3}, {3}) == 1.0);
  CHECK_THROWS_AS(accuracy({}, {}), ValidationError);
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), ValidationError);
}

TEST_CASE("run_experiment produces a coherent, reproducible report") {
  const auto& cat = pipeline_catalog();
  const auto& emb = small_embeddings();
  auto cfg = fast_cfg();

  ExperimentArtifacts art;
  auto rep = run_experiment(cat, &emb, cfg, 1, &art);

  CHECK(rep.n_rows == rep.n_train + rep.n_test);
  CHECK(rep.n_train_balanced >= rep.n_train);
  CHECK(rep.accuracy >= 0.0);
  CHECK(rep.accuracy <= 1.0);

  long long confusion_total = 0;
  std::array<long long, kNumBuckets> test_counts{};
  for (int label : art.test_y) test_counts[label] += 1;
  for (int i = 0; i < kNumBuckets; ++i) {
    long long row = 0;
    for (int j = 0; j < kNumBuckets; ++j) row += rep.confusion[i][j];
    CHECK(row == test_counts[i]);
    confusion_total += row;
  }
  CHECK(confusion_total == rep.n_test);

  double share_sum = 0;
  for (double s : rep.class_shares) share_sum += s;
  CHECK(share_sum == Catch::Approx(1.0));

  REQUIRE(art.model != nullptr);
  CHECK(art.test_X.size() == static_cast<size_t>(rep.n_test));
  CHECK(art.column_groups.size() == art.test_X[0].size());
  // accuracy in the report is exactly the artifact model on the artifact fold
  CHECK(accuracy(art.model->predict(art.test_X), art.test_y) == rep.accuracy);

  SECTION("identical inputs give byte-identical reports") {
    auto rep2 = run_experiment(cat, &emb, cfg);
    CHECK(experiment_report_csv(rep2) == experiment_report_csv(rep));
    CHECK(experiment_report_md(rep2) == experiment_report_md(rep));
    auto rep3 = run_experiment(cat, &emb, cfg, 2);
    CHECK(experiment_report_csv(rep3) == experiment_report_csv(rep));
  }
  SECTION("emitters carry the expected shape") {
    auto csv = experiment_report_csv(rep);
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(csv.find("accuracy,") != std::string::npos);
    CHECK(csv.find("config.model,gbdt") != std::string::npos);
    auto md = experiment_report_md(rep);
    CHECK(md.rfind("# Experiment report", 0) == 0);
    CHECK(md.find("## Confusion matrix") != std::string::npos);
  }
}

TEST_CASE("the sna switch controls the feature blocks") {
  const auto& cat = pipeline_catalog();
  const auto& emb = small_embeddings();
  auto cfg = fast_cfg();

  cfg.with_sna = false;
  ExperimentArtifacts plain;
  auto rep = run_experiment(cat, &emb, cfg, 1, &plain);
  for (auto g : plain.column_groups) {
    CHECK(g != FeatureGroup::SnaDirector);
    CHECK(g != FeatureGroup::SnaCasting);
    CHECK(g != FeatureGroup::SnaActor);
  }
  bool echoed = false;
  for (const auto& [k, v] : rep.config_echo)
    if (k == "with_sna") {
      echoed = true;
      CHECK(v == "false");
    }
  CHECK(echoed);

  // dropping the embeddings entirely is fine without sna, fatal with it
  CHECK_NOTHROW(run_experiment(cat, nullptr, cfg));
  cfg.with_sna = true;
  CHECK_THROWS_AS(run_experiment(cat, nullptr, cfg), ValidationError);

  ExperimentArtifacts rich;
  run_experiment(cat, &emb, cfg, 1, &rich);
  CHECK(rich.column_groups.size() == plain.column_groups.size() + 3 * 8);
}

TEST_CASE("permuting a constant group changes nothing") {
  auto [X, y] = testutil::blobs(6, 2, 0.5, 41);
  for (auto& row : X) row.push_back(7.5);  // constant third column
  auto model = DecisionTreeModel::fit(X, y, TreeParams{}, 4);
  std::vector<FeatureGroup> groups = {FeatureGroup::Metadata, FeatureGroup::Metadata,
                                      FeatureGroup::SnaCasting};

  auto imps = permutation_importance(model, X, y, groups, 5, 3);
  REQUIRE(imps.size() == 2);
  CHECK(std::is_sorted(imps.begin(), imps.end(),
                       [](const GroupImportance& a, const GroupImportance& b) {
                         return a.importance > b.importance;
                       }));
  bool found = false;
  for (const auto& gi : imps)
    if (gi.group == FeatureGroup::SnaCasting) {
      found = true;
      CHECK(gi.importance == 0.0);
    }
  CHECK(found);

  auto again = permutation_importance(model, X, y, groups, 5, 3);
  for (size_t i = 0; i < imps.size(); ++i)
    CHECK(imps[i].importance == again[i].importance);

  std::vector<FeatureGroup> absent = {FeatureGroup::SnaDirector};
  CHECK_THROWS_AS(permutation_importance(model, X, y, groups, 5, 3, &absent),
                  ValidationError);
  CHECK_THROWS_AS(permutation_importance(model, X, y, groups, 0, 3), ValidationError);
  CHECK_THROWS_AS(permutation_importance(model, {}, {}, groups, 5, 3), ValidationError);

  auto csv = importance_csv(imps);
  CHECK(csv.rfind("group,importance\n", 0) == 0);
  CHECK(importance_md(imps).rfind("# Grouped permutation importance", 0) == 0);
}

TEST_CASE("a single grid cell reproduces a direct experiment") {
  const auto& cat = pipeline_catalog();
  auto cfg = fast_cfg();
  WalkConfig w;
  w.walks_per_node = 2;
  w.walk_length = 10;
  w.seed = 1;
  EmbedConfig e;
  e.dim = 8;
  e.epochs = 1;
  e.seed = 1;

  auto grid = grid_pq(cat, cfg, w, e, {2}, {0.5});
  REQUIRE(grid.cells.size() == 1);
  CHECK(grid.cells[0].p == 2.0);
  CHECK(grid.cells[0].q == 0.5);
  CHECK(grid.cells[0].best);
  CHECK(grid.spread() == 0.0);

  WalkConfig wd = w;
  wd.p = 2.0;
  wd.q = 0.5;
  auto table = embed_pipeline(CommunityGraph::build(cat), wd, e);
  ExperimentConfig direct = cfg;
  direct.with_sna = true;
  auto rep = run_experiment(cat, &table, direct);
  CHECK(grid.cells[0].accuracy == rep.accuracy);

  auto csv = grid_csv(grid);
  CHECK(csv.rfind("p,q,accuracy,best\n", 0) == 0);
  CHECK(csv.find("2,0.5,") != std::string::npos);
  CHECK(csv.back() == '\n');
  CHECK(grid_md(grid).find("Spread (max - min): 0") != std::string::npos);

  CHECK_THROWS_AS(grid_pq(cat, cfg, w, e, {}, {1}), ValidationError);
}

TEST_CASE("compare_models runs all eight arms") {
  const auto& cat = pipeline_catalog();
  const auto& emb = small_embeddings();
  auto cfg = fast_cfg();
  cfg.mlp.epochs = 5;

  auto result = compare_models(cat, emb, cfg);
  REQUIRE(result.arms.size() == 8);
  std::vector<ModelKind> want_kinds = {ModelKind::Gbdt,   ModelKind::Gbdt,
                                       ModelKind::Forest, ModelKind::Forest,
                                       ModelKind::Tree,   ModelKind::Tree,
                                       ModelKind::Mlp,    ModelKind::Mlp};
  for (size_t i = 0; i < 8; ++i) {
    CHECK(result.arms[i].kind == want_kinds[i]);
    CHECK(result.arms[i].with_sna == (i % 2 == 1));
    CHECK(!result.arms[i].params.empty());
    CHECK(result.arms[i].accuracy >= 0.0);
    CHECK(result.arms[i].accuracy <= 1.0);
  }
  CHECK(result.cell(ModelKind::Tree, true) == result.arms[5].accuracy);
  CHECK_THROWS_AS(CompareResult{}.cell(ModelKind::Tree, true), ComputeError);

  auto csv = compare_csv(result);
  CHECK(csv.rfind("model,without_sna,with_sna\n", 0) == 0);
  CHECK(csv.find("model,arm,param,value\n") != std::string::npos);
  CHECK(csv.find("forest,with_sna,forest.n_estimators,350") != std::string::npos);
  auto md = compare_md(result);
  CHECK(md.rfind("# Model comparison", 0) == 0);
  CHECK(md.find("### gbdt (with SNA)") != std::string::npos);
}

TEST_CASE("run config parses flat key=value text") {
  auto cfg = RunConfig::from_string(
      "# a comment\n"
      "seed = 42\n"
      "model=gbdt\n"
      "\n"
      "smote = off\n"
      "p_list = 1, 2,3.5\n");
  CHECK(cfg.require_seed() == 42);
  CHECK(cfg.get_string("model", "tree") == "gbdt");
  CHECK(cfg.get_bool("smote", true) == false);
  CHECK(cfg.get_double_list("p_list", "1") == std::vector<double>{1.0, 2.0, 3.5});
  CHECK(cfg.get_ll("n_iterations", 200) == 200);  // default consumed
  CHECK_NOTHROW(cfg.reject_unknown());

  auto eff = cfg.effective();
  CHECK(eff.find("seed=42\n") != std::string::npos);
  CHECK(eff.find("n_iterations=200\n") != std::string::npos);  // defaults included
  CHECK(eff.find("smote=off\n") != std::string::npos);

  SECTION("unknown keys are fatal once flagged") {
    auto c2 = RunConfig::from_string("seed=1\nmystery=3\n");
    c2.require_seed();
    CHECK_THROWS_AS(c2.reject_unknown(), ValidationError);
  }
  SECTION("duplicates, bad lines and bad keys are rejected at parse") {
    CHECK_THROWS_AS(RunConfig::from_string("a=1\na=2\n"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_string("just a line\n"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_string("=3\n"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_string("sp ace=3\n"), ParseError);
  }
  SECTION("the seed is mandatory and unsigned") {
    auto none = RunConfig::from_string("model=tree\n");
    CHECK_THROWS_AS(none.require_seed(), ValidationError);
    auto neg = RunConfig::from_string("seed=-4\n");
    CHECK_THROWS_AS(neg.require_seed(), ParseError);
  }
  SECTION("typed getters validate their values") {
    auto c = RunConfig::from_string("x=abc\nb=maybe\nl=1,,2\n");
    CHECK_THROWS_AS(c.get_ll("x", 1), ParseError);
    CHECK_THROWS_AS(c.get_double("x", 1.0), ParseError);
    CHECK_THROWS_AS(c.get_bool("b", true), ParseError);
    CHECK_THROWS_AS(c.get_double_list("l", "1"), ParseError);
  }
  SECTION("overrides land before getters") {
    auto c = RunConfig::from_string("seed=1\n");
    c.override_value("seed", "9");
    CHECK(c.require_seed() == 9);
  }
  SECTION("missing files are reported") {
    CHECK_THROWS_AS(RunConfig::from_file("/nonexistent/run.cfg"), ParseError);
  }
}
