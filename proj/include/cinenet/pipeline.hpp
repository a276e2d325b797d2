#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cinenet/catalog.hpp"
#include "cinenet/common.hpp"
#include "cinenet/features.hpp"
#include "cinenet/graph.hpp"
#include "cinenet/learners.hpp"
#include "cinenet/node2vec.hpp"
#include "cinenet/rng.hpp"
#include "cinenet/smote.hpp"

namespace cinenet {

enum class ModelKind { Tree, Forest, Gbdt, Mlp };

inline std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Gbdt: return "gbdt";
    case ModelKind::Mlp: return "mlp";
  }
  throw ComputeError("model kind out of range");
}

inline ModelKind parse_model_kind(const std::string& name) {
  if (name == "tree") return ModelKind::Tree;
  if (name == "forest") return ModelKind::Forest;
  if (name == "gbdt") return ModelKind::Gbdt;
  if (name == "mlp") return ModelKind::Mlp;
  throw ValidationError("unknown model kind '" + name + "' (expected tree|forest|gbdt|mlp)");
}

struct ExperimentConfig {
  ModelKind model = ModelKind::Gbdt;
  TreeParams tree;
  ForestParams forest;
  BoostParams boost;
  MlpParams mlp;
  bool with_sna = true;
  ActorMode actor_mode = ActorMode::Mean;
  int top_k_categories = 20;
  bool smote = true;
  int smote_k = 5;
  double split_ratio = 0.8;
  bool stratified = true;
  uint64_t seed = 1;

  void validate() const {
    if (!(split_ratio > 0 && split_ratio < 1))
      throw ValidationError("experiment: split_ratio must be in (0,1)");
    if (smote_k < 1) throw ValidationError("experiment: smote_k must be >= 1");
    if (top_k_categories < 1) throw ValidationError("experiment: top_k_categories must be >= 1");
    switch (model) {
      case ModelKind::Tree: tree.validate(); break;
      case ModelKind::Forest: forest.validate(); break;
      case ModelKind::Gbdt: boost.validate(); break;
      case ModelKind::Mlp: mlp.validate(); break;
    }
  }

  /// Every hyperparameter of the active learner plus the experiment-level
  /// switches, as ordered key=value pairs for report echoes.
  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("model", model_kind_name(model));
    kv.emplace_back("with_sna", with_sna ? "true" : "false");
    kv.emplace_back("actor_mode", actor_mode == ActorMode::Mean ? "mean" : "concat4");
    kv.emplace_back("top_k_categories", std::to_string(top_k_categories));
    kv.emplace_back("smote", smote ? "true" : "false");
    kv.emplace_back("smote_k", std::to_string(smote_k));
    kv.emplace_back("split_ratio", format_double(split_ratio));
    kv.emplace_back("stratified", stratified ? "true" : "false");
    kv.emplace_back("seed", std::to_string(seed));
    auto tree_echo = [&](const std::string& prefix, const TreeParams& t) {
      kv.emplace_back(prefix + "max_depth", std::to_string(t.max_depth));
      kv.emplace_back(prefix + "max_features", max_features_name(t.max_features));
      if (t.max_features == MaxFeatures::Fraction)
        kv.emplace_back(prefix + "fraction", format_double(t.fraction));
      kv.emplace_back(prefix + "criterion", "gini");
      kv.emplace_back(prefix + "min_samples_leaf", std::to_string(t.min_samples_leaf));
    };
    switch (model) {
      case ModelKind::Tree:
        tree_echo("tree.", tree);
        break;
      case ModelKind::Forest:
        kv.emplace_back("forest.n_estimators", std::to_string(forest.n_estimators));
        kv.emplace_back("forest.bootstrap", forest.bootstrap ? "true" : "false");
        tree_echo("forest.", forest.tree);
        break;
      case ModelKind::Gbdt:
        kv.emplace_back("gbdt.n_iterations", std::to_string(boost.n_iterations));
        kv.emplace_back("gbdt.depth", std::to_string(boost.depth));
        kv.emplace_back("gbdt.learning_rate", format_double(boost.learning_rate));
        kv.emplace_back("gbdt.l2_leaf_reg", format_double(boost.l2_leaf_reg));
        break;
      case ModelKind::Mlp:
        kv.emplace_back("mlp.epochs", std::to_string(mlp.epochs));
        kv.emplace_back("mlp.learning_rate", format_double(mlp.learning_rate));
        kv.emplace_back("mlp.batch_size", std::to_string(mlp.batch_size));
        kv.emplace_back("mlp.dropout_rate", format_double(mlp.dropout_rate));
        break;
    }
    return kv;
  }
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

/// Stratified hold-out split. Per class, indices are shuffled and the first
/// round(ratio * n_c) go to train, clamped so both folds keep at least one
/// sample of every class. Folds are returned in ascending row order.
inline SplitIndices split(const std::vector<int>& y, double ratio, bool stratified,
                          uint64_t seed) {
  if (y.empty()) throw ValidationError("split: empty dataset");
  if (!(ratio > 0 && ratio < 1)) throw ValidationError("split: ratio must be in (0,1)");
  Rng rng(mix_seed(seed, "split"));
  SplitIndices out;
  if (stratified) {
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(static_cast<int>(i));
    for (auto& [label, members] : by_class) {
      if (members.size() < 2)
        throw ValidationError("split: class " + std::to_string(label) +
                              " has fewer than 2 samples; cannot stratify");
      rng.shuffle(members);
      auto n_train = static_cast<size_t>(std::floor(ratio * members.size() + 0.5));
      n_train = std::clamp(n_train, size_t{1}, members.size() - 1);
      out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
      out.test.insert(out.test.end(), members.begin() + n_train, members.end());
    }
  } else {
    std::vector<int> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    auto n_train = static_cast<size_t>(std::floor(ratio * order.size() + 0.5));
    n_train = std::clamp(n_train, size_t{1}, order.size() - 1);
    out.train.assign(order.begin(), order.begin() + n_train);
    out.test.assign(order.begin() + n_train, order.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
  if (predicted.empty()) throw ValidationError("accuracy: empty input");
  if (predicted.size() != actual.size()) throw ValidationError("accuracy: length mismatch");
  size_t hits = 0;
  for (size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == actual[i]) ++hits;
  return static_cast<double>(hits) / predicted.size();
}

struct ExperimentReport {
  double accuracy = 0;
  std::array<double, kNumBuckets> precision{};
  std::array<double, kNumBuckets> recall{};
  std::array<std::array<long long, kNumBuckets>, kNumBuckets> confusion{};
  std::array<double, kNumBuckets> class_shares{};
  long long n_rows = 0;
  long long n_train = 0;
  long long n_train_balanced = 0;
  long long n_test = 0;
  long long dropped_titles = 0;
  long long imputed_train_cells = 0;
  long long imputed_test_cells = 0;
  long long missing_embedding_nodes = 0;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> config_echo;
  double wall_time_ms = 0;
};

namespace detail {

struct Fold {
  Matrix X;
  std::vector<int> y;
  std::vector<std::vector<char>> missing;
};

inline Fold take_fold(const Dataset& ds, const std::vector<int>& idx) {
  Fold f;
  f.X.reserve(idx.size());
  f.y.reserve(idx.size());
  f.missing.reserve(idx.size());
  for (int i : idx) {
    f.X.push_back(ds.X[i]);
    f.y.push_back(ds.y[i]);
    f.missing.push_back(ds.missing[i]);
  }
  return f;
}

/// Fills masked cells in both folds with per-column means of the unmasked
/// train cells. Columns with no observed train value fall back to 0.
inline std::pair<long long, long long> impute_train_means(Fold& train, Fold& test) {
  if (train.X.empty()) return {0, 0};
  size_t width = train.X[0].size();
  std::vector<double> mean(width, 0.0);
  std::vector<long long> seen(width, 0);
  for (size_t i = 0; i < train.X.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      if (!train.missing[i][j]) {
        mean[j] += train.X[i][j];
        seen[j] += 1;
      }
  for (size_t j = 0; j < width; ++j) mean[j] = seen[j] > 0 ? mean[j] / seen[j] : 0.0;
  long long filled_train = 0, filled_test = 0;
  for (size_t i = 0; i < train.X.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      if (train.missing[i][j]) {
        train.X[i][j] = mean[j];
        ++filled_train;
      }
  for (size_t i = 0; i < test.X.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      if (test.missing[i][j]) {
        test.X[i][j] = mean[j];
        ++filled_test;
      }
  return {filled_train, filled_test};
}

/// Standardizes both folds with the train fold's column statistics.
/// Constant columns keep their centered value (scale treated as 1).
inline void standardize(Matrix& train, Matrix& test) {
  if (train.empty()) return;
  size_t width = train[0].size();
  std::vector<double> mean(width, 0.0), var(width, 0.0);
  for (const auto& row : train)
    for (size_t j = 0; j < width; ++j) mean[j] += row[j];
  for (auto& m : mean) m /= train.size();
  for (const auto& row : train)
    for (size_t j = 0; j < width; ++j) {
      double d = row[j] - mean[j];
      var[j] += d * d;
    }
  std::vector<double> scale(width);
  for (size_t j = 0; j < width; ++j) {
    double sd = std::sqrt(var[j] / train.size());
    scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  auto apply = [&](Matrix& m) {
    for (auto& row : m)
      for (size_t j = 0; j < width; ++j) row[j] = (row[j] - mean[j]) / scale[j];
  };
  apply(train);
  apply(test);
}

inline ModelPtr train_model(const ExperimentConfig& cfg, const Matrix& X,
                            const std::vector<int>& y, int n_threads) {
  switch (cfg.model) {
    case ModelKind::Tree: {
      TreeParams p = cfg.tree;
      p.seed = mix_seed(cfg.seed, "learner");
      return train_tree(X, y, p, kNumBuckets);
    }
    case ModelKind::Forest: {
      ForestParams p = cfg.forest;
      p.seed = mix_seed(cfg.seed, "learner");
      return train_forest(X, y, p, kNumBuckets, n_threads);
    }
    case ModelKind::Gbdt: {
      BoostParams p = cfg.boost;
      p.seed = mix_seed(cfg.seed, "learner");
      return train_gbdt(X, y, p, kNumBuckets, n_threads);
    }
    case ModelKind::Mlp: {
      MlpParams p = cfg.mlp;
      p.seed = mix_seed(cfg.seed, "learner");
      return train_mlp(X, y, p, kNumBuckets);
    }
  }
  throw ComputeError("model kind out of range");
}

}  // namespace detail

/// Trained model plus the processed test fold, for callers that go on to
/// save the model or compute permutation importance.
struct ExperimentArtifacts {
  ModelPtr model;
  Matrix test_X;
  std::vector<int> test_y;
  std::vector<FeatureGroup> column_groups;
};

/// Full experiment on one catalog: assemble features, split, impute missing
/// cells with train means, balance the train fold with SMOTE, standardize for
/// the MLP, train, and score the untouched test fold.
inline ExperimentReport run_experiment(const Catalog& catalog, const EmbeddingTable* embeddings,
                                       const ExperimentConfig& cfg, int n_threads = 1,
                                       ExperimentArtifacts* artifacts = nullptr) {
  cfg.validate();
  if (cfg.with_sna && embeddings == nullptr)
    throw ValidationError("experiment: with_sna requires embeddings");

  Dataset ds = assemble(catalog, cfg.with_sna ? embeddings : nullptr, cfg.actor_mode,
                        cfg.top_k_categories);
  ExperimentReport rep;
  rep.n_rows = static_cast<long long>(ds.n_rows());
  rep.dropped_titles = ds.dropped_titles;
  rep.missing_embedding_nodes = ds.missing_embedding_nodes;
  for (int label : ds.y) rep.class_shares[label] += 1;
  for (auto& s : rep.class_shares) s /= static_cast<double>(ds.n_rows());

  SplitIndices idx = split(ds.y, cfg.split_ratio, cfg.stratified, cfg.seed);
  detail::Fold train = detail::take_fold(ds, idx.train);
  detail::Fold test = detail::take_fold(ds, idx.test);
  rep.n_train = static_cast<long long>(train.X.size());
  rep.n_test = static_cast<long long>(test.X.size());

  auto [fill_train, fill_test] = detail::impute_train_means(train, test);
  rep.imputed_train_cells = fill_train;
  rep.imputed_test_cells = fill_test;

  if (cfg.smote) {
    SmoteConfig sc;
    sc.k_neighbors = cfg.smote_k;
    sc.seed = mix_seed(cfg.seed, "smote");
    SmoteResult balanced = smote_balance(train.X, train.y, sc);
    train.X = std::move(balanced.X);
    train.y = std::move(balanced.y);
    for (auto& note : balanced.notes) rep.notes.push_back(note);
  }
  rep.n_train_balanced = static_cast<long long>(train.X.size());

  if (cfg.model == ModelKind::Mlp) detail::standardize(train.X, test.X);

  ModelPtr model = detail::train_model(cfg, train.X, train.y, n_threads);
  std::vector<int> predicted = model->predict(test.X);
  rep.accuracy = accuracy(predicted, test.y);
  for (size_t i = 0; i < predicted.size(); ++i) rep.confusion[test.y[i]][predicted[i]] += 1;
  for (int c = 0; c < kNumBuckets; ++c) {
    long long row = 0, col = 0;
    for (int j = 0; j < kNumBuckets; ++j) {
      row += rep.confusion[c][j];
      col += rep.confusion[j][c];
    }
    rep.recall[c] = row > 0 ? static_cast<double>(rep.confusion[c][c]) / row : 0.0;
    rep.precision[c] = col > 0 ? static_cast<double>(rep.confusion[c][c]) / col : 0.0;
  }
  rep.config_echo = cfg.echo();
  if (artifacts != nullptr) {
    artifacts->model = std::move(model);
    artifacts->test_X = std::move(test.X);
    artifacts->test_y = std::move(test.y);
    artifacts->column_groups = ds.feature_groups;
  }
  return rep;
}

/// Grouped permutation importance on a held-out fold: baseline accuracy minus
/// the mean accuracy after jointly permuting the group's columns, averaged
/// over n_repeats shuffles. Results are ranked by descending importance.
struct GroupImportance {
  FeatureGroup group;
  double importance = 0;
};

inline std::vector<GroupImportance> permutation_importance(
    const Model& model, const Matrix& X, const std::vector<int>& y,
    const std::vector<FeatureGroup>& column_groups, int n_repeats, uint64_t seed,
    const std::vector<FeatureGroup>* requested = nullptr) {
  if (X.empty()) throw ValidationError("importance: empty test set");
  if (X.size() != y.size()) throw ValidationError("importance: X and y length mismatch");
  if (n_repeats < 1) throw ValidationError("importance: n_repeats must be >= 1");
  if (X[0].size() != column_groups.size())
    throw ValidationError("importance: column_groups width mismatch");

  std::vector<FeatureGroup> groups;
  if (requested != nullptr) {
    groups = *requested;
  } else {
    for (int g = 0; g < 5; ++g) {
      auto fg = static_cast<FeatureGroup>(g);
      if (std::find(column_groups.begin(), column_groups.end(), fg) != column_groups.end())
        groups.push_back(fg);
    }
  }

  std::vector<int> predicted = model.predict(X);
  double baseline = accuracy(predicted, y);

  std::vector<GroupImportance> out;
  Matrix shuffled;
  std::vector<size_t> perm(X.size());
  for (FeatureGroup fg : groups) {
    std::vector<size_t> cols;
    for (size_t j = 0; j < column_groups.size(); ++j)
      if (column_groups[j] == fg) cols.push_back(j);
    if (cols.empty())
      throw ValidationError("importance: unknown group " +
                            std::string(feature_group_name(fg)));
    double mean_acc = 0;
    for (int rep = 0; rep < n_repeats; ++rep) {
      Rng rng(mix_seed(mix_seed(seed, "perm"),
                       static_cast<uint64_t>(fg) * 1000003ull + static_cast<uint64_t>(rep)));
      std::iota(perm.begin(), perm.end(), size_t{0});
      rng.shuffle(perm);
      shuffled = X;
      for (size_t i = 0; i < X.size(); ++i)
        for (size_t j : cols) shuffled[i][j] = X[perm[i]][j];
      mean_acc += accuracy(model.predict(shuffled), y);
    }
    mean_acc /= n_repeats;
    out.push_back({fg, baseline - mean_acc});
  }
  std::stable_sort(out.begin(), out.end(), [](const GroupImportance& a, const GroupImportance& b) {
    return a.importance > b.importance;
  });
  return out;
}

struct GridCell {
  double p = 1;
  double q = 1;
  double accuracy = 0;
  bool best = false;
};

struct GridResult {
  std::vector<double> p_list;
  std::vector<double> q_list;
  std::vector<GridCell> cells;

  double spread() const {
    double lo = 2, hi = -1;
    for (const auto& c : cells) {
      lo = std::min(lo, c.accuracy);
      hi = std::max(hi, c.accuracy);
    }
    return hi - lo;
  }
};

/// One embedding plus one experiment per (p, q) pair. Cells are independent
/// jobs; each runs single-threaded internally so the per-cell reports do not
/// depend on the worker count.
inline GridResult grid_pq(const Catalog& catalog, const ExperimentConfig& cfg,
                          const WalkConfig& walk, const EmbedConfig& embed,
                          std::vector<double> p_list = {1, 2, 3, 4},
                          std::vector<double> q_list = {1, 2, 3, 4}, int n_threads = 1) {
  if (p_list.empty() || q_list.empty())
    throw ValidationError("grid: p_list and q_list must be non-empty");
  ExperimentConfig cell_cfg = cfg;
  cell_cfg.with_sna = true;
  cell_cfg.validate();

  CommunityGraph graph = CommunityGraph::build(catalog);
  GridResult result;
  result.p_list = p_list;
  result.q_list = q_list;
  result.cells.resize(p_list.size() * q_list.size());

  parallel_chunks(result.cells.size(), n_threads, [&](size_t lo, size_t hi) {
    for (size_t cell = lo; cell < hi; ++cell) {
      WalkConfig w = walk;
      w.p = p_list[cell / q_list.size()];
      w.q = q_list[cell % q_list.size()];
      EmbedConfig e = embed;
      e.hogwild_threads = 1;
      EmbeddingTable table = embed_pipeline(graph, w, e);
      ExperimentReport rep = run_experiment(catalog, &table, cell_cfg, 1);
      result.cells[cell] = {w.p, w.q, rep.accuracy, false};
    }
  });

  size_t best = 0;
  for (size_t i = 1; i < result.cells.size(); ++i)
    if (result.cells[i].accuracy > result.cells[best].accuracy) best = i;
  result.cells[best].best = true;
  return result;
}

struct CompareArm {
  ModelKind kind = ModelKind::Gbdt;
  bool with_sna = false;
  double accuracy = 0;
  std::vector<std::pair<std::string, std::string>> params;
};

struct CompareResult {
  std::vector<CompareArm> arms;

  double cell(ModelKind kind, bool with_sna) const {
    for (const auto& a : arms)
      if (a.kind == kind && a.with_sna == with_sna) return a.accuracy;
    throw ComputeError("compare: missing arm");
  }
};

/// Table 3 analog: every model family with and without the SNA block, using
/// the per-arm hyperparameters reported in the source study. Arms are
/// independent jobs merged by index.
inline CompareResult compare_models(const Catalog& catalog, const EmbeddingTable& embeddings,
                                    const ExperimentConfig& base, int n_threads = 1) {
  std::vector<ExperimentConfig> arms;
  auto push = [&](ModelKind kind, bool with_sna, auto tweak) {
    ExperimentConfig c = base;
    c.model = kind;
    c.with_sna = with_sna;
    tweak(c);
    c.validate();
    arms.push_back(std::move(c));
  };
  push(ModelKind::Gbdt, false, [](ExperimentConfig& c) {
    c.boost.depth = 5;
    c.boost.l2_leaf_reg = 1.0;
    c.boost.learning_rate = 0.05;
  });
  push(ModelKind::Gbdt, true, [](ExperimentConfig& c) {
    c.boost.depth = 4;
    c.boost.l2_leaf_reg = 1.0;
    c.boost.learning_rate = 0.03;
  });
  push(ModelKind::Forest, false, [](ExperimentConfig& c) {
    c.forest.n_estimators = 250;
    c.forest.tree.max_depth = 6;
    c.forest.tree.max_features = MaxFeatures::Auto;
  });
  push(ModelKind::Forest, true, [](ExperimentConfig& c) {
    c.forest.n_estimators = 350;
    c.forest.tree.max_depth = 5;
    c.forest.tree.max_features = MaxFeatures::Auto;
  });
  push(ModelKind::Tree, false, [](ExperimentConfig& c) {
    c.tree.max_depth = 300;
    c.tree.max_features = MaxFeatures::Auto;
  });
  push(ModelKind::Tree, true, [](ExperimentConfig& c) {
    c.tree.max_depth = 400;
    c.tree.max_features = MaxFeatures::Auto;
  });
  push(ModelKind::Mlp, false, [](ExperimentConfig&) {});
  push(ModelKind::Mlp, true, [](ExperimentConfig&) {});

  CompareResult result;
  result.arms.resize(arms.size());
  parallel_chunks(arms.size(), n_threads, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      ExperimentReport rep = run_experiment(catalog, &embeddings, arms[i], 1);
      result.arms[i] = {arms[i].model, arms[i].with_sna, rep.accuracy, arms[i].echo()};
    }
  });
  return result;
}

// ---- report emitters ----
// Reports carry no timing or timestamps so identical config and seed always
// produce identical bytes.

inline std::string experiment_report_csv(const ExperimentReport& r) {
  std::string out = "metric,value\n";
  auto add = [&](const std::string& k, const std::string& v) {
    out += csv_row({k, v});
  };
  add("accuracy", format_double(r.accuracy));
  for (int c = 0; c < kNumBuckets; ++c)
    add("precision_" + std::string(bucket_name(static_cast<RatingBucket>(c))),
        format_double(r.precision[c]));
  for (int c = 0; c < kNumBuckets; ++c)
    add("recall_" + std::string(bucket_name(static_cast<RatingBucket>(c))),
        format_double(r.recall[c]));
  for (int i = 0; i < kNumBuckets; ++i)
    for (int j = 0; j < kNumBuckets; ++j)
      add("confusion_" + std::to_string(i) + "_" + std::to_string(j),
          std::to_string(r.confusion[i][j]));
  for (int c = 0; c < kNumBuckets; ++c)
    add("class_share_" + std::string(bucket_name(static_cast<RatingBucket>(c))),
        format_double(r.class_shares[c]));
  add("n_rows", std::to_string(r.n_rows));
  add("n_train", std::to_string(r.n_train));
  add("n_train_balanced", std::to_string(r.n_train_balanced));
  add("n_test", std::to_string(r.n_test));
  add("dropped_titles", std::to_string(r.dropped_titles));
  add("imputed_train_cells", std::to_string(r.imputed_train_cells));
  add("imputed_test_cells", std::to_string(r.imputed_test_cells));
  add("missing_embedding_nodes", std::to_string(r.missing_embedding_nodes));
  for (size_t i = 0; i < r.notes.size(); ++i) add("note_" + std::to_string(i), r.notes[i]);
  for (const auto& [k, v] : r.config_echo) add("config." + k, v);
  return out;
}

inline std::string experiment_report_md(const ExperimentReport& r) {
  std::ostringstream md;
  md << "# Experiment report\n\n";
  md << "Accuracy: **" << format_double(r.accuracy) << "** on " << r.n_test << " test rows ("
     << r.n_rows << " total, " << r.n_train << " train";
  if (r.n_train_balanced != r.n_train) md << ", " << r.n_train_balanced << " after balancing";
  md << ").\n\n";
  md << "| class | share | precision | recall |\n|---|---|---|---|\n";
  for (int c = 0; c < kNumBuckets; ++c)
    md << "| " << bucket_name(static_cast<RatingBucket>(c)) << " | "
       << format_double(r.class_shares[c]) << " | " << format_double(r.precision[c]) << " | "
       << format_double(r.recall[c]) << " |\n";
  md << "\n## Confusion matrix (rows = actual)\n\n|  |";
  for (int j = 0; j < kNumBuckets; ++j) md << " " << bucket_name(static_cast<RatingBucket>(j)) << " |";
  md << "\n|---|---|---|---|---|\n";
  for (int i = 0; i < kNumBuckets; ++i) {
    md << "| " << bucket_name(static_cast<RatingBucket>(i)) << " |";
    for (int j = 0; j < kNumBuckets; ++j) md << " " << r.confusion[i][j] << " |";
    md << "\n";
  }
  md << "\nDropped titles: " << r.dropped_titles << "; imputed cells: " << r.imputed_train_cells
     << " train, " << r.imputed_test_cells << " test; unmatched embedding nodes: "
     << r.missing_embedding_nodes << ".\n";
  if (!r.notes.empty()) {
    md << "\n## Notes\n\n";
    for (const auto& n : r.notes) md << "- " << n << "\n";
  }
  md << "\n## Config\n\n| key | value |\n|---|---|\n";
  for (const auto& [k, v] : r.config_echo) md << "| " << k << " | " << v << " |\n";
  return md.str();
}

inline std::string grid_csv(const GridResult& g) {
  std::string out = "p,q,accuracy,best\n";
  for (const auto& c : g.cells)
    out += csv_row({format_double(c.p), format_double(c.q), format_double(c.accuracy),
                    c.best ? "1" : "0"});
  return out;
}

inline std::string grid_md(const GridResult& g) {
  std::ostringstream md;
  md << "# Accuracy by walk parameters\n\n| p \\ q |";
  for (double q : g.q_list) md << " " << format_double(q) << " |";
  md << "\n|---|";
  for (size_t i = 0; i < g.q_list.size(); ++i) md << "---|";
  md << "\n";
  for (size_t pi = 0; pi < g.p_list.size(); ++pi) {
    md << "| " << format_double(g.p_list[pi]) << " |";
    for (size_t qi = 0; qi < g.q_list.size(); ++qi) {
      const auto& c = g.cells[pi * g.q_list.size() + qi];
      if (c.best)
        md << " **" << format_double(c.accuracy) << "** |";
      else
        md << " " << format_double(c.accuracy) << " |";
    }
    md << "\n";
  }
  md << "\nSpread (max - min): " << format_double(g.spread()) << ". Bold marks the best cell.\n";
  return md.str();
}

inline std::string compare_csv(const CompareResult& r) {
  std::string out = "model,without_sna,with_sna\n";
  for (ModelKind kind :
       {ModelKind::Gbdt, ModelKind::Forest, ModelKind::Tree, ModelKind::Mlp}) {
    out += csv_row({model_kind_name(kind), format_double(r.cell(kind, false)),
                    format_double(r.cell(kind, true))});
  }
  out += "model,arm,param,value\n";
  for (const auto& arm : r.arms)
    for (const auto& [k, v] : arm.params)
      out += csv_row({model_kind_name(arm.kind), arm.with_sna ? "with_sna" : "without_sna", k, v});
  return out;
}

inline std::string compare_md(const CompareResult& r) {
  std::ostringstream md;
  md << "# Model comparison\n\n| model | without SNA | with SNA |\n|---|---|---|\n";
  for (ModelKind kind :
       {ModelKind::Gbdt, ModelKind::Forest, ModelKind::Tree, ModelKind::Mlp}) {
    md << "| " << model_kind_name(kind) << " | " << format_double(r.cell(kind, false)) << " | "
       << format_double(r.cell(kind, true)) << " |\n";
  }
  md << "\n## Hyperparameters\n\n";
  for (const auto& arm : r.arms) {
    md << "### " << model_kind_name(arm.kind) << " ("
       << (arm.with_sna ? "with SNA" : "without SNA") << ")\n\n";
    for (const auto& [k, v] : arm.params) md << "- " << k << " = " << v << "\n";
    md << "\n";
  }
  return md.str();
}

inline std::string importance_csv(const std::vector<GroupImportance>& imps) {
  std::string out = "group,importance\n";
  for (const auto& gi : imps)
    out += csv_row({std::string(feature_group_name(gi.group)), format_double(gi.importance)});
  return out;
}

inline std::string importance_md(const std::vector<GroupImportance>& imps) {
  std::ostringstream md;
  md << "# Grouped permutation importance\n\n| group | importance |\n|---|---|\n";
  for (const auto& gi : imps)
    md << "| " << feature_group_name(gi.group) << " | " << format_double(gi.importance) << " |\n";
  return md.str();
}

}  // namespace cinenet
