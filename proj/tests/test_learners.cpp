#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "testutil.hpp"

using namespace cinenet;

namespace {

// ---------------------------------------------------------------------------
// Independent CART re-implementation: recursive, recounts every candidate
// partition from scratch instead of sweeping incremental counts.
// ---------------------------------------------------------------------------

struct OracleSplit {
  bool found = false;
  double impurity = 0;
  int feature = -1;
  double threshold = 0;
};

OracleSplit oracle_best_split(const Matrix& X, const std::vector<int>& y,
                              const std::vector<int>& idx, int n_classes,
                              const TreeParams& p) {
  OracleSplit best;
  const int n = static_cast<int>(idx.size());
  const int n_features = static_cast<int>(X[0].size());
  for (int f = 0; f < n_features; ++f) {
    std::vector<double> vals;
    for (int i : idx) vals.push_back(X[i][f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (size_t v = 0; v + 1 < vals.size(); ++v) {
      double thr = vals[v] + (vals[v + 1] - vals[v]) / 2.0;
      std::vector<int> lc(n_classes, 0), rc(n_classes, 0);
      int nl = 0, nr = 0;
      for (int i : idx) {
        if (X[i][f] <= thr) {
          lc[y[i]] += 1;
          ++nl;
        } else {
          rc[y[i]] += 1;
          ++nr;
        }
      }
      if (nl < p.min_samples_leaf || nr < p.min_samples_leaf) continue;
      double sl = 0, sr = 0;
      for (int c = 0; c < n_classes; ++c) {
        double pl = static_cast<double>(lc[c]) / nl;
        double pr = static_cast<double>(rc[c]) / nr;
        sl += pl * pl;
        sr += pr * pr;
      }
      double weighted = (nl * (1.0 - sl) + nr * (1.0 - sr)) / n;
      if (!best.found || weighted < best.impurity) {
        best.found = true;
        best.impurity = weighted;
        best.feature = f;
        best.threshold = thr;
      }
    }
  }
  return best;
}

int oracle_grow(const Matrix& X, const std::vector<int>& y, const std::vector<int>& idx,
                int depth, const TreeParams& p, int n_classes,
                std::vector<DecisionTreeModel::Node>& out) {
  std::vector<int> counts(n_classes, 0);
  for (int i : idx) counts[y[i]] += 1;
  const int n = static_cast<int>(idx.size());
  const bool pure = *std::max_element(counts.begin(), counts.end()) == n;

  OracleSplit best;
  if (!pure && depth <= p.max_depth && n >= 2 * p.min_samples_leaf)
    best = oracle_best_split(X, y, idx, n_classes, p);

  if (!best.found) {
    DecisionTreeModel::Node leaf;
    leaf.dist.resize(n_classes);
    for (int c = 0; c < n_classes; ++c)
      leaf.dist[c] = static_cast<double>(counts[c]) / n;
    out.push_back(std::move(leaf));
    return static_cast<int>(out.size()) - 1;
  }

  std::vector<int> li, ri;
  for (int i : idx) (X[i][best.feature] <= best.threshold ? li : ri).push_back(i);
  int me = static_cast<int>(out.size());
  out.emplace_back();
  out[me].feature = best.feature;
  out[me].threshold = best.threshold;
  int l = oracle_grow(X, y, li, depth + 1, p, n_classes, out);
  int r = oracle_grow(X, y, ri, depth + 1, p, n_classes, out);
  out[me].left = l;
  out[me].right = r;
  return me;
}

void check_same_tree(const DecisionTreeModel& m, const Matrix& X, const std::vector<int>& y,
                     int n_classes, const TreeParams& p) {
  std::vector<int> idx(X.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<DecisionTreeModel::Node> want;
  oracle_grow(X, y, idx, 1, p, n_classes, want);
  const auto& got = m.nodes();
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    REQUIRE(got[i].feature == want[i].feature);
    REQUIRE(got[i].threshold == want[i].threshold);
    REQUIRE(got[i].left == want[i].left);
    REQUIRE(got[i].right == want[i].right);
    REQUIRE(got[i].dist == want[i].dist);
  }
}

Matrix random_matrix(Rng& rng, int n, int d) {
  Matrix X(n, std::vector<double>(d));
  for (auto& row : X)
    for (auto& v : row) v = rng.uniform_int(6) / 2.0;  // duplicates on purpose
  return X;
}

double mean_ce(const Model& m, const Matrix& X, const std::vector<int>& y) {
  auto proba = m.predict_proba(X);
  double total = 0;
  for (size_t i = 0; i < X.size(); ++i) total += -std::log(std::max(proba[i][y[i]], 1e-300));
  return total / X.size();
}

double accuracy_of(const Model& m, const Matrix& X, const std::vector<int>& y) {
  auto pred = m.predict(X);
  int ok = 0;
  for (size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
  return static_cast<double>(ok) / y.size();
}

}  // namespace

TEST_CASE("decision tree matches a from-scratch CART on a fixed dataset") {
  Matrix X = {{2, 0, 1}, {1, 1, 1}, {0, 2, 0}, {2, 2, 1}, {0, 0, 0}, {1, 2, 1},
              {2, 1, 0}, {0, 1, 1}, {1, 0, 0}, {2, 2, 0}, {0, 2, 1}, {1, 1, 0}};
  std::vector<int> y = {0, 1, 2, 0, 2, 1, 0, 2, 1, 0, 2, 1};
  TreeParams p;
  auto m = DecisionTreeModel::fit(X, y, p, 3);
  check_same_tree(m, X, y, 3, p);
  // the tree fully separates this training set
  CHECK(accuracy_of(m, X, y) == 1.0);
}

TEST_CASE("decision tree matches the oracle on random data") {
  Rng rng(101);
  for (int rep = 0; rep < 8; ++rep) {
    int n = 10 + static_cast<int>(rng.uniform_int(10));
    Matrix X = random_matrix(rng, n, 3);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.uniform_int(3));
    TreeParams p;
    p.min_samples_leaf = 1 + static_cast<int>(rng.uniform_int(3));
    p.max_depth = 2 + static_cast<int>(rng.uniform_int(4));
    auto m = DecisionTreeModel::fit(X, y, p, 3);
    check_same_tree(m, X, y, 3, p);
  }
}

TEST_CASE("tree depth and leaf-size limits hold") {
  Rng rng(7);
  Matrix X = random_matrix(rng, 30, 3);
  std::vector<int> y(30);
  for (auto& v : y) v = static_cast<int>(rng.uniform_int(3));

  SECTION("max_depth 1 is a stump") {
    TreeParams p;
    p.max_depth = 1;
    auto m = DecisionTreeModel::fit(X, y, p, 3);
    REQUIRE(m.nodes().size() <= 3);
    if (m.nodes().size() == 3) {
      CHECK(m.nodes()[0].feature >= 0);
      CHECK(m.nodes()[1].feature == -1);
      CHECK(m.nodes()[2].feature == -1);
    }
  }
  SECTION("min_samples_leaf bounds every leaf") {
    TreeParams p;
    p.min_samples_leaf = 4;
    auto m = DecisionTreeModel::fit(X, y, p, 3);
    std::vector<int> arrivals(m.nodes().size(), 0);
    for (const auto& row : X) {
      int cur = 0;
      while (m.nodes()[cur].feature >= 0)
        cur = row[m.nodes()[cur].feature] <= m.nodes()[cur].threshold ? m.nodes()[cur].left
                                                                      : m.nodes()[cur].right;
      arrivals[cur] += 1;
    }
    for (size_t i = 0; i < m.nodes().size(); ++i)
      if (m.nodes()[i].feature == -1) CHECK(arrivals[i] >= 4);
  }
  SECTION("parameter validation") {
    TreeParams p;
    p.max_depth = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = TreeParams{};
    p.min_samples_leaf = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = TreeParams{};
    p.max_features = MaxFeatures::Fraction;
    p.fraction = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    CHECK_THROWS_AS(DecisionTreeModel::fit({}, {}, TreeParams{}, 3), ValidationError);
  }
}

TEST_CASE("single-tree forest without bootstrap equals the plain tree") {
  auto [X, y] = testutil::blobs(8, 3, 0.9, 19);
  ForestParams fp;
  fp.n_estimators = 1;
  fp.bootstrap = false;
  auto forest = RandomForestModel::fit(X, y, fp, 4);
  auto tree = DecisionTreeModel::fit(X, y, fp.tree, 4);
  CHECK(forest.predict_proba(X) == tree.predict_proba(X));
}

TEST_CASE("forest is deterministic and thread-invariant") {
  auto [X, y] = testutil::blobs(8, 3, 1.0, 29);
  ForestParams fp;
  fp.n_estimators = 12;
  fp.tree.max_features = MaxFeatures::Auto;
  fp.seed = 4;
  auto a = RandomForestModel::fit(X, y, fp, 4, 1);
  auto b = RandomForestModel::fit(X, y, fp, 4, 1);
  auto c = RandomForestModel::fit(X, y, fp, 4, 3);
  CHECK(a.predict_proba(X) == b.predict_proba(X));
  CHECK(a.predict_proba(X) == c.predict_proba(X));

  // probabilities are exactly the mean over per-tree leaf distributions
  auto proba = a.predict_proba({X[0]});
  std::vector<double> acc(4, 0.0);
  for (const auto& tr : a.trees()) {
    const auto& d = tr.leaf_dist(X[0]);
    for (int k = 0; k < 4; ++k) acc[k] += d[k];
  }
  for (int k = 0; k < 4; ++k)
    CHECK(proba[0][k] == Catch::Approx(acc[k] / 12.0).margin(1e-15));

  ForestParams bad;
  bad.n_estimators = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("gbdt with zero learning rate predicts the class priors") {
  Matrix X = {{0.0}, {1.0}, {2.0}, {3.0}};
  std::vector<int> y = {0, 0, 0, 1};
  BoostParams p;
  p.n_iterations = 10;
  p.learning_rate = 0.0;
  auto m = GbdtModel::fit(X, y, p, 2);
  auto proba = m.predict_proba(X);
  for (const auto& row : proba) {
    CHECK(row[0] == Catch::Approx(0.75).margin(1e-9));
    CHECK(row[1] == Catch::Approx(0.25).margin(1e-9));
  }
}

TEST_CASE("one newton step of gbdt is hand-checkable") {
  // 4 points, perfectly split at x = 1.5; all probabilities start at 1/2
  Matrix X = {{0.0}, {1.0}, {2.0}, {3.0}};
  std::vector<int> y = {0, 0, 1, 1};
  BoostParams p;
  p.n_iterations = 1;
  p.depth = 1;
  p.learning_rate = 0.3;
  p.l2_leaf_reg = 1.0;
  auto m = GbdtModel::fit(X, y, p, 2);
  CHECK(m.n_rounds() == 1);

  // class 0 tree: leaf value = -lr * G / (H + l2); left G = -1, H = 0.5
  // so scores move by +-0.2 and p(class 0 | left) = sigmoid(0.4)
  const double want = 1.0 / (1.0 + std::exp(-0.4));
  auto proba = m.predict_proba(X);
  CHECK(proba[0][0] == Catch::Approx(want).margin(1e-9));
  CHECK(proba[1][0] == Catch::Approx(want).margin(1e-9));
  CHECK(proba[2][1] == Catch::Approx(want).margin(1e-9));
  CHECK(proba[3][1] == Catch::Approx(want).margin(1e-9));
}

TEST_CASE("gbdt training loss never increases with more rounds") {
  auto [X, y] = testutil::blobs(8, 2, 0.8, 3);
  BoostParams p;
  p.depth = 3;
  p.learning_rate = 0.1;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 8; ++k) {
    p.n_iterations = k;
    auto m = GbdtModel::fit(X, y, p, 4);
    double ce = mean_ce(m, X, y);
    CHECK(ce <= prev + 1e-9);
    prev = ce;
  }
}

TEST_CASE("gbdt separates easy blobs and stays deterministic") {
  auto [X, y] = testutil::blobs(10, 2, 0.3, 5);
  BoostParams p;
  p.n_iterations = 50;
  p.depth = 3;
  p.learning_rate = 0.3;
  auto a = GbdtModel::fit(X, y, p, 4);
  CHECK(accuracy_of(a, X, y) == 1.0);

  auto b = GbdtModel::fit(X, y, p, 4);
  auto c = GbdtModel::fit(X, y, p, 4, 2);
  CHECK(a.predict_proba(X) == b.predict_proba(X));
  CHECK(a.predict_proba(X) == c.predict_proba(X));

  BoostParams bad;
  bad.n_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = BoostParams{};
  bad.learning_rate = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(GbdtModel::fit(X, {1, 2}, BoostParams{}, 4), ValidationError);
}

TEST_CASE("mlp parameter counts follow the fixed architecture") {
  CHECK(MlpModel::param_count(291) == std::vector<long long>{18688, 1040, 68});
  auto counts = MlpModel::param_count(3);
  CHECK(counts == std::vector<long long>{256, 1040, 68});
  long long total = 0;
  for (long long c : counts) total += c;
  CHECK(total == 1364);
  auto m = MlpModel::init(3, 1);
  CHECK(static_cast<long long>(m.weights().size()) == total);
}

TEST_CASE("untrained mlp still emits a softmax row") {
  auto m = MlpModel::init(5, 3);
  Matrix X = {{0.1, -0.2, 0.3, 0.0, 1.0}, {1.0, 1.0, -1.0, 0.5, -0.5}};
  auto proba = m.predict_proba(X);
  for (const auto& row : proba) {
    double s = 0;
    for (double v : row) {
      CHECK(v > 0.0);
      s += v;
    }
    CHECK(s == Catch::Approx(1.0).margin(1e-12));
  }

  MlpParams zero;
  zero.epochs = 0;
  auto [Xb, yb] = testutil::blobs(3, 5, 0.5, 8);
  auto frozen = MlpModel::fit(Xb, yb, zero, 4);
  CHECK(frozen.weights() == MlpModel::init(5, zero.seed).weights());
}

TEST_CASE("mlp analytic gradient matches finite differences") {
  auto model = MlpModel::init(3, 7);
  Rng rng(15);
  Matrix X(6, std::vector<double>(3));
  for (auto& row : X)
    for (auto& v : row) v = rng.uniform(-1.0, 1.0);
  std::vector<int> y = {0, 1, 2, 3, 0, 1};

  auto grad = model.gradient(X, y);
  auto f = [&](const std::vector<double>& w) {
    MlpModel m2 = model;
    m2.mutable_weights() = w;
    return m2.loss(X, y);
  };
  auto fd = testutil::fd_gradient(f, model.weights());
  CHECK(testutil::max_abs_diff(grad, fd) < 1e-5);
}

TEST_CASE("mlp trains deterministically and learns blobs") {
  auto [X, y] = testutil::blobs(12, 3, 0.5, 9);
  MlpParams p;
  p.epochs = 40;
  p.learning_rate = 0.05;
  p.batch_size = 8;
  p.dropout_rate = 0.0;
  p.seed = 1;
  auto a = MlpModel::fit(X, y, p, 4);
  auto b = MlpModel::fit(X, y, p, 4);
  CHECK(a.weights() == b.weights());
  CHECK(accuracy_of(a, X, y) >= 0.9);

  p.dropout_rate = 0.4;
  auto c = MlpModel::fit(X, y, p, 4);
  auto d = MlpModel::fit(X, y, p, 4);
  CHECK(c.weights() == d.weights());

  CHECK_THROWS_AS(MlpModel::fit(X, y, p, 3), ValidationError);
  MlpParams bad;
  bad.dropout_rate = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = MlpParams{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("all four models round-trip through their text format") {
  auto [X, y] = testutil::blobs(4, 2, 0.6, 13);

  std::vector<ModelPtr> models;
  models.push_back(train_tree(X, y, TreeParams{}, 4));
  ForestParams fp;
  fp.n_estimators = 3;
  models.push_back(train_forest(X, y, fp, 4));
  BoostParams bp;
  bp.n_iterations = 4;
  bp.depth = 2;
  models.push_back(train_gbdt(X, y, bp, 4));
  MlpParams mp;
  mp.epochs = 3;
  mp.batch_size = 4;
  models.push_back(train_mlp(X, y, mp, 4));

  for (const auto& m : models) {
    std::ostringstream saved;
    m->save(saved);
    std::istringstream in(saved.str());
    auto back = load_model(in);
    CHECK(back->kind() == m->kind());
    CHECK(back->n_features() == m->n_features());
    CHECK(back->predict_proba(X) == m->predict_proba(X));

    std::ostringstream resaved;
    back->save(resaved);
    CHECK(resaved.str() == saved.str());
  }

  SECTION("file helpers") {
    std::string path = "/tmp/cinenet_model_roundtrip.txt";
    save_model_file(*models[2], path);
    auto back = load_model_file(path);
    CHECK(back->predict_proba(X) == models[2]->predict_proba(X));
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_model_file("/tmp/cinenet_no_such_model.txt"), ParseError);
  }

  SECTION("malformed streams are rejected") {
    std::istringstream junk("banana 3 4");
    CHECK_THROWS_AS(load_model(junk), ParseError);
    std::istringstream truncated("tree 2 4 1\ns 0");
    CHECK_THROWS_AS(load_model(truncated), ParseError);
    std::istringstream empty("");
    CHECK_THROWS_AS(load_model(empty), ParseError);
  }
}
