#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/rng.hpp"
#include "cinenet/tree.hpp"

namespace cinenet {

struct ForestParams {
  int n_estimators = 100;
  TreeParams tree;
  bool bootstrap = true;
  uint64_t seed = 1;

  void validate() const {
    if (n_estimators < 1) throw ValidationError("forest: n_estimators must be >= 1");
    tree.validate();
  }
};

/// Bagged CART ensemble. Probabilities are the mean of per-tree leaf
/// distributions, accumulated in tree order so the result does not depend
/// on how many threads fit the ensemble.
class RandomForestModel final : public Model {
 public:
  RandomForestModel() = default;

  static RandomForestModel fit(const Matrix& X, const std::vector<int>& y,
                               const ForestParams& params, int n_classes, int n_threads = 1) {
    params.validate();
    if (X.empty()) throw ValidationError("forest: empty dataset");
    if (X.size() != y.size()) throw ValidationError("forest: X and y length mismatch");
    RandomForestModel m;
    m.n_features_ = static_cast<int>(X[0].size());
    m.n_classes_ = n_classes;
    m.trees_.resize(params.n_estimators);
    size_t n = X.size();
    uint64_t base = mix_seed(params.seed, "forest");
    parallel_chunks(params.n_estimators, n_threads, [&](size_t lo, size_t hi) {
      Matrix xb;
      std::vector<int> yb;
      for (size_t t = lo; t < hi; ++t) {
        uint64_t tree_seed = mix_seed(base, t);
        TreeParams tp = params.tree;
        tp.seed = tree_seed;
        if (params.bootstrap) {
          Rng boot(mix_seed(tree_seed, "boot"));
          xb.clear();
          yb.clear();
          xb.reserve(n);
          yb.reserve(n);
          for (size_t i = 0; i < n; ++i) {
            size_t j = static_cast<size_t>(boot.uniform_int(n));
            xb.push_back(X[j]);
            yb.push_back(y[j]);
          }
          m.trees_[t] = DecisionTreeModel::fit(xb, yb, tp, n_classes);
        } else {
          m.trees_[t] = DecisionTreeModel::fit(X, y, tp, n_classes);
        }
      }
    });
    return m;
  }

  std::string kind() const override { return "forest"; }
  int n_features() const override { return n_features_; }
  int n_classes() const override { return n_classes_; }
  const std::vector<DecisionTreeModel>& trees() const { return trees_; }

  Matrix predict_proba(const Matrix& X) const override {
    check_width(X);
    Matrix out(X.size(), std::vector<double>(n_classes_, 0.0));
    double inv = 1.0 / static_cast<double>(trees_.size());
    for (size_t i = 0; i < X.size(); ++i) {
      auto& acc = out[i];
      for (const auto& tr : trees_) {
        const auto& d = tr.leaf_dist(X[i]);
        for (int c = 0; c < n_classes_; ++c) acc[c] += d[c];
      }
      for (auto& v : acc) v *= inv;
    }
    return out;
  }

  void save(std::ostream& out) const override {
    out << "forest " << n_features_ << " " << n_classes_ << " " << trees_.size() << "\n";
    for (const auto& tr : trees_) tr.save(out);
  }

  static RandomForestModel load(std::istream& in) {
    detail::expect_token(in, "forest", "model kind");
    RandomForestModel m;
    return load_body(in, m);
  }

  static RandomForestModel load_body(std::istream& in, RandomForestModel& m) {
    m.n_features_ = static_cast<int>(detail::read_ll(in, "n_features"));
    m.n_classes_ = static_cast<int>(detail::read_ll(in, "n_classes"));
    long long count = detail::read_ll(in, "tree count");
    if (count < 1) throw ParseError("forest: tree count must be positive");
    m.trees_.reserve(count);
    for (long long t = 0; t < count; ++t) m.trees_.push_back(DecisionTreeModel::load(in));
    return std::move(m);
  }

 private:
  int n_features_ = 0;
  int n_classes_ = 0;
  std::vector<DecisionTreeModel> trees_;
};

inline ModelPtr train_forest(const Matrix& X, const std::vector<int>& y, const ForestParams& params,
                             int n_classes, int n_threads = 1) {
  return std::make_unique<RandomForestModel>(
      RandomForestModel::fit(X, y, params, n_classes, n_threads));
}

}  // namespace cinenet
