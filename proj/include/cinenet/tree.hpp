#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cinenet/model.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

enum class MaxFeatures { Auto, All, Fraction };

inline const char* max_features_name(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Auto: return "auto";
    case MaxFeatures::All: return "all";
    case MaxFeatures::Fraction: return "fraction";
  }
  return "?";
}

enum class Criterion { Gini };

struct TreeParams {
  int max_depth = 300;
  MaxFeatures max_features = MaxFeatures::All;
  double fraction = 1.0;  // only read when max_features == Fraction
  Criterion criterion = Criterion::Gini;
  int min_samples_leaf = 1;
  uint64_t seed = 1;

  void validate() const {
    if (max_depth < 1) throw ValidationError("tree: max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ValidationError("tree: min_samples_leaf must be >= 1");
    if (max_features == MaxFeatures::Fraction && !(fraction > 0 && fraction <= 1))
      throw ValidationError("tree: fraction must be in (0,1]");
  }

  int features_per_node(int n_features) const {
    switch (max_features) {
      case MaxFeatures::All: return n_features;
      case MaxFeatures::Auto:
        return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))));
      case MaxFeatures::Fraction:
        return std::max(1, static_cast<int>(fraction * n_features));
    }
    return n_features;
  }
};

inline double gini_impurity(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double s = 0;
  for (int c : counts) {
    double p = static_cast<double>(c) / total;
    s += p * p;
  }
  return 1.0 - s;
}

/// CART with gini impurity. Splits send x <= threshold left; thresholds are
/// midpoints of consecutive distinct values; impurity ties resolve to the
/// lowest feature index, then the lowest threshold.
class DecisionTreeModel : public Model {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<double> dist;  // leaf class distribution
  };

  DecisionTreeModel() = default;

  static DecisionTreeModel fit(const Matrix& X, const std::vector<int>& y,
                               const TreeParams& params, int n_classes) {
    params.validate();
    if (X.empty()) throw ValidationError("tree: empty dataset");
    if (X.size() != y.size()) throw ValidationError("tree: X and y length mismatch");
    DecisionTreeModel m;
    m.n_features_ = static_cast<int>(X[0].size());
    m.n_classes_ = n_classes;
    std::vector<int> idx(X.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    Rng rng(mix_seed(params.seed, "cart"));
    m.grow(X, y, idx, 1, params, rng);
    return m;
  }

  std::string kind() const override { return "tree"; }
  int n_features() const override { return n_features_; }
  int n_classes() const override { return n_classes_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  const std::vector<double>& leaf_dist(const std::vector<double>& x) const {
    int cur = 0;
    while (nodes_[cur].feature >= 0)
      cur = x[nodes_[cur].feature] <= nodes_[cur].threshold ? nodes_[cur].left
                                                            : nodes_[cur].right;
    return nodes_[cur].dist;
  }

  Matrix predict_proba(const Matrix& X) const override {
    check_width(X);
    Matrix out;
    out.reserve(X.size());
    for (const auto& x : X) out.push_back(leaf_dist(x));
    return out;
  }

  void save(std::ostream& out) const override {
    out << "tree " << n_features_ << " " << n_classes_ << " " << nodes_.size() << "\n";
    for (const auto& nd : nodes_) {
      if (nd.feature >= 0) {
        out << "s " << nd.feature << " " << format_double(nd.threshold) << " " << nd.left << " "
            << nd.right << "\n";
      } else {
        out << "l";
        for (double p : nd.dist) out << " " << format_double(p);
        out << "\n";
      }
    }
  }

  static DecisionTreeModel load(std::istream& in) {
    detail::expect_token(in, "tree", "model kind");
    DecisionTreeModel m;
    return load_body(in, m);
  }

  /// Loads after the kind token has been consumed by a dispatcher.
  static DecisionTreeModel load_body(std::istream& in, DecisionTreeModel& m) {
    m.n_features_ = static_cast<int>(detail::read_ll(in, "n_features"));
    m.n_classes_ = static_cast<int>(detail::read_ll(in, "n_classes"));
    long long count = detail::read_ll(in, "node count");
    m.nodes_.resize(count);
    for (auto& nd : m.nodes_) {
      std::string tag;
      in >> tag;
      if (tag == "s") {
        nd.feature = static_cast<int>(detail::read_ll(in, "feature"));
        nd.threshold = detail::read_double(in, "threshold");
        nd.left = static_cast<int>(detail::read_ll(in, "left"));
        nd.right = static_cast<int>(detail::read_ll(in, "right"));
      } else if (tag == "l") {
        nd.feature = -1;
        nd.dist.resize(m.n_classes_);
        for (auto& p : nd.dist) p = detail::read_double(in, "leaf p");
      } else {
        throw ParseError("model load: bad tree node tag '" + tag + "'");
      }
    }
    return m;
  }

 private:
  struct Split {
    bool found = false;
    double impurity = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  int grow(const Matrix& X, const std::vector<int>& y, std::vector<int>& idx, int depth,
           const TreeParams& params, Rng& rng) {
    std::vector<int> counts(n_classes_, 0);
    for (int i : idx) counts[y[i]] += 1;
    const int n = static_cast<int>(idx.size());
    const bool pure = *std::max_element(counts.begin(), counts.end()) == n;

    Split best;
    if (!pure && depth <= params.max_depth && n >= 2 * params.min_samples_leaf)
      best = best_split(X, y, idx, counts, params, rng);

    if (!best.found) {
      Node leaf;
      leaf.dist.resize(n_classes_);
      for (int c = 0; c < n_classes_; ++c)
        leaf.dist[c] = static_cast<double>(counts[c]) / n;
      nodes_.push_back(std::move(leaf));
      return static_cast<int>(nodes_.size()) - 1;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (X[i][best.feature] <= best.threshold ? left_idx : right_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    int me = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[me].feature = best.feature;
    nodes_[me].threshold = best.threshold;
    int l = grow(X, y, left_idx, depth + 1, params, rng);
    int r = grow(X, y, right_idx, depth + 1, params, rng);
    nodes_[me].left = l;
    nodes_[me].right = r;
    return me;
  }

  Split best_split(const Matrix& X, const std::vector<int>& y, const std::vector<int>& idx,
                   const std::vector<int>& counts, const TreeParams& params, Rng& rng) {
    const int n = static_cast<int>(idx.size());
    std::vector<int> features(n_features_);
    for (int f = 0; f < n_features_; ++f) features[f] = f;
    int k = params.features_per_node(n_features_);
    if (k < n_features_) {
      // partial Fisher-Yates, then ascending so ties pick the lowest feature
      for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.uniform_int(n_features_ - i));
        std::swap(features[i], features[j]);
      }
      features.resize(k);
      std::sort(features.begin(), features.end());
    }

    Split best;
    std::vector<std::pair<double, int>> vals(n);
    std::vector<int> left_counts(n_classes_);
    for (int f : features) {
      for (int i = 0; i < n; ++i) vals[i] = {X[idx[i]][f], y[idx[i]]};
      std::sort(vals.begin(), vals.end());
      if (vals.front().first == vals.back().first) continue;
      std::fill(left_counts.begin(), left_counts.end(), 0);
      int nl = 0;
      for (int i = 0; i + 1 < n; ++i) {
        left_counts[vals[i].second] += 1;
        ++nl;
        if (vals[i + 1].first <= vals[i].first) continue;  // not a boundary
        int nr = n - nl;
        if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
        double sl = 0, sr = 0;
        for (int c = 0; c < n_classes_; ++c) {
          double pl = static_cast<double>(left_counts[c]) / nl;
          double pr = static_cast<double>(counts[c] - left_counts[c]) / nr;
          sl += pl * pl;
          sr += pr * pr;
        }
        double weighted = (nl * (1.0 - sl) + nr * (1.0 - sr)) / n;
        if (!best.found || weighted < best.impurity) {
          best.found = true;
          best.impurity = weighted;
          best.feature = f;
          best.threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
        }
      }
    }
    return best;
  }

  int n_features_ = 0;
  int n_classes_ = 0;
  std::vector<Node> nodes_;
};

inline ModelPtr train_tree(const Matrix& X, const std::vector<int>& y, const TreeParams& params,
                           int n_classes) {
  return std::make_unique<DecisionTreeModel>(DecisionTreeModel::fit(X, y, params, n_classes));
}

}  // namespace cinenet
