#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/model.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

struct BoostParams {
  int n_iterations = 200;
  int depth = 5;
  double learning_rate = 0.05;
  double l2_leaf_reg = 1.0;
  uint64_t seed = 1;

  void validate() const {
    if (n_iterations < 1) throw ValidationError("gbdt: n_iterations must be >= 1");
    if (depth < 1) throw ValidationError("gbdt: depth must be >= 1");
    if (learning_rate < 0) throw ValidationError("gbdt: learning_rate must be non-negative");
    if (l2_leaf_reg < 0) throw ValidationError("gbdt: l2_leaf_reg must be non-negative");
  }
};

namespace detail {

struct RegNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegTree {
  std::vector<RegNode> nodes;

  double eval(const std::vector<double>& x) const {
    int cur = 0;
    while (nodes[cur].feature >= 0) {
      const auto& nd = nodes[cur];
      cur = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[cur].value;
  }

  void save(std::ostream& out) const {
    out << "rtree " << nodes.size() << "\n";
    for (const auto& nd : nodes) {
      if (nd.feature >= 0) {
        out << "s " << nd.feature << " " << format_double(nd.threshold) << " " << nd.left << " "
            << nd.right << "\n";
      } else {
        out << "l " << format_double(nd.value) << "\n";
      }
    }
  }

  static RegTree load(std::istream& in) {
    expect_token(in, "rtree", "tree kind");
    long long count = read_ll(in, "node count");
    if (count < 1) throw ParseError("rtree: node count must be positive");
    RegTree t;
    t.nodes.resize(count);
    for (auto& nd : t.nodes) {
      std::string tag;
      if (!(in >> tag)) throw ParseError("rtree: truncated node list");
      if (tag == "s") {
        nd.feature = static_cast<int>(read_ll(in, "split feature"));
        nd.threshold = read_double(in, "split threshold");
        nd.left = static_cast<int>(read_ll(in, "left child"));
        nd.right = static_cast<int>(read_ll(in, "right child"));
      } else if (tag == "l") {
        nd.feature = -1;
        nd.value = read_double(in, "leaf value");
      } else {
        throw ParseError("rtree: unknown node tag '" + tag + "'");
      }
    }
    return t;
  }
};

/// Grows one regression tree level by level using presorted feature columns.
/// Split gain is GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2); ties go to the
/// lowest feature index and then the lowest threshold because candidates are
/// visited in that order and only strictly better gains replace the incumbent.
inline RegTree build_reg_tree(const Matrix& X, const std::vector<double>& g,
                              const std::vector<double>& h,
                              const std::vector<std::vector<int>>& sorted_cols,
                              const BoostParams& params) {
  size_t n = X.size();
  size_t n_features = X[0].size();
  RegTree tree;

  struct NodeAgg {
    double g_sum = 0, h_sum = 0;
    long long count = 0;
    int depth = 0;
    double best_gain = 0;
    int best_feature = -1;
    double best_threshold = 0;
    double run_g = 0, run_h = 0;
    long long run_count = 0;
    double last_value = 0;
  };

  auto parent_score = [&](double gs, double hs) { return gs * gs / (hs + params.l2_leaf_reg); };
  auto leaf_value = [&](double gs, double hs) {
    double denom = hs + params.l2_leaf_reg;
    if (denom < 1e-12) return 0.0;
    return -params.learning_rate * gs / denom;
  };

  std::vector<int> node_of(n, 0);
  tree.nodes.emplace_back();
  std::vector<NodeAgg> agg(1);
  for (size_t i = 0; i < n; ++i) {
    agg[0].g_sum += g[i];
    agg[0].h_sum += h[i];
  }
  agg[0].count = static_cast<long long>(n);

  std::vector<int> active{0};
  while (!active.empty()) {
    for (int nd : active) {
      agg[nd].best_gain = 1e-12;
      agg[nd].best_feature = -1;
    }
    std::vector<char> is_active(tree.nodes.size(), 0);
    for (int nd : active) is_active[nd] = 1;

    for (size_t f = 0; f < n_features; ++f) {
      for (int nd : active) {
        agg[nd].run_g = 0;
        agg[nd].run_h = 0;
        agg[nd].run_count = 0;
      }
      for (int i : sorted_cols[f]) {
        int nd = node_of[i];
        if (nd < 0 || !is_active[nd]) continue;
        NodeAgg& a = agg[nd];
        double v = X[i][f];
        if (a.run_count > 0 && v != a.last_value) {
          double gl = a.run_g, hl = a.run_h;
          double gr = a.g_sum - gl, hr = a.h_sum - hl;
          double gain = parent_score(gl, hl) + parent_score(gr, hr) -
                        parent_score(a.g_sum, a.h_sum);
          if (gain > a.best_gain) {
            a.best_gain = gain;
            a.best_feature = static_cast<int>(f);
            a.best_threshold = a.last_value + (v - a.last_value) / 2;
          }
        }
        a.run_g += g[i];
        a.run_h += h[i];
        a.run_count += 1;
        a.last_value = v;
      }
    }

    std::vector<int> next_active;
    std::vector<char> splits(tree.nodes.size(), 0);
    for (int nd : active) {
      NodeAgg& a = agg[nd];
      if (a.best_feature < 0) {
        tree.nodes[nd].value = leaf_value(a.g_sum, a.h_sum);
        continue;
      }
      splits[nd] = 1;
      tree.nodes[nd].feature = a.best_feature;
      tree.nodes[nd].threshold = a.best_threshold;
      int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[nd].left = l;
      tree.nodes[nd].right = l + 1;
      agg.resize(tree.nodes.size());
      agg[l].depth = agg[nd].depth + 1;
      agg[l + 1].depth = agg[nd].depth + 1;
      if (agg[l].depth < params.depth) {
        next_active.push_back(l);
        next_active.push_back(l + 1);
      }
    }

    for (size_t i = 0; i < n; ++i) {
      int nd = node_of[i];
      if (nd < 0 || nd >= static_cast<int>(splits.size()) || !splits[nd]) {
        if (nd >= 0 && !is_active[nd]) continue;
        if (nd >= 0 && is_active[nd] && !splits[nd]) node_of[i] = -1;
        continue;
      }
      const auto& parent = tree.nodes[nd];
      int child = X[i][parent.feature] <= parent.threshold ? parent.left : parent.right;
      node_of[i] = child;
      agg[child].g_sum += g[i];
      agg[child].h_sum += h[i];
      agg[child].count += 1;
    }

    // Children created at the depth limit become leaves immediately.
    for (int nd : active) {
      if (!splits[nd]) continue;
      int l = tree.nodes[nd].left;
      int r = tree.nodes[nd].right;
      if (agg[l].depth >= params.depth) {
        tree.nodes[l].value = leaf_value(agg[l].g_sum, agg[l].h_sum);
        tree.nodes[r].value = leaf_value(agg[r].g_sum, agg[r].h_sum);
      }
    }
    active = std::move(next_active);
  }
  return tree;
}

}  // namespace detail

/// Gradient boosted trees with a softmax cross-entropy objective. One
/// regression tree is fitted per class per round against the gradient
/// g = p - onehot(y) and hessian h = p(1-p); rounds share the probabilities
/// computed at the start of the round, so per-class fits can run in parallel
/// without changing the result.
class GbdtModel final : public Model {
 public:
  GbdtModel() = default;

  static GbdtModel fit(const Matrix& X, const std::vector<int>& y, const BoostParams& params,
                       int n_classes, int n_threads = 1) {
    params.validate();
    if (X.empty()) throw ValidationError("gbdt: empty dataset");
    if (X.size() != y.size()) throw ValidationError("gbdt: X and y length mismatch");
    GbdtModel m;
    size_t n = X.size();
    m.n_features_ = static_cast<int>(X[0].size());
    m.n_classes_ = n_classes;
    m.params_ = params;

    std::vector<long long> counts(n_classes, 0);
    for (int label : y) {
      if (label < 0 || label >= n_classes) throw ValidationError("gbdt: label out of range");
      counts[label] += 1;
    }
    m.init_scores_.resize(n_classes);
    for (int c = 0; c < n_classes; ++c)
      m.init_scores_[c] = std::log(static_cast<double>(counts[c]) / n + 1e-12);

    std::vector<std::vector<int>> sorted_cols(m.n_features_);
    for (int f = 0; f < m.n_features_; ++f) {
      auto& col = sorted_cols[f];
      col.resize(n);
      for (size_t i = 0; i < n; ++i) col[i] = static_cast<int>(i);
      std::sort(col.begin(), col.end(), [&](int a, int b) {
        if (X[a][f] != X[b][f]) return X[a][f] < X[b][f];
        return a < b;
      });
    }

    Matrix scores(n, m.init_scores_);
    Matrix proba(n, std::vector<double>(n_classes));
    m.rounds_.resize(params.n_iterations);
    for (int it = 0; it < params.n_iterations; ++it) {
      for (size_t i = 0; i < n; ++i) {
        double mx = scores[i][0];
        for (int c = 1; c < n_classes; ++c) mx = std::max(mx, scores[i][c]);
        double total = 0;
        for (int c = 0; c < n_classes; ++c) {
          proba[i][c] = std::exp(scores[i][c] - mx);
          total += proba[i][c];
        }
        for (int c = 0; c < n_classes; ++c) proba[i][c] /= total;
      }

      auto& round = m.rounds_[it];
      round.resize(n_classes);
      parallel_chunks(n_classes, n_threads, [&](size_t lo, size_t hi) {
        std::vector<double> g(n), h(n);
        for (size_t c = lo; c < hi; ++c) {
          for (size_t i = 0; i < n; ++i) {
            double p = proba[i][c];
            g[i] = p - (y[i] == static_cast<int>(c) ? 1.0 : 0.0);
            h[i] = p * (1.0 - p);
          }
          round[c] = detail::build_reg_tree(X, g, h, sorted_cols, params);
        }
      });
      for (size_t i = 0; i < n; ++i)
        for (int c = 0; c < n_classes; ++c) scores[i][c] += round[c].eval(X[i]);
    }
    return m;
  }

  std::string kind() const override { return "gbdt"; }
  int n_features() const override { return n_features_; }
  int n_classes() const override { return n_classes_; }
  int n_rounds() const { return static_cast<int>(rounds_.size()); }

  Matrix predict_proba(const Matrix& X) const override {
    check_width(X);
    Matrix out(X.size());
    for (size_t i = 0; i < X.size(); ++i) {
      std::vector<double> scores = init_scores_;
      for (const auto& round : rounds_)
        for (int c = 0; c < n_classes_; ++c) scores[c] += round[c].eval(X[i]);
      double mx = scores[0];
      for (double s : scores) mx = std::max(mx, s);
      double total = 0;
      for (auto& s : scores) {
        s = std::exp(s - mx);
        total += s;
      }
      for (auto& s : scores) s /= total;
      out[i] = std::move(scores);
    }
    return out;
  }

  void save(std::ostream& out) const override {
    out << "gbdt " << n_features_ << " " << n_classes_ << " " << rounds_.size() << "\n";
    out << "init";
    for (double s : init_scores_) out << " " << format_double(s);
    out << "\n";
    for (const auto& round : rounds_)
      for (const auto& tree : round) tree.save(out);
  }

  static GbdtModel load(std::istream& in) {
    detail::expect_token(in, "gbdt", "model kind");
    GbdtModel m;
    return load_body(in, m);
  }

  static GbdtModel load_body(std::istream& in, GbdtModel& m) {
    m.n_features_ = static_cast<int>(detail::read_ll(in, "n_features"));
    m.n_classes_ = static_cast<int>(detail::read_ll(in, "n_classes"));
    long long rounds = detail::read_ll(in, "round count");
    detail::expect_token(in, "init", "init scores");
    m.init_scores_.resize(m.n_classes_);
    for (auto& s : m.init_scores_) s = detail::read_double(in, "init score");
    m.rounds_.resize(rounds);
    for (auto& round : m.rounds_) {
      round.reserve(m.n_classes_);
      for (int c = 0; c < m.n_classes_; ++c) round.push_back(detail::RegTree::load(in));
    }
    return std::move(m);
  }

 private:
  int n_features_ = 0;
  int n_classes_ = 0;
  BoostParams params_;
  std::vector<double> init_scores_;
  std::vector<std::vector<detail::RegTree>> rounds_;
};

inline ModelPtr train_gbdt(const Matrix& X, const std::vector<int>& y, const BoostParams& params,
                           int n_classes, int n_threads = 1) {
  return std::make_unique<GbdtModel>(GbdtModel::fit(X, y, params, n_classes, n_threads));
}

}  // namespace cinenet
