#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

struct SmoteConfig {
  int k_neighbors = 5;
  uint64_t seed = 1;

  void validate() const {
    if (k_neighbors < 1) throw ValidationError("smote: k_neighbors must be >= 1");
  }
};

struct SmoteResult {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> notes;  // per-class k clamps, for run metadata
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

/// k nearest same-class neighbors for every member, ties broken by index.
inline std::vector<std::vector<int>> knn_lists(const Matrix& X, const std::vector<int>& members,
                                               int k) {
  const int n = static_cast<int>(members.size());
  std::vector<std::vector<int>> nn(n);
  std::vector<std::pair<double, int>> cand;
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(sq_dist(X[members[i]], X[members[j]]), j);
    std::sort(cand.begin(), cand.end());
    for (int t = 0; t < k && t < static_cast<int>(cand.size()); ++t)
      nn[i].push_back(cand[t].second);
  }
  return nn;
}

}  // namespace detail

/// Upsamples every minority class to the majority count with synthetic points
/// x + lambda (x_nn - x). Originals come first, unchanged; synthetics follow
/// in class order.
inline SmoteResult smote_balance(const Matrix& X, const std::vector<int>& y,
                                 const SmoteConfig& cfg) {
  cfg.validate();
  if (X.size() != y.size()) throw ValidationError("smote: X and y length mismatch");
  if (X.empty()) throw ValidationError("smote: empty input");

  std::map<int, std::vector<int>> by_class;
  for (size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(static_cast<int>(i));
  size_t majority = 0;
  for (const auto& [c, members] : by_class) majority = std::max(majority, members.size());

  SmoteResult res;
  res.X = X;
  res.y = y;
  Rng rng(mix_seed(cfg.seed, "smote"));

  for (const auto& [c, members] : by_class) {
    const size_t need = majority - members.size();
    if (need == 0) continue;
    if (members.size() < 2)
      throw ValidationError("smote: class " + std::to_string(c) + " has " +
                            std::to_string(members.size()) + " sample(s), cannot interpolate");
    int k = cfg.k_neighbors;
    if (k >= static_cast<int>(members.size())) {
      k = static_cast<int>(members.size()) - 1;
      res.notes.push_back("smote: class " + std::to_string(c) + " k clamped to " +
                          std::to_string(k));
    }
    auto nn = detail::knn_lists(X, members, k);
    for (size_t s = 0; s < need; ++s) {
      int i = static_cast<int>(rng.uniform_int(members.size()));
      const auto& neighbors = nn[i];
      int j = neighbors[rng.uniform_int(neighbors.size())];
      double lambda = rng.uniform01();
      const auto& a = X[members[i]];
      const auto& b = X[members[j]];
      std::vector<double> syn(a.size());
      for (size_t f = 0; f < a.size(); ++f) syn[f] = a[f] + lambda * (b[f] - a[f]);
      res.X.push_back(std::move(syn));
      res.y.push_back(c);
    }
  }
  return res;
}

}  // namespace cinenet
