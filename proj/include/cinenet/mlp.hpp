#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/model.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

struct MlpParams {
  int epochs = 30;
  double learning_rate = 0.01;
  int batch_size = 32;
  double dropout_rate = 0.2;
  uint64_t seed = 1;

  void validate() const {
    if (epochs < 0) throw ValidationError("mlp: epochs must be non-negative");
    if (!(learning_rate > 0)) throw ValidationError("mlp: learning_rate must be positive");
    if (batch_size < 1) throw ValidationError("mlp: batch_size must be >= 1");
    if (dropout_rate < 0 || dropout_rate >= 1)
      throw ValidationError("mlp: dropout_rate must be in [0, 1)");
  }
};

/// Fixed-architecture classifier: input -> 64 ReLU -> 16 ReLU -> 4 softmax,
/// trained by mini-batch SGD on cross-entropy with inverted dropout after
/// each hidden layer. Weights live in one flat vector so finite-difference
/// checks can perturb single parameters.
class MlpModel final : public Model {
 public:
  static constexpr int kHidden1 = 64;
  static constexpr int kHidden2 = 16;
  static constexpr int kOutputs = 4;

  MlpModel() = default;

  static std::vector<long long> param_count(int input_dim) {
    return {static_cast<long long>(kHidden1) * (input_dim + 1),
            static_cast<long long>(kHidden2) * (kHidden1 + 1),
            static_cast<long long>(kOutputs) * (kHidden2 + 1)};
  }

  static MlpModel init(int n_features, uint64_t seed) {
    if (n_features < 1) throw ValidationError("mlp: n_features must be >= 1");
    MlpModel m;
    m.n_features_ = n_features;
    m.weights_.assign(m.offset_end(), 0.0);
    Rng rng(mix_seed(seed, "mlp_init"));
    auto glorot = [&](size_t begin, int fan_out, int fan_in) {
      double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (int j = 0; j < fan_out * fan_in; ++j)
        m.weights_[begin + j] = rng.uniform(-limit, limit);
    };
    glorot(m.ow1(), kHidden1, n_features);
    glorot(m.ow2(), kHidden2, kHidden1);
    glorot(m.ow3(), kOutputs, kHidden2);
    return m;
  }

  static MlpModel fit(const Matrix& X, const std::vector<int>& y, const MlpParams& params,
                      int n_classes) {
    params.validate();
    if (X.empty()) throw ValidationError("mlp: empty dataset");
    if (X.size() != y.size()) throw ValidationError("mlp: X and y length mismatch");
    if (n_classes != kOutputs) throw ValidationError("mlp: output layer is fixed at 4 classes");
    for (int label : y)
      if (label < 0 || label >= kOutputs) throw ValidationError("mlp: label out of range");

    MlpModel m = init(static_cast<int>(X[0].size()), params.seed);
    m.check_width(X);
    size_t n = X.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<double> grad(m.weights_.size());
    std::vector<size_t> batch;
    for (int ep = 0; ep < params.epochs; ++ep) {
      Rng order_rng(mix_seed(mix_seed(params.seed, "mlp_order"), ep));
      order_rng.shuffle(order);
      Rng drop_rng(mix_seed(mix_seed(params.seed, "mlp_drop"), ep));
      for (size_t start = 0; start < n; start += params.batch_size) {
        size_t stop = std::min(n, start + params.batch_size);
        batch.assign(order.begin() + start, order.begin() + stop);
        m.batch_gradient(X, y, batch, grad, params.dropout_rate, &drop_rng);
        for (size_t j = 0; j < grad.size(); ++j)
          m.weights_[j] -= params.learning_rate * grad[j];
      }
    }
    return m;
  }

  std::string kind() const override { return "mlp"; }
  int n_features() const override { return n_features_; }
  int n_classes() const override { return kOutputs; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }

  Matrix predict_proba(const Matrix& X) const override {
    check_width(X);
    Matrix out(X.size(), std::vector<double>(kOutputs));
    std::vector<double> a1(kHidden1), a2(kHidden2);
    for (size_t i = 0; i < X.size(); ++i) forward(X[i], a1, a2, out[i]);
    return out;
  }

  /// Mean cross-entropy over the given rows with dropout disabled.
  double loss(const Matrix& X, const std::vector<int>& y) const {
    check_width(X);
    std::vector<double> a1(kHidden1), a2(kHidden2), out(kOutputs);
    double total = 0;
    for (size_t i = 0; i < X.size(); ++i) {
      forward(X[i], a1, a2, out);
      total += -std::log(std::max(out[y[i]], 1e-300));
    }
    return total / X.size();
  }

  /// Analytic gradient of loss() in flat layout, dropout disabled.
  std::vector<double> gradient(const Matrix& X, const std::vector<int>& y) const {
    check_width(X);
    std::vector<size_t> idx(X.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::vector<double> grad(weights_.size());
    batch_gradient(X, y, idx, grad, 0.0, nullptr);
    return grad;
  }

  void save(std::ostream& out) const override {
    out << "mlp " << n_features_ << " " << kOutputs << " " << weights_.size() << "\n";
    for (size_t j = 0; j < weights_.size(); ++j)
      out << format_double(weights_[j]) << (j + 1 == weights_.size() ? "\n" : " ");
  }

  static MlpModel load(std::istream& in) {
    detail::expect_token(in, "mlp", "model kind");
    MlpModel m;
    return load_body(in, m);
  }

  static MlpModel load_body(std::istream& in, MlpModel& m) {
    m.n_features_ = static_cast<int>(detail::read_ll(in, "n_features"));
    long long nc = detail::read_ll(in, "n_classes");
    if (nc != kOutputs) throw ParseError("mlp: unexpected class count");
    long long count = detail::read_ll(in, "weight count");
    if (count != static_cast<long long>(m.offset_end()))
      throw ParseError("mlp: weight count does not match the architecture");
    m.weights_.resize(count);
    for (auto& w : m.weights_) w = detail::read_double(in, "weight");
    return std::move(m);
  }

 private:
  size_t ow1() const { return 0; }
  size_t ob1() const { return ow1() + static_cast<size_t>(kHidden1) * n_features_; }
  size_t ow2() const { return ob1() + kHidden1; }
  size_t ob2() const { return ow2() + static_cast<size_t>(kHidden2) * kHidden1; }
  size_t ow3() const { return ob2() + kHidden2; }
  size_t ob3() const { return ow3() + static_cast<size_t>(kOutputs) * kHidden2; }
  size_t offset_end() const { return ob3() + kOutputs; }

  void forward(const std::vector<double>& x, std::vector<double>& a1, std::vector<double>& a2,
               std::vector<double>& out) const {
    const double* w = weights_.data();
    for (int j = 0; j < kHidden1; ++j) {
      double z = w[ob1() + j];
      const double* row = w + ow1() + static_cast<size_t>(j) * n_features_;
      for (int k = 0; k < n_features_; ++k) z += row[k] * x[k];
      a1[j] = z > 0 ? z : 0;
    }
    for (int j = 0; j < kHidden2; ++j) {
      double z = w[ob2() + j];
      const double* row = w + ow2() + static_cast<size_t>(j) * kHidden1;
      for (int k = 0; k < kHidden1; ++k) z += row[k] * a1[k];
      a2[j] = z > 0 ? z : 0;
    }
    double mx = -1e300;
    for (int j = 0; j < kOutputs; ++j) {
      double z = w[ob3() + j];
      const double* row = w + ow3() + static_cast<size_t>(j) * kHidden2;
      for (int k = 0; k < kHidden2; ++k) z += row[k] * a2[k];
      out[j] = z;
      mx = std::max(mx, z);
    }
    double total = 0;
    for (int j = 0; j < kOutputs; ++j) {
      out[j] = std::exp(out[j] - mx);
      total += out[j];
    }
    for (int j = 0; j < kOutputs; ++j) out[j] /= total;
  }

  /// Accumulates the mean-loss gradient over `idx`. When dropout is active a
  /// mask is drawn per hidden unit per sample, activations are scaled by
  /// 1/keep, and masked units receive no gradient.
  double batch_gradient(const Matrix& X, const std::vector<int>& y,
                        const std::vector<size_t>& idx, std::vector<double>& grad,
                        double dropout_rate, Rng* drop_rng) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double* w = weights_.data();
    double* g = grad.data();
    double keep = 1.0 - dropout_rate;
    bool dropping = dropout_rate > 0 && drop_rng != nullptr;

    std::vector<double> a1(kHidden1), a2(kHidden2), out(kOutputs);
    std::vector<double> d1(kHidden1), d2(kHidden2), d3(kOutputs);
    std::vector<char> m1(kHidden1, 1), m2(kHidden2, 1);
    double inv_b = 1.0 / idx.size();
    double total_loss = 0;

    for (size_t i : idx) {
      const auto& x = X[i];
      for (int j = 0; j < kHidden1; ++j) {
        double z = w[ob1() + j];
        const double* row = w + ow1() + static_cast<size_t>(j) * n_features_;
        for (int k = 0; k < n_features_; ++k) z += row[k] * x[k];
        a1[j] = z > 0 ? z : 0;
        if (dropping) {
          m1[j] = drop_rng->uniform01() < keep ? 1 : 0;
          a1[j] = m1[j] ? a1[j] / keep : 0.0;
        }
      }
      for (int j = 0; j < kHidden2; ++j) {
        double z = w[ob2() + j];
        const double* row = w + ow2() + static_cast<size_t>(j) * kHidden1;
        for (int k = 0; k < kHidden1; ++k) z += row[k] * a1[k];
        a2[j] = z > 0 ? z : 0;
        if (dropping) {
          m2[j] = drop_rng->uniform01() < keep ? 1 : 0;
          a2[j] = m2[j] ? a2[j] / keep : 0.0;
        }
      }
      double mx = -1e300;
      for (int j = 0; j < kOutputs; ++j) {
        double z = w[ob3() + j];
        const double* row = w + ow3() + static_cast<size_t>(j) * kHidden2;
        for (int k = 0; k < kHidden2; ++k) z += row[k] * a2[k];
        out[j] = z;
        mx = std::max(mx, z);
      }
      double total = 0;
      for (int j = 0; j < kOutputs; ++j) {
        out[j] = std::exp(out[j] - mx);
        total += out[j];
      }
      for (int j = 0; j < kOutputs; ++j) out[j] /= total;
      total_loss += -std::log(std::max(out[y[i]], 1e-300));

      for (int j = 0; j < kOutputs; ++j) d3[j] = (out[j] - (y[i] == j ? 1.0 : 0.0)) * inv_b;
      for (int j = 0; j < kOutputs; ++j) {
        double* grow = g + ow3() + static_cast<size_t>(j) * kHidden2;
        for (int k = 0; k < kHidden2; ++k) grow[k] += d3[j] * a2[k];
        g[ob3() + j] += d3[j];
      }
      for (int k = 0; k < kHidden2; ++k) {
        double s = 0;
        for (int j = 0; j < kOutputs; ++j) s += w[ow3() + static_cast<size_t>(j) * kHidden2 + k] * d3[j];
        if (a2[k] <= 0) s = 0;
        if (dropping && m2[k]) s /= keep;
        if (dropping && !m2[k]) s = 0;
        d2[k] = s;
      }
      for (int j = 0; j < kHidden2; ++j) {
        double* grow = g + ow2() + static_cast<size_t>(j) * kHidden1;
        for (int k = 0; k < kHidden1; ++k) grow[k] += d2[j] * a1[k];
        g[ob2() + j] += d2[j];
      }
      for (int k = 0; k < kHidden1; ++k) {
        double s = 0;
        for (int j = 0; j < kHidden2; ++j) s += w[ow2() + static_cast<size_t>(j) * kHidden1 + k] * d2[j];
        if (a1[k] <= 0) s = 0;
        if (dropping && m1[k]) s /= keep;
        if (dropping && !m1[k]) s = 0;
        d1[k] = s;
      }
      for (int j = 0; j < kHidden1; ++j) {
        double* grow = g + ow1() + static_cast<size_t>(j) * n_features_;
        for (int k = 0; k < n_features_; ++k) grow[k] += d1[j] * x[k];
        g[ob1() + j] += d1[j];
      }
    }
    return total_loss * inv_b;
  }

  int n_features_ = 0;
  std::vector<double> weights_;
};

inline ModelPtr train_mlp(const Matrix& X, const std::vector<int>& y, const MlpParams& params,
                          int n_classes) {
  return std::make_unique<MlpModel>(MlpModel::fit(X, y, params, n_classes));
}

}  // namespace cinenet
