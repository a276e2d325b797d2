#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/graph.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

/// Walker's alias method; O(n) build, O(1) sample.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    const size_t n = weights.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw ValidationError("alias table: negative weight");
      total += w;
    }
    if (n == 0 || total <= 0) throw ValidationError("alias table: no positive weight");

    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
    std::vector<int> small, large;
    for (size_t i = 0; i < n; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
    while (!small.empty() && !large.empty()) {
      int s = small.back(), l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = scaled[l] + scaled[s] - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (int i : large) prob_[i] = 1.0;
    for (int i : small) prob_[i] = 1.0;  // numeric leftovers
  }

  int sample(Rng& rng) const {
    int i = rng.uniform_int(static_cast<int>(prob_.size()));
    return rng.uniform01() < prob_[i] ? i : alias_[i];
  }

  size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

struct WalkConfig {
  int walks_per_node = 10;  // 200 in the source setting; desk-scale default
  int walk_length = 40;     // 80 in the source setting
  double p = 1.0;
  double q = 1.0;
  uint64_t seed = 1;

  void validate() const {
    if (walks_per_node < 1 || walk_length < 2)
      throw ValidationError("walk config: need walks_per_node >= 1 and walk_length >= 2");
    if (!(p > 0) || !(q > 0)) throw ValidationError("walk config: p and q must be positive");
  }
};

struct EmbedConfig {
  int dim = 24;
  int window = 5;
  int negatives_per_positive = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  uint64_t seed = 1;
  int hogwild_threads = 1;  // > 1 trades determinism for speed

  void validate() const {
    if (dim < 1 || window < 1) throw ValidationError("embed config: need dim >= 1, window >= 1");
    if (negatives_per_positive < 0 || epochs < 0)
      throw ValidationError("embed config: negative counts");
    if (!(learning_rate > 0)) throw ValidationError("embed config: learning_rate must be > 0");
    if (hogwild_threads < 1) throw ValidationError("embed config: hogwild_threads must be >= 1");
  }
};

struct WalkCorpus {
  int n_nodes = 0;
  std::vector<std::vector<int>> walks;
};

/// Second-order transition distribution over out-neighbors of cur, aligned
/// with graph.out_edges(cur). alpha = 1/p toward prev, 1 toward nodes prev
/// links to, 1/q otherwise, scaled by edge weight. prev = -1 means first step
/// (weight-proportional). Empty result when cur is a dead end.
inline std::vector<double> transition_probs(const CommunityGraph& g, int prev, int cur, double p,
                                            double q) {
  if (prev >= 0 && !g.has_edge(prev, cur))
    throw ValidationError("transition_probs: prev->cur edge missing");
  const auto& out = g.out_edges(cur);
  std::vector<double> probs(out.size());
  if (out.empty()) return probs;
  double total = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    double alpha;
    if (prev < 0)
      alpha = 1.0;
    else if (out[i].neighbor == prev)
      alpha = 1.0 / p;
    else if (g.has_edge(prev, out[i].neighbor))
      alpha = 1.0;
    else
      alpha = 1.0 / q;
    probs[i] = out[i].weight * alpha;
    total += probs[i];
  }
  for (double& x : probs) x /= total;
  return probs;
}

/// Alias tables for every (prev -> cur) edge state plus first-step tables per
/// node; a walk step is two RNG draws.
class Node2VecSampler {
 public:
  Node2VecSampler(const CommunityGraph& g, double p, double q, int n_threads = 1) : g_(g) {
    const int n = g.n_nodes();
    node_tables_.resize(n);
    edge_offset_.assign(n + 1, 0);
    for (int v = 0; v < n; ++v)
      edge_offset_[v + 1] = edge_offset_[v] + g.out_edges(v).size();
    edge_tables_.resize(edge_offset_[n]);

    parallel_chunks(n, n_threads, [&](int lo, int hi) {
      std::vector<double> w;
      for (int v = lo; v < hi; ++v) {
        const auto& out = g.out_edges(v);
        if (out.empty()) continue;
        w.resize(out.size());
        for (size_t i = 0; i < out.size(); ++i) w[i] = out[i].weight;
        node_tables_[v] = AliasTable(w);
        for (size_t k = 0; k < out.size(); ++k) {
          int cur = out[k].neighbor;
          auto probs = transition_probs(g, v, cur, p, q);
          if (!probs.empty()) edge_tables_[edge_offset_[v] + k] = AliasTable(probs);
        }
      }
    });
  }

  /// One walk of at most `len` nodes from `start`.
  std::vector<int> walk(int start, int len, Rng& rng) const {
    std::vector<int> path{start};
    if (len < 2 || g_.out_edges(start).empty()) return path;
    int cur = g_.out_edges(start)[node_tables_[start].sample(rng)].neighbor;
    path.push_back(cur);
    int prev = start;
    while (static_cast<int>(path.size()) < len) {
      const auto& out = g_.out_edges(cur);
      if (out.empty()) break;
      size_t eidx = edge_index(prev, cur);
      int next = out[edge_tables_[eidx].sample(rng)].neighbor;
      path.push_back(next);
      prev = cur;
      cur = next;
    }
    return path;
  }

  /// Draws one step from the (prev, cur) state; used by distribution tests.
  int step(int prev, int cur, Rng& rng) const {
    const auto& out = g_.out_edges(cur);
    if (out.empty()) throw ValidationError("step: dead end");
    return out[edge_tables_[edge_index(prev, cur)].sample(rng)].neighbor;
  }

 private:
  size_t edge_index(int prev, int cur) const {
    const auto& out = g_.out_edges(prev);
    auto it = std::lower_bound(out.begin(), out.end(), cur,
                               [](const CommunityGraph::Edge& e, int d) { return e.neighbor < d; });
    if (it == out.end() || it->neighbor != cur)
      throw ValidationError("walk state references a missing edge");
    return edge_offset_[prev] + static_cast<size_t>(it - out.begin());
  }

  const CommunityGraph& g_;
  std::vector<AliasTable> node_tables_;
  std::vector<size_t> edge_offset_;
  std::vector<AliasTable> edge_tables_;
};

/// r walks per node in per-round shuffled node order. Each walk has its own
/// seed stream, so the corpus is identical for any thread count.
inline WalkCorpus simulate_walks(const CommunityGraph& g, const WalkConfig& cfg,
                                 int n_threads = 1) {
  cfg.validate();
  const int n = g.n_nodes();
  if (n == 0) throw ValidationError("simulate_walks: empty graph");
  Node2VecSampler sampler(g, cfg.p, cfg.q, n_threads);

  WalkCorpus corpus;
  corpus.n_nodes = n;
  corpus.walks.resize(static_cast<size_t>(n) * cfg.walks_per_node);

  std::vector<std::vector<int>> orders(cfg.walks_per_node);
  for (int k = 0; k < cfg.walks_per_node; ++k) {
    auto& order = orders[k];
    order.resize(n);
    for (int v = 0; v < n; ++v) order[v] = v;
    Rng order_rng(mix_seed(mix_seed(cfg.seed, "walk_order"), static_cast<uint64_t>(k)));
    order_rng.shuffle(order);
  }

  const uint64_t walk_base = mix_seed(cfg.seed, "walks");
  parallel_chunks(n * cfg.walks_per_node, n_threads, [&](int lo, int hi) {
    for (int j = lo; j < hi; ++j) {
      int round = j / n, pos = j % n;
      int start = orders[round][pos];
      Rng rng(mix_seed(walk_base,
                       static_cast<uint64_t>(start) * cfg.walks_per_node + round));
      corpus.walks[j] = sampler.walk(start, cfg.walk_length, rng);
    }
  });
  return corpus;
}

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling
// ---------------------------------------------------------------------------

/// Input and output vector tables with the SGNS loss
///   -log sigmoid(u_ctx . v_c) - sum_neg log sigmoid(-u_neg . v_c).
class SkipGramModel {
 public:
  SkipGramModel(int vocab, int dim, uint64_t seed) : vocab_(vocab), dim_(dim) {
    Rng rng(mix_seed(seed, "sg_init"));
    in_.resize(static_cast<size_t>(vocab) * dim);
    out_.resize(static_cast<size_t>(vocab) * dim);
    const double half = 0.5 / dim;
    for (auto& x : in_) x = rng.uniform(-half, half);
    for (auto& x : out_) x = rng.uniform(-half, half);
  }

  int vocab() const { return vocab_; }
  int dim() const { return dim_; }
  const double* input(int w) const { return &in_[static_cast<size_t>(w) * dim_]; }
  double* input(int w) { return &in_[static_cast<size_t>(w) * dim_]; }
  const double* output(int w) const { return &out_[static_cast<size_t>(w) * dim_]; }
  double* output(int w) { return &out_[static_cast<size_t>(w) * dim_]; }

  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  double pair_loss(int center, int context, const std::vector<int>& negs) const {
    const double* v = input(center);
    double loss = -log_sigmoid(dot(output(context), v));
    for (int ng : negs) loss -= log_sigmoid(-dot(output(ng), v));
    return loss;
  }

  /// Analytic gradients of pair_loss with respect to v_center, u_context and
  /// each u_neg; the update path applies exactly these.
  void pair_gradients(int center, int context, const std::vector<int>& negs,
                      std::vector<double>& g_center, std::vector<double>& g_context,
                      std::vector<std::vector<double>>& g_negs) const {
    const double* v = input(center);
    const double* uo = output(context);
    g_center.assign(dim_, 0.0);
    g_context.assign(dim_, 0.0);
    g_negs.assign(negs.size(), std::vector<double>(dim_, 0.0));

    double so = sigmoid(dot(uo, v)) - 1.0;
    for (int k = 0; k < dim_; ++k) {
      g_center[k] += so * uo[k];
      g_context[k] = so * v[k];
    }
    for (size_t i = 0; i < negs.size(); ++i) {
      const double* un = output(negs[i]);
      double sn = sigmoid(dot(un, v));
      for (int k = 0; k < dim_; ++k) {
        g_center[k] += sn * un[k];
        g_negs[i][k] = sn * v[k];
      }
    }
  }

  /// work is caller-owned scratch so concurrent hogwild shards do not share
  /// gradient buffers.
  void pair_update(int center, int context, const std::vector<int>& negs, double lr,
                   std::vector<double>& work) {
    double* v = input(center);
    double* uo = output(context);
    double so = sigmoid(dot(uo, v)) - 1.0;
    work.assign(dim_, 0.0);
    for (int k = 0; k < dim_; ++k) work[k] = so * uo[k];
    for (int k = 0; k < dim_; ++k) uo[k] -= lr * so * v[k];
    for (int ng : negs) {
      double* un = output(ng);
      double sn = sigmoid(dot(un, v));
      for (int k = 0; k < dim_; ++k) work[k] += sn * un[k];
      for (int k = 0; k < dim_; ++k) un[k] -= lr * sn * v[k];
    }
    for (int k = 0; k < dim_; ++k) v[k] -= lr * work[k];
  }

  void pair_update(int center, int context, const std::vector<int>& negs, double lr) {
    std::vector<double> work;
    pair_update(center, context, negs, lr, work);
  }

 private:
  double dot(const double* a, const double* b) const {
    double s = 0;
    for (int k = 0; k < dim_; ++k) s += a[k] * b[k];
    return s;
  }
  static double log_sigmoid(double x) {
    // -log(1+exp(-x)) computed stably
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
  }

  int vocab_, dim_;
  std::vector<double> in_, out_;
};

namespace detail {

inline AliasTable unigram_table(const WalkCorpus& corpus) {
  std::vector<double> counts(corpus.n_nodes, 0.0);
  for (const auto& w : corpus.walks)
    for (int t : w) counts[t] += 1.0;
  for (double& c : counts) c = std::pow(c, 0.75);
  return AliasTable(counts);
}

template <typename PairFn>
inline void corpus_pairs(const std::vector<int>& walk, int window, PairFn&& fn) {
  const int len = static_cast<int>(walk.size());
  for (int i = 0; i < len; ++i)
    for (int j = std::max(0, i - window); j <= std::min(len - 1, i + window); ++j)
      if (j != i) fn(walk[i], walk[j]);
}

}  // namespace detail

/// Deterministic in single-threaded mode; hogwild_threads > 1 switches to
/// lock-free parallel updates over walk shards (unsynchronized, not
/// reproducible run to run).
inline SkipGramModel train_skipgram(const WalkCorpus& corpus, const EmbedConfig& cfg) {
  cfg.validate();
  if (corpus.n_nodes == 0 || corpus.walks.empty())
    throw ValidationError("train_skipgram: empty corpus");
  SkipGramModel model(corpus.n_nodes, cfg.dim, cfg.seed);
  if (cfg.epochs == 0) return model;
  AliasTable table = detail::unigram_table(corpus);

  auto train_shard = [&](size_t walk_lo, size_t walk_hi, Rng& rng) {
    std::vector<int> negs;
    std::vector<double> work;
    for (size_t wi = walk_lo; wi < walk_hi; ++wi) {
      detail::corpus_pairs(corpus.walks[wi], cfg.window, [&](int center, int context) {
        negs.clear();
        for (int s = 0; s < cfg.negatives_per_positive; ++s) {
          int ng = table.sample(rng);
          if (ng != context) negs.push_back(ng);
        }
        model.pair_update(center, context, negs, cfg.learning_rate, work);
      });
    }
  };

  for (int ep = 0; ep < cfg.epochs; ++ep) {
    if (cfg.hogwild_threads == 1) {
      Rng rng(mix_seed(mix_seed(cfg.seed, "sg_neg"), static_cast<uint64_t>(ep)));
      train_shard(0, corpus.walks.size(), rng);
    } else {
      parallel_chunks(static_cast<int>(corpus.walks.size()), cfg.hogwild_threads,
                      [&](int lo, int hi) {
                        Rng rng(mix_seed(mix_seed(cfg.seed, "sg_neg"),
                                         static_cast<uint64_t>(ep) * 1315423911u +
                                             static_cast<uint64_t>(lo)));
                        train_shard(lo, hi, rng);
                      });
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Embedding table and export
// ---------------------------------------------------------------------------

struct EmbeddingTable {
  std::vector<std::string> node_ids;           // aligned with vectors
  std::vector<std::vector<double>> vectors;
  double p = 1.0, q = 1.0;
  int dim = 0, walks_per_node = 0, walk_length = 0;
  uint64_t seed = 0;

  const std::vector<double>* find(const std::string& node_id) const {
    auto it = index_.find(node_id);
    return it == index_.end() ? nullptr : &vectors[it->second];
  }

  void build_index() {
    index_.clear();
    for (size_t i = 0; i < node_ids.size(); ++i) index_[node_ids[i]] = i;
  }

 private:
  std::map<std::string, size_t> index_;
};

inline EmbeddingTable embed_pipeline(const CommunityGraph& g, const WalkConfig& wcfg,
                                     const EmbedConfig& ecfg, int n_threads = 1) {
  WalkCorpus corpus = simulate_walks(g, wcfg, n_threads);
  SkipGramModel model = train_skipgram(corpus, ecfg);

  EmbeddingTable table;
  table.p = wcfg.p;
  table.q = wcfg.q;
  table.dim = ecfg.dim;
  table.walks_per_node = wcfg.walks_per_node;
  table.walk_length = wcfg.walk_length;
  table.seed = wcfg.seed;
  for (int v = 0; v < g.n_nodes(); ++v) {
    table.node_ids.push_back(g.node(v).id());
    table.vectors.emplace_back(model.input(v), model.input(v) + ecfg.dim);
    for (double x : table.vectors.back())
      if (!std::isfinite(x)) throw ComputeError("embed_pipeline: non-finite embedding");
  }
  table.build_index();
  return table;
}

inline std::string embeddings_csv(const EmbeddingTable& t) {
  std::string out = "# p=" + format_double(t.p) + " q=" + format_double(t.q) +
                    " d=" + std::to_string(t.dim) + " r=" + std::to_string(t.walks_per_node) +
                    " l=" + std::to_string(t.walk_length) + " seed=" + std::to_string(t.seed) +
                    "\n";
  out += "node_id";
  for (int k = 0; k < t.dim; ++k) out += ",e" + std::to_string(k);
  out += "\n";
  for (size_t i = 0; i < t.node_ids.size(); ++i) {
    std::vector<std::string> row{t.node_ids[i]};
    for (double x : t.vectors[i]) row.push_back(format_double(x));
    out += csv_row(row);
  }
  return out;
}

inline EmbeddingTable read_embeddings_csv(std::istream& in, const std::string& path) {
  EmbeddingTable t;
  std::string meta;
  if (!std::getline(in, meta) || meta.rfind("# ", 0) != 0)
    throw ParseError(path + ": missing embeddings metadata line");
  for (const auto& kv : split(meta.substr(2), ' ')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "p") t.p = parse_double(val, path + " p");
    else if (key == "q") t.q = parse_double(val, path + " q");
    else if (key == "d") t.dim = static_cast<int>(parse_ll(val, path + " d"));
    else if (key == "r") t.walks_per_node = static_cast<int>(parse_ll(val, path + " r"));
    else if (key == "l") t.walk_length = static_cast<int>(parse_ll(val, path + " l"));
    else if (key == "seed") t.seed = static_cast<uint64_t>(parse_ll(val, path + " seed"));
  }
  CsvReader r(in, path);
  std::vector<std::string> row;
  if (!r.next(row) || row.empty() || row[0] != "node_id")
    throw ParseError(path + ": missing embeddings column header");
  const size_t want = row.size();
  if (t.dim <= 0 || want != static_cast<size_t>(t.dim) + 1)
    throw ParseError(path + ": header width disagrees with d");
  while (r.next(row)) {
    if (row.size() != want)
      throw ParseError(r.context() + ": expected " + std::to_string(want) + " fields");
    t.node_ids.push_back(row[0]);
    std::vector<double> vec(t.dim);
    for (int k = 0; k < t.dim; ++k) vec[k] = parse_double(row[k + 1], r.context());
    t.vectors.push_back(std::move(vec));
  }
  t.build_index();
  return t;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open file: " + path);
  return read_embeddings_csv(f, path);
}

}  // namespace cinenet
