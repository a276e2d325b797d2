#pragma once

#include <cmath>
#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/graph.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

enum class CentralityKind { Degree, Betweenness, Eigenvector, Hub, Authority };

/// Scores indexed by graph node index; node_id resolution goes through the
/// graph the vector was computed for.
struct CentralityVector {
  CentralityKind kind = CentralityKind::Degree;
  std::vector<double> scores;

  double at(int v) const { return scores[v]; }
};

namespace detail {

struct BrandesWork {
  std::vector<int> dist, order;
  std::vector<long long> sigma;
  std::vector<std::vector<int>> preds;
  std::vector<double> delta;

  explicit BrandesWork(int n) : dist(n), sigma(n), preds(n), delta(n) { order.reserve(n); }
};

/// Brandes' single-source accumulation (unweighted). Adds dependency scores
/// for source s into acc.
inline void brandes_source(int s, const std::vector<std::vector<int>>& adj, BrandesWork& w,
                           std::vector<double>& acc) {
  std::fill(w.dist.begin(), w.dist.end(), -1);
  std::fill(w.sigma.begin(), w.sigma.end(), 0);
  std::fill(w.delta.begin(), w.delta.end(), 0.0);
  for (auto& p : w.preds) p.clear();
  w.order.clear();

  std::deque<int> q;
  w.dist[s] = 0;
  w.sigma[s] = 1;
  q.push_back(s);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    w.order.push_back(v);
    for (int x : adj[v]) {
      if (w.dist[x] < 0) {
        w.dist[x] = w.dist[v] + 1;
        q.push_back(x);
      }
      if (w.dist[x] == w.dist[v] + 1) {
        w.sigma[x] += w.sigma[v];
        w.preds[x].push_back(v);
      }
    }
  }
  for (auto it = w.order.rbegin(); it != w.order.rend(); ++it) {
    int t = *it;
    for (int v : w.preds[t])
      w.delta[v] += (static_cast<double>(w.sigma[v]) / w.sigma[t]) * (1.0 + w.delta[t]);
    if (t != s) acc[t] += w.delta[t];
  }
}

inline std::vector<std::vector<int>> out_adjacency(const CommunityGraph& g) {
  std::vector<std::vector<int>> adj(g.n_nodes());
  for (int v = 0; v < g.n_nodes(); ++v)
    for (const auto& e : g.out_edges(v)) adj[v].push_back(e.neighbor);
  return adj;
}

}  // namespace detail

/// Unnormalized betweenness over unweighted shortest paths. Directed mode
/// counts ordered pairs; the undirected projection counts each unordered pair
/// once (the raw Brandes sum is halved, the usual undirected convention).
inline CentralityVector betweenness(const CommunityGraph& g, bool directed,
                                    int n_threads = 1) {
  const int n = g.n_nodes();
  if (n == 0) throw ValidationError("betweenness: empty graph");
  const auto adj = directed ? detail::out_adjacency(g) : g.undirected_adjacency();

  // Fixed-size source blocks keep the floating-point merge order independent
  // of the worker count.
  const int block = 64;
  const int n_blocks = (n + block - 1) / block;
  std::vector<std::vector<double>> partial(n_blocks);
  parallel_chunks(n_blocks, n_threads, [&](int lo, int hi) {
    detail::BrandesWork work(n);
    for (int b = lo; b < hi; ++b) {
      auto& acc = partial[b];
      acc.assign(n, 0.0);
      for (int s = b * block; s < std::min(n, (b + 1) * block); ++s)
        detail::brandes_source(s, adj, work, acc);
    }
  });

  CentralityVector out;
  out.kind = CentralityKind::Betweenness;
  out.scores.assign(n, 0.0);
  for (const auto& acc : partial)
    for (int v = 0; v < n; ++v) out.scores[v] += acc[v];
  if (!directed)
    for (auto& x : out.scores) x /= 2.0;
  return out;
}

namespace detail {

inline std::vector<int> component_labels(const std::vector<std::vector<int>>& adj, int& n_comp) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> label(n, -1);
  n_comp = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::deque<int> q{s};
    label[s] = n_comp;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int x : adj[v])
        if (label[x] < 0) {
          label[x] = n_comp;
          q.push_back(x);
        }
    }
    ++n_comp;
  }
  return label;
}

}  // namespace detail

/// Power iteration on the undirected projection, shifted by +I so bipartite
/// components converge too. Disconnected graphs are handled per component;
/// the assembled vector is scaled to unit L2 norm.
inline CentralityVector eigenvector_centrality(const CommunityGraph& g, double tol = 1e-12,
                                               int max_iter = 100000) {
  const int n = g.n_nodes();
  if (n == 0) throw ValidationError("eigenvector_centrality: empty graph");
  auto adj = g.undirected_adjacency();
  int n_comp = 0;
  auto label = detail::component_labels(adj, n_comp);

  std::vector<double> result(n, 0.0);
  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> members;
    for (int v = 0; v < n; ++v)
      if (label[v] == c) members.push_back(v);
    const size_t m = members.size();
    std::vector<int> local(n, -1);
    for (size_t i = 0; i < m; ++i) local[members[i]] = static_cast<int>(i);

    std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m))), next(m);
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
      for (size_t i = 0; i < m; ++i) {
        double s = v[i];  // +I shift
        for (int x : adj[members[i]]) s += v[local[x]];
        next[i] = s;
      }
      double norm = 0;
      for (double x : next) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0) throw ComputeError("eigenvector_centrality: zero iterate");
      double change = 0;
      for (size_t i = 0; i < m; ++i) {
        next[i] /= norm;
        change += (next[i] - v[i]) * (next[i] - v[i]);
      }
      v = next;
      if (std::sqrt(change) < tol) converged = true;
    }
    if (!converged)
      throw ComputeError("eigenvector_centrality: no convergence after " +
                         std::to_string(max_iter) + " iterations");
    for (size_t i = 0; i < m; ++i) result[members[i]] = v[i];
  }

  double norm = 0;
  for (double x : result) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : result) x /= norm;

  CentralityVector out;
  out.kind = CentralityKind::Eigenvector;
  out.scores = std::move(result);
  return out;
}

/// Classic HITS over the directed link structure (weights ignored), L2
/// normalization each half-step.
inline std::pair<CentralityVector, CentralityVector> hits(const CommunityGraph& g,
                                                          double tol = 1e-12,
                                                          int max_iter = 100000) {
  const int n = g.n_nodes();
  if (n == 0 || g.n_edges() == 0) throw ComputeError("hits: graph has no edges");

  std::vector<double> hub(n, 1.0 / std::sqrt(static_cast<double>(n))), auth(n);
  std::vector<double> new_auth(n), new_hub(n);
  auth = hub;
  auto normalize = [](std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s == 0) throw ComputeError("hits: zero vector during iteration");
    for (double& x : v) x /= s;
  };

  bool converged = false;
  for (int it = 0; it < max_iter && !converged; ++it) {
    for (int v = 0; v < n; ++v) {
      double s = 0;
      for (const auto& e : g.in_edges(v)) s += hub[e.neighbor];
      new_auth[v] = s;
    }
    normalize(new_auth);
    for (int v = 0; v < n; ++v) {
      double s = 0;
      for (const auto& e : g.out_edges(v)) s += new_auth[e.neighbor];
      new_hub[v] = s;
    }
    normalize(new_hub);
    double change = 0;
    for (int v = 0; v < n; ++v) {
      change += (new_auth[v] - auth[v]) * (new_auth[v] - auth[v]);
      change += (new_hub[v] - hub[v]) * (new_hub[v] - hub[v]);
    }
    auth = new_auth;
    hub = new_hub;
    if (std::sqrt(change) < tol) converged = true;
  }
  if (!converged)
    throw ComputeError("hits: no convergence after " + std::to_string(max_iter) + " iterations");

  CentralityVector h, a;
  h.kind = CentralityKind::Hub;
  h.scores = std::move(hub);
  a.kind = CentralityKind::Authority;
  a.scores = std::move(auth);
  return {std::move(h), std::move(a)};
}

/// Mean local clustering coefficient over the undirected projection; nodes
/// with fewer than two neighbors contribute 0.
inline double avg_clustering(const CommunityGraph& g, int n_threads = 1) {
  const int n = g.n_nodes();
  if (n == 0) throw ValidationError("avg_clustering: empty graph");
  auto adj = g.undirected_adjacency();
  std::vector<double> coef(n, 0.0);
  parallel_chunks(n, n_threads, [&](int lo, int hi) {
    for (int v = lo; v < hi; ++v) {
      const auto& nv = adj[v];
      const size_t d = nv.size();
      if (d < 2) continue;
      long long links = 0;  // ordered neighbor pairs that are adjacent
      for (int u : nv) {
        const auto& nu = adj[u];
        size_t i = 0, j = 0;
        while (i < nv.size() && j < nu.size()) {
          if (nv[i] == nu[j]) {
            ++links;
            ++i;
            ++j;
          } else if (nv[i] < nu[j]) {
            ++i;
          } else {
            ++j;
          }
        }
      }
      coef[v] = static_cast<double>(links) / (static_cast<double>(d) * (d - 1));
    }
  });
  double s = 0;
  for (double x : coef) s += x;
  return s / n;
}

namespace detail {

inline std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int s) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> q{s};
  dist[s] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int x : adj[v])
      if (dist[x] < 0) {
        dist[x] = dist[v] + 1;
        q.push_back(x);
      }
  }
  return dist;
}

inline std::vector<int> largest_component(const std::vector<std::vector<int>>& adj) {
  int n_comp = 0;
  auto label = component_labels(adj, n_comp);
  std::vector<int> size(n_comp, 0);
  for (int l : label) size[l] += 1;
  int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<int> members;
  for (int v = 0; v < static_cast<int>(adj.size()); ++v)
    if (label[v] == best) members.push_back(v);
  return members;
}

}  // namespace detail

/// Exact mean pairwise BFS distance within the largest component of the
/// undirected projection.
inline double avg_shortest_path_exact(const CommunityGraph& g) {
  auto adj = g.undirected_adjacency();
  auto members = detail::largest_component(adj);
  if (members.size() < 2)
    throw ValidationError("avg_shortest_path: largest component has fewer than 2 nodes");
  double total = 0;
  long long pairs = 0;
  for (int s : members) {
    auto dist = detail::bfs_distances(adj, s);
    for (int t : members)
      if (t > s && dist[t] > 0) {
        total += dist[t];
        ++pairs;
      }
  }
  return total / static_cast<double>(pairs);
}

/// Monte-Carlo estimate over sampled ordered pairs within the largest
/// component. Pairs are grouped by source so each source costs one BFS.
inline double avg_shortest_path_sampled(const CommunityGraph& g, int sample_pairs,
                                        uint64_t seed) {
  auto adj = g.undirected_adjacency();
  auto members = detail::largest_component(adj);
  if (members.size() < 2)
    throw ValidationError("avg_shortest_path: largest component has fewer than 2 nodes");
  Rng rng(mix_seed(seed, "avg_path"));
  std::vector<std::pair<int, int>> wanted(sample_pairs);
  const int m = static_cast<int>(members.size());
  for (auto& [u, v] : wanted) {
    u = rng.uniform_int(m);
    v = rng.uniform_int(m - 1);
    if (v >= u) ++v;
  }
  std::sort(wanted.begin(), wanted.end());
  double total = 0;
  long long used = 0;
  size_t i = 0;
  while (i < wanted.size()) {
    int src = wanted[i].first;
    auto dist = detail::bfs_distances(adj, members[src]);
    while (i < wanted.size() && wanted[i].first == src) {
      int d = dist[members[wanted[i].second]];
      if (d > 0) {
        total += d;
        ++used;
      }
      ++i;
    }
  }
  if (used == 0) throw ComputeError("avg_shortest_path: no reachable sampled pairs");
  return total / static_cast<double>(used);
}

/// Exact when the largest component has at most 1000 nodes, sampled otherwise.
inline double avg_shortest_path(const CommunityGraph& g, int sample_pairs = 20000,
                                uint64_t seed = 1) {
  auto adj = g.undirected_adjacency();
  auto members = detail::largest_component(adj);
  if (members.size() <= 1000) return avg_shortest_path_exact(g);
  return avg_shortest_path_sampled(g, sample_pairs, seed);
}

// ---------------------------------------------------------------------------
// stats.csv emission
// ---------------------------------------------------------------------------

struct GraphSummary {
  int n_nodes = 0;
  size_t n_edges = 0;
  double clustering = 0.0;
  double avg_path = 0.0;
};

inline std::string summary_csv(const GraphSummary& s) {
  std::string out = "metric,value\n";
  out += csv_row({"nodes", std::to_string(s.n_nodes)});
  out += csv_row({"edges", std::to_string(s.n_edges)});
  out += csv_row({"avg_clustering", format_double(s.clustering)});
  out += csv_row({"avg_shortest_path", format_double(s.avg_path)});
  return out;
}

/// Per-node diagnostics table. Betweenness is computed on the directed graph.
inline std::string stats_csv(const CommunityGraph& g, int n_threads = 1) {
  auto btw = betweenness(g, true, n_threads);
  auto eig = eigenvector_centrality(g);
  auto [hub, auth] = hits(g);
  std::string out = "node_id,kind,degree_in,degree_out,betweenness,eigenvector,hub,authority\n";
  for (int v = 0; v < g.n_nodes(); ++v) {
    out += csv_row({g.node(v).id(), node_kind_name(g.node(v).kind),
                    std::to_string(g.degree(v, Direction::In)),
                    std::to_string(g.degree(v, Direction::Out)), format_double(btw.at(v)),
                    format_double(eig.at(v)), format_double(hub.at(v)),
                    format_double(auth.at(v))});
  }
  return out;
}

}  // namespace cinenet
