#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cinenet/catalog.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

enum class NodeKind { Actor, Director, CastingDirector, TalentAgent };

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Actor: return "actor";
    case NodeKind::Director: return "director";
    case NodeKind::CastingDirector: return "casting_director";
    case NodeKind::TalentAgent: return "talent_agent";
  }
  return "?";
}

/// A person exercising one role-kind. A person with several roles appears as
/// one node per role-kind, keyed "person_id:kind".
struct NodeRef {
  std::string person_id;
  NodeKind kind = NodeKind::Actor;

  std::string id() const { return person_id + ":" + node_kind_name(kind); }
  auto operator<=>(const NodeRef&) const = default;
};

enum class Direction { In, Out, Total };

// Directed, role-typed, weighted collaboration graph. Edge weight counts
// co-occurrence events. Node order is canonical (sorted by person then kind),
// so construction is invariant to catalog row order.
class CommunityGraph {
 public:
  struct Edge {
    int neighbor;
    int weight;
  };

  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  size_t n_edges() const { return n_edges_; }
  const std::vector<NodeRef>& nodes() const { return nodes_; }
  const NodeRef& node(int i) const { return nodes_[i]; }

  int find_node(const NodeRef& ref) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), ref);
    if (it == nodes_.end() || !(*it == ref)) return -1;
    return static_cast<int>(it - nodes_.begin());
  }
  int find_node(const std::string& person_id, NodeKind kind) const {
    return find_node(NodeRef{person_id, kind});
  }

  const std::vector<Edge>& out_edges(int v) const { return out_[v]; }
  const std::vector<Edge>& in_edges(int v) const { return in_[v]; }

  bool has_edge(int src, int dst) const {
    const auto& es = out_[src];
    auto it = std::lower_bound(es.begin(), es.end(), dst,
                               [](const Edge& e, int d) { return e.neighbor < d; });
    return it != es.end() && it->neighbor == dst;
  }

  /// Incident edge count in the given direction; weights ignored.
  int degree(int v, Direction dir) const {
    if (v < 0 || v >= n_nodes()) throw ValidationError("degree: unknown node");
    switch (dir) {
      case Direction::In: return static_cast<int>(in_[v].size());
      case Direction::Out: return static_cast<int>(out_[v].size());
      case Direction::Total: return static_cast<int>(in_[v].size() + out_[v].size());
    }
    return 0;
  }

  int degree(const std::string& node_id, Direction dir) const {
    int v = node_by_id(node_id);
    if (v < 0) throw ValidationError("degree: unknown node '" + node_id + "'");
    return degree(v, dir);
  }

  int node_by_id(const std::string& node_id) const {
    size_t colon = node_id.rfind(':');
    if (colon == std::string::npos) return -1;
    for (NodeKind k : {NodeKind::Actor, NodeKind::Director, NodeKind::CastingDirector,
                       NodeKind::TalentAgent}) {
      if (node_id.substr(colon + 1) == node_kind_name(k))
        return find_node(node_id.substr(0, colon), k);
    }
    return -1;
  }

  /// Undirected projection: sorted, deduplicated union of in/out neighbors.
  std::vector<std::vector<int>> undirected_adjacency() const {
    std::vector<std::vector<int>> adj(n_nodes());
    for (int v = 0; v < n_nodes(); ++v) {
      auto& nb = adj[v];
      for (const auto& e : out_[v]) nb.push_back(e.neighbor);
      for (const auto& e : in_[v]) nb.push_back(e.neighbor);
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
  }

  static CommunityGraph build(const Catalog& catalog);

  /// Builds a graph from an explicit edge list (e.g. a previously exported
  /// one). Nodes are the union of endpoints, in canonical sorted order.
  static CommunityGraph from_edges(
      const std::vector<std::tuple<NodeRef, NodeRef, int>>& edges) {
    std::set<NodeRef> node_set;
    for (const auto& [src, dst, w] : edges) {
      if (src == dst) throw ValidationError("from_edges: self edge at " + src.id());
      if (w <= 0) throw ValidationError("from_edges: non-positive weight on " + src.id());
      node_set.insert(src);
      node_set.insert(dst);
    }
    CommunityGraph g;
    g.nodes_.assign(node_set.begin(), node_set.end());
    std::map<NodeRef, int> idx;
    for (int i = 0; i < g.n_nodes(); ++i) idx[g.nodes_[i]] = i;

    std::set<std::pair<int, int>> seen;
    g.out_.assign(g.n_nodes(), {});
    g.in_.assign(g.n_nodes(), {});
    for (const auto& [src, dst, w] : edges) {
      int s = idx.at(src), d = idx.at(dst);
      if (!seen.insert({s, d}).second)
        throw ValidationError("from_edges: duplicate edge " + src.id() + " -> " + dst.id());
      g.out_[s].push_back({d, w});
      g.in_[d].push_back({s, w});
    }
    auto by_neighbor = [](const Edge& a, const Edge& b) { return a.neighbor < b.neighbor; };
    for (auto& es : g.out_) std::sort(es.begin(), es.end(), by_neighbor);
    for (auto& es : g.in_) std::sort(es.begin(), es.end(), by_neighbor);
    g.n_edges_ = seen.size();
    return g;
  }

  std::string nodes_csv() const {
    std::string out = "node_id,kind\n";
    for (const auto& n : nodes_) out += csv_row({n.id(), node_kind_name(n.kind)});
    return out;
  }

  std::string edges_csv() const {
    std::string out = "src,dst,weight,src_kind,dst_kind\n";
    for (int v = 0; v < n_nodes(); ++v)
      for (const auto& e : out_[v])
        out += csv_row({nodes_[v].id(), nodes_[e.neighbor].id(), std::to_string(e.weight),
                        node_kind_name(nodes_[v].kind), node_kind_name(nodes_[e.neighbor].kind)});
    return out;
  }

 private:
  std::vector<NodeRef> nodes_;            // sorted
  std::vector<std::vector<Edge>> out_;    // sorted by neighbor
  std::vector<std::vector<Edge>> in_;
  size_t n_edges_ = 0;
};

namespace detail {

/// Distinct credited persons of one title for one role, sorted by person_id.
inline std::vector<std::string> title_role_members(const Catalog& c, const std::string& title_id,
                                                   Role role) {
  std::set<std::string> s;
  for (size_t ci : c.credits_of_title(title_id)) {
    const auto& cr = c.credits()[ci];
    if (cr.role == role) s.insert(cr.person_id);
  }
  return {s.begin(), s.end()};
}

}  // namespace detail

inline CommunityGraph CommunityGraph::build(const Catalog& catalog) {
  // Collect nodes: one per (person, role-kind) actually exercised in credits,
  // plus the talent agents of credited actors. Writers are not nodes.
  std::set<NodeRef> node_set;
  for (const auto& cr : catalog.credits()) {
    switch (cr.role) {
      case Role::Actor: node_set.insert({cr.person_id, NodeKind::Actor}); break;
      case Role::Director: node_set.insert({cr.person_id, NodeKind::Director}); break;
      case Role::CastingDirector:
        node_set.insert({cr.person_id, NodeKind::CastingDirector});
        break;
      default: break;
    }
  }
  std::vector<std::pair<std::string, std::string>> agent_links;  // (actor, agent)
  for (const auto& ref : node_set) {
    if (ref.kind != NodeKind::Actor) continue;
    const PersonRecord* p = catalog.find_person(ref.person_id);
    if (p && p->agent_id) agent_links.emplace_back(ref.person_id, *p->agent_id);
  }
  for (const auto& [actor, agent] : agent_links) node_set.insert({agent, NodeKind::TalentAgent});

  CommunityGraph g;
  g.nodes_.assign(node_set.begin(), node_set.end());
  std::map<NodeRef, int> idx;
  for (int i = 0; i < g.n_nodes(); ++i) idx[g.nodes_[i]] = i;

  std::unordered_map<uint64_t, int> weights;
  auto add = [&weights](int src, int dst) {
    weights[(static_cast<uint64_t>(src) << 32) | static_cast<uint32_t>(dst)] += 1;
  };

  for (const auto& t : catalog.titles()) {
    auto actors = detail::title_role_members(catalog, t.title_id, Role::Actor);
    auto directors = detail::title_role_members(catalog, t.title_id, Role::Director);
    auto castings = detail::title_role_members(catalog, t.title_id, Role::CastingDirector);
    std::vector<int> ai, di, ci;
    for (const auto& a : actors) ai.push_back(idx.at({a, NodeKind::Actor}));
    for (const auto& d : directors) di.push_back(idx.at({d, NodeKind::Director}));
    for (const auto& cd : castings) ci.push_back(idx.at({cd, NodeKind::CastingDirector}));

    for (size_t i = 0; i < ai.size(); ++i)
      for (size_t j = i + 1; j < ai.size(); ++j) {
        add(ai[i], ai[j]);
        add(ai[j], ai[i]);
      }
    for (int d : di)
      for (int a : ai) add(d, a);
    for (int cd : ci)
      for (int a : ai) add(cd, a);
    for (int d : di)
      for (int cd : ci) add(d, cd);
  }

  // One edge per actor-agent relationship, not per title.
  for (const auto& [actor, agent] : agent_links)
    add(idx.at({actor, NodeKind::Actor}), idx.at({agent, NodeKind::TalentAgent}));

  g.out_.assign(g.n_nodes(), {});
  g.in_.assign(g.n_nodes(), {});
  for (const auto& [key, w] : weights) {
    int src = static_cast<int>(key >> 32);
    int dst = static_cast<int>(key & 0xffffffffu);
    g.out_[src].push_back({dst, w});
    g.in_[dst].push_back({src, w});
  }
  auto by_neighbor = [](const Edge& a, const Edge& b) { return a.neighbor < b.neighbor; };
  for (auto& es : g.out_) std::sort(es.begin(), es.end(), by_neighbor);
  for (auto& es : g.in_) std::sort(es.begin(), es.end(), by_neighbor);
  g.n_edges_ = weights.size();
  return g;
}

// ---------------------------------------------------------------------------
// Forest-fire reduction
// ---------------------------------------------------------------------------

struct FireConfig {
  int n_seed_actors = 100;
  double p_burn = 1.0;
  size_t node_budget = SIZE_MAX;  // persons
  uint64_t seed = 1;
};

/// Burns outward from the most popular actors: titles incident to the frontier
/// are included with probability p_burn, their full crews join the frontier,
/// and the talent agents of included actors are appended last. Titles whose
/// crew was cut by the budget are dropped so the output stays a valid catalog.
inline Catalog forest_fire_sample(const Catalog& catalog, const FireConfig& cfg) {
  if (cfg.node_budget < static_cast<size_t>(cfg.n_seed_actors))
    throw ValidationError("forest_fire_sample: node_budget < n_seed_actors");

  // Popularity proxy: total imdb_votes over a person's acted titles.
  std::map<std::string, long long> votes;
  for (const auto& cr : catalog.credits()) {
    if (cr.role != Role::Actor) continue;
    const TitleRecord* t = catalog.find_title(cr.title_id);
    votes[cr.person_id] += t->imdb_votes;
  }
  if (votes.size() < static_cast<size_t>(cfg.n_seed_actors))
    throw ValidationError("forest_fire_sample: catalog has " + std::to_string(votes.size()) +
                          " credited actors, need " + std::to_string(cfg.n_seed_actors));
  std::vector<std::pair<std::string, long long>> ranked(votes.begin(), votes.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Rng rng(cfg.seed);
  std::set<std::string> included;           // persons
  std::vector<std::string> frontier;
  for (int i = 0; i < cfg.n_seed_actors; ++i) {
    included.insert(ranked[i].first);
    frontier.push_back(ranked[i].first);
  }

  std::set<std::string> burned_titles, dead_titles;
  while (!frontier.empty() && included.size() < cfg.node_budget) {
    std::set<std::string> candidates;
    for (const auto& p : frontier)
      for (size_t ci : catalog.credits_of_person(p)) {
        const auto& tid = catalog.credits()[ci].title_id;
        if (!burned_titles.count(tid) && !dead_titles.count(tid)) candidates.insert(tid);
      }
    std::vector<std::string> next;
    for (const auto& tid : candidates) {
      if (!rng.bernoulli(cfg.p_burn)) {
        dead_titles.insert(tid);
        continue;
      }
      burned_titles.insert(tid);
      std::set<std::string> crew;
      for (size_t ci : catalog.credits_of_title(tid)) crew.insert(catalog.credits()[ci].person_id);
      for (const auto& p : crew) {
        if (included.count(p)) continue;
        if (included.size() >= cfg.node_budget) break;
        included.insert(p);
        next.push_back(p);
      }
    }
    frontier = std::move(next);
  }

  // Keep titles whose whole crew made it in.
  std::set<std::string> kept_titles;
  for (const auto& tid : burned_titles) {
    bool complete = true;
    for (size_t ci : catalog.credits_of_title(tid))
      if (!included.count(catalog.credits()[ci].person_id)) {
        complete = false;
        break;
      }
    if (complete) kept_titles.insert(tid);
  }

  // Agents last; they also satisfy agent_id referential integrity.
  std::set<std::string> persons_out = included;
  for (const auto& pid : included) {
    const PersonRecord* p = catalog.find_person(pid);
    if (p && p->agent_id) persons_out.insert(*p->agent_id);
  }

  std::vector<TitleRecord> titles;
  for (const auto& t : catalog.titles())
    if (kept_titles.count(t.title_id)) titles.push_back(t);
  std::vector<PersonRecord> people;
  for (const auto& p : catalog.people())
    if (persons_out.count(p.person_id)) people.push_back(p);
  std::vector<CreditRecord> credits;
  for (const auto& cr : catalog.credits())
    if (kept_titles.count(cr.title_id)) credits.push_back(cr);

  return Catalog::build(std::move(titles), std::move(people), std::move(credits));
}

}  // namespace cinenet
