#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cinenet/catalog.hpp"
#include "cinenet/node2vec.hpp"

namespace cinenet {

enum class RatingBucket { B0_3 = 0, B4_5 = 1, B6_7 = 2, B8_10 = 3 };

inline constexpr int kNumBuckets = 4;

inline const char* bucket_name(RatingBucket b) {
  switch (b) {
    case RatingBucket::B0_3: return "0-3";
    case RatingBucket::B4_5: return "4-5";
    case RatingBucket::B6_7: return "6-7";
    case RatingBucket::B8_10: return "8-10";
  }
  return "?";
}

/// Round half-up to the nearest integer, then map onto the four intervals.
inline RatingBucket bucketize(Rating r) {
  if (r.tenths < 0 || r.tenths > 100)
    throw ValidationError("bucketize: rating " + r.str() + " outside [0,10]");
  int whole = (r.tenths + 5) / 10;
  if (whole <= 3) return RatingBucket::B0_3;
  if (whole <= 5) return RatingBucket::B4_5;
  if (whole <= 7) return RatingBucket::B6_7;
  return RatingBucket::B8_10;
}

// ---------------------------------------------------------------------------
// Historical averages
// ---------------------------------------------------------------------------

struct History {
  std::optional<double> avg_imdb;
  std::optional<double> avg_rt;
  int n_titles = 0;
};

/// Averages over the person's credited titles strictly before as_of_year, so
/// the target title's own rating can never leak in. Titles are counted once
/// even when a person holds several roles on them.
inline History historical_averages(const Catalog& catalog, const std::string& person_id,
                                   int as_of_year) {
  if (!catalog.find_person(person_id))
    throw ValidationError("historical_averages: unknown person '" + person_id + "'");
  std::set<std::string> seen;
  double sum_imdb = 0, sum_rt = 0;
  int n_rt = 0;
  History h;
  for (size_t ci : catalog.credits_of_person(person_id)) {
    const auto& tid = catalog.credits()[ci].title_id;
    if (!seen.insert(tid).second) continue;
    const TitleRecord* t = catalog.find_title(tid);
    if (t->year >= as_of_year) continue;
    h.n_titles += 1;
    sum_imdb += t->imdb_rating.value();
    if (t->rt_user_rating) {
      sum_rt += *t->rt_user_rating;
      ++n_rt;
    }
  }
  if (h.n_titles > 0) h.avg_imdb = sum_imdb / h.n_titles;
  if (n_rt > 0) h.avg_rt = sum_rt / n_rt;
  return h;
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

enum class FeatureGroup { Metadata, History, SnaDirector, SnaCasting, SnaActor };

inline const char* feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Metadata: return "metadata";
    case FeatureGroup::History: return "history";
    case FeatureGroup::SnaDirector: return "sna_director";
    case FeatureGroup::SnaCasting: return "sna_casting";
    case FeatureGroup::SnaActor: return "sna_actor";
  }
  return "?";
}

enum class ActorMode { Mean, Concat4 };

struct Dataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> feature_names;
  std::vector<FeatureGroup> feature_groups;
  // missing[i][j] marks cells whose value is unknown (held as 0 until the
  // pipeline imputes them with training-fold means)
  std::vector<std::vector<char>> missing;
  std::vector<std::string> title_ids;
  int dropped_titles = 0;
  int missing_embedding_nodes = 0;

  size_t n_rows() const { return X.size(); }
  size_t n_features() const { return feature_names.size(); }

  std::vector<size_t> group_columns(FeatureGroup g) const {
    std::vector<size_t> cols;
    for (size_t j = 0; j < feature_groups.size(); ++j)
      if (feature_groups[j] == g) cols.push_back(j);
    return cols;
  }

  bool has_group(FeatureGroup g) const {
    return std::find(feature_groups.begin(), feature_groups.end(), g) != feature_groups.end();
  }
};

namespace detail {

/// Categories ordered by frequency (desc, then name asc), truncated to top_k.
inline std::vector<std::string> top_categories(const std::map<std::string, int>& counts,
                                               int top_k, bool& has_other) {
  std::vector<std::pair<std::string, int>> v(counts.begin(), counts.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  has_other = static_cast<int>(v.size()) > top_k;
  std::vector<std::string> out;
  for (size_t i = 0; i < v.size() && static_cast<int>(i) < top_k; ++i)
    out.push_back(v[i].first);
  return out;
}

struct RoleMembers {
  std::vector<std::string> directors, castings, writers;
  std::vector<std::pair<int, std::string>> actors;  // (billing_order, person_id)
};

inline RoleMembers title_members(const Catalog& c, const std::string& title_id) {
  RoleMembers m;
  for (size_t ci : c.credits_of_title(title_id)) {
    const auto& cr = c.credits()[ci];
    switch (cr.role) {
      case Role::Director: m.directors.push_back(cr.person_id); break;
      case Role::CastingDirector: m.castings.push_back(cr.person_id); break;
      case Role::Writer: m.writers.push_back(cr.person_id); break;
      case Role::Actor: m.actors.emplace_back(cr.billing_order, cr.person_id); break;
      default: break;
    }
  }
  std::sort(m.directors.begin(), m.directors.end());
  std::sort(m.castings.begin(), m.castings.end());
  std::sort(m.writers.begin(), m.writers.end());
  std::sort(m.actors.begin(), m.actors.end());
  return m;
}

/// Pools per-person histories: mean of the available averages, total title
/// count. Pushes three cells (imdb, rt, n) with missing flags.
inline void push_history(const Catalog& c, const std::vector<std::string>& persons,
                         int as_of_year, std::vector<double>& row, std::vector<char>& miss) {
  double sum_imdb = 0, sum_rt = 0;
  int n_imdb = 0, n_rt = 0, n_titles = 0;
  for (const auto& pid : persons) {
    History h = historical_averages(c, pid, as_of_year);
    n_titles += h.n_titles;
    if (h.avg_imdb) {
      sum_imdb += *h.avg_imdb;
      ++n_imdb;
    }
    if (h.avg_rt) {
      sum_rt += *h.avg_rt;
      ++n_rt;
    }
  }
  row.push_back(n_imdb > 0 ? sum_imdb / n_imdb : 0.0);
  miss.push_back(n_imdb > 0 ? 0 : 1);
  row.push_back(n_rt > 0 ? sum_rt / n_rt : 0.0);
  miss.push_back(n_rt > 0 ? 0 : 1);
  row.push_back(static_cast<double>(n_titles));
  miss.push_back(0);
}

/// Mean embedding over the given node ids; zero vector (and a count bump)
/// when nothing resolves.
inline void push_mean_embedding(const EmbeddingTable& emb, const std::vector<std::string>& pids,
                                NodeKind kind, std::vector<double>& row,
                                int& missing_nodes) {
  std::vector<double> acc(emb.dim, 0.0);
  int found = 0;
  for (const auto& pid : pids) {
    const auto* v = emb.find(pid + ":" + node_kind_name(kind));
    if (!v) {
      ++missing_nodes;
      continue;
    }
    for (int k = 0; k < emb.dim; ++k) acc[k] += (*v)[k];
    ++found;
  }
  if (found > 0)
    for (auto& x : acc) x /= found;
  row.insert(row.end(), acc.begin(), acc.end());
}

}  // namespace detail

/// Builds the labeled matrix: metadata, history, and (with embeddings) the
/// SNA blocks. Titles without a director or without actors are dropped and
/// counted. Rows are ordered by title_id so the result does not depend on
/// catalog row order.
inline Dataset assemble(const Catalog& catalog, const EmbeddingTable* embeddings,
                        ActorMode actor_mode, int top_k = 20) {
  Dataset ds;

  std::map<std::string, int> genre_counts, lang_counts, ptype_counts;
  for (const auto& t : catalog.titles()) {
    for (const auto& g : t.genres) genre_counts[g] += 1;
    lang_counts[t.language] += 1;
    ptype_counts[production_type_name(t.production_type)] += 1;
  }
  bool genre_other = false, lang_other = false, ptype_other = false;
  auto genres = detail::top_categories(genre_counts, top_k, genre_other);
  auto langs = detail::top_categories(lang_counts, top_k, lang_other);
  auto ptypes = detail::top_categories(ptype_counts, top_k, ptype_other);

  auto add_feature = [&ds](const std::string& name, FeatureGroup g) {
    ds.feature_names.push_back(name);
    ds.feature_groups.push_back(g);
  };
  add_feature("year", FeatureGroup::Metadata);
  add_feature("runtime_min", FeatureGroup::Metadata);
  for (const auto& p : ptypes) add_feature("ptype_" + p, FeatureGroup::Metadata);
  if (ptype_other) add_feature("ptype_other", FeatureGroup::Metadata);
  for (const auto& g : genres) add_feature("genre_" + g, FeatureGroup::Metadata);
  if (genre_other) add_feature("genre_other", FeatureGroup::Metadata);
  for (const auto& l : langs) add_feature("lang_" + l, FeatureGroup::Metadata);
  if (lang_other) add_feature("lang_other", FeatureGroup::Metadata);
  for (const char* role : {"director", "casting", "writer", "actor"})
    for (const char* stat : {"imdb", "rt", "n"})
      add_feature(std::string("hist_") + role + "_" + stat, FeatureGroup::History);
  if (embeddings) {
    const int d = embeddings->dim;
    for (int k = 0; k < d; ++k)
      add_feature("sna_director_e" + std::to_string(k), FeatureGroup::SnaDirector);
    for (int k = 0; k < d; ++k)
      add_feature("sna_casting_e" + std::to_string(k), FeatureGroup::SnaCasting);
    if (actor_mode == ActorMode::Mean) {
      for (int k = 0; k < d; ++k)
        add_feature("sna_actor_e" + std::to_string(k), FeatureGroup::SnaActor);
    } else {
      for (int a = 1; a <= 4; ++a)
        for (int k = 0; k < d; ++k)
          add_feature("sna_actor" + std::to_string(a) + "_e" + std::to_string(k),
                      FeatureGroup::SnaActor);
    }
  }

  std::vector<std::string> order;
  for (const auto& t : catalog.titles()) order.push_back(t.title_id);
  std::sort(order.begin(), order.end());

  for (const auto& tid : order) {
    const TitleRecord& t = *catalog.find_title(tid);
    auto members = detail::title_members(catalog, tid);
    if (members.directors.empty() || members.actors.empty()) {
      ds.dropped_titles += 1;
      continue;
    }

    std::vector<double> row;
    std::vector<char> miss;
    row.reserve(ds.feature_names.size());
    auto push = [&row, &miss](double v) {
      row.push_back(v);
      miss.push_back(0);
    };

    push(static_cast<double>(t.year));
    push(static_cast<double>(t.runtime_min));
    {
      std::string p = production_type_name(t.production_type);
      bool hit = false;
      for (const auto& cat : ptypes) {
        bool on = cat == p;
        push(on ? 1.0 : 0.0);
        hit = hit || on;
      }
      if (ptype_other) push(hit ? 0.0 : 1.0);
    }
    {
      std::set<std::string> have(t.genres.begin(), t.genres.end());
      bool any_other = false;
      for (const auto& g : have)
        if (std::find(genres.begin(), genres.end(), g) == genres.end()) any_other = true;
      for (const auto& cat : genres) push(have.count(cat) ? 1.0 : 0.0);
      if (genre_other) push(any_other ? 1.0 : 0.0);
    }
    {
      bool hit = false;
      for (const auto& cat : langs) {
        bool on = cat == t.language;
        push(on ? 1.0 : 0.0);
        hit = hit || on;
      }
      if (lang_other) push(hit ? 0.0 : 1.0);
    }

    std::vector<std::string> actor_pids;
    for (const auto& [bo, pid] : members.actors) actor_pids.push_back(pid);
    detail::push_history(catalog, members.directors, t.year, row, miss);
    detail::push_history(catalog, members.castings, t.year, row, miss);
    detail::push_history(catalog, members.writers, t.year, row, miss);
    detail::push_history(catalog, actor_pids, t.year, row, miss);

    if (embeddings) {
      detail::push_mean_embedding(*embeddings, members.directors, NodeKind::Director, row,
                                  ds.missing_embedding_nodes);
      detail::push_mean_embedding(*embeddings, members.castings, NodeKind::CastingDirector, row,
                                  ds.missing_embedding_nodes);
      while (miss.size() < row.size()) miss.push_back(0);
      if (actor_mode == ActorMode::Mean) {
        detail::push_mean_embedding(*embeddings, actor_pids, NodeKind::Actor, row,
                                    ds.missing_embedding_nodes);
      } else {
        // four lowest billing slots, zero-padded when the cast is smaller
        for (int a = 0; a < 4; ++a) {
          if (a < static_cast<int>(members.actors.size())) {
            detail::push_mean_embedding(*embeddings, {members.actors[a].second},
                                        NodeKind::Actor, row, ds.missing_embedding_nodes);
          } else {
            row.insert(row.end(), embeddings->dim, 0.0);
          }
        }
      }
      while (miss.size() < row.size()) miss.push_back(0);
    }

    if (row.size() != ds.feature_names.size())
      throw ComputeError("assemble: row width mismatch for title '" + tid + "'");
    ds.X.push_back(std::move(row));
    ds.missing.push_back(std::move(miss));
    ds.y.push_back(static_cast<int>(bucketize(t.imdb_rating)));
    ds.title_ids.push_back(tid);
  }

  if (ds.X.empty()) throw ValidationError("assemble: no titles left after drops");
  return ds;
}

inline std::string features_csv(const Dataset& ds) {
  std::string out;
  {
    std::vector<std::string> head = ds.feature_names;
    head.push_back("label");
    out += csv_row(head);
  }
  for (size_t i = 0; i < ds.X.size(); ++i) {
    std::vector<std::string> row;
    row.reserve(ds.X[i].size() + 1);
    for (double v : ds.X[i]) row.push_back(format_double(v));
    row.push_back(std::to_string(ds.y[i]));
    out += csv_row(row);
  }
  return out;
}

inline std::string groups_csv(const Dataset& ds) {
  std::string out = "feature_name,group\n";
  for (size_t j = 0; j < ds.feature_names.size(); ++j)
    out += csv_row({ds.feature_names[j], feature_group_name(ds.feature_groups[j])});
  return out;
}

}  // namespace cinenet
