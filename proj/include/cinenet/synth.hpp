#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cinenet/catalog.hpp"
#include "cinenet/rng.hpp"

namespace cinenet {

struct SkillWeights {
  double w_director = 3.0;
  double w_casting = 2.0;
  double w_actor = 1.0;
  double w_writer = 0.5;

  double max_weight() const {
    return std::max(std::max(w_director, w_casting), std::max(w_actor, w_writer));
  }
  double total() const { return w_director + w_casting + w_actor + w_writer; }
};

struct SynthConfig {
  int n_actors = 3500;
  int n_directors = 450;
  int n_casting_directors = 80;
  int n_writers = 800;
  int n_agents = 180;
  int n_titles = 2500;
  int actors_per_title_min = 4;
  int actors_per_title_max = 10;
  uint64_t seed = 1;
  SkillWeights skill_weights;
  double noise_sigma = 0.55;
  double popularity_exponent = 1.0;

  void validate() const {
    if (n_actors < 0 || n_directors < 0 || n_casting_directors < 0 || n_writers < 0 ||
        n_agents < 0 || n_titles < 0)
      throw ValidationError("synth config: counts must be non-negative");
    if (actors_per_title_min < 1 || actors_per_title_max < actors_per_title_min)
      throw ValidationError("synth config: bad actors_per_title range");
    if (skill_weights.w_director < 0 || skill_weights.w_casting < 0 ||
        skill_weights.w_actor < 0 || skill_weights.w_writer < 0)
      throw ValidationError("synth config: skill weights must be non-negative");
    if (noise_sigma < 0) throw ValidationError("synth config: noise_sigma must be non-negative");
    if (!(popularity_exponent > 0))
      throw ValidationError("synth config: popularity_exponent must be positive");
    if (n_titles > 0 &&
        (n_actors == 0 || n_directors == 0 || n_casting_directors == 0 || n_writers == 0))
      throw ValidationError("synth config: every credited role needs at least one person");
  }
};

// Score-model constants, frozen by calibration against the target bucket
// shares (see tests). Titles carry a latent quality tier; crew are drawn near
// the tier, tighter for roles with larger skill weight.
inline constexpr double kTierShape = 3.0;
inline constexpr double kAssortBandwidth = 0.12;
inline constexpr double kRatingBase = -0.30;
inline constexpr double kRatingScale = 8.00;

struct TitleTrace {
  std::string title_id;
  double tier = 0.0;
  double raw_score = 0.0;  // before clamping and rounding to tenths
  double mean_skill_director = 0.0;
  double mean_skill_casting = 0.0;
  double mean_skill_actor = 0.0;
  double mean_skill_writer = 0.0;
};

struct GroundTruth {
  std::map<std::string, double> skill;
  std::vector<TitleTrace> trace;

  std::string csv() const {
    std::string out = "person_id,skill\n";
    for (const auto& [pid, s] : skill) out += csv_row({pid, format_double(s)});
    return out;
  }
};

namespace detail {

inline std::string pad_id(char prefix, int i, int width) {
  std::string num = std::to_string(i);
  std::string out(1, prefix);
  for (int k = static_cast<int>(num.size()); k < width; ++k) out += '0';
  return out + num;
}

/// Popularity times tier-proximity selection weights for one role pool.
/// gamma = (w_role / w_max)^2 scales how tightly the role tracks the tier;
/// zero-weight roles are drawn by popularity alone.
inline void role_weights(const std::vector<double>& skills, const std::vector<int>& credits,
                         double tier, double gamma, double pop_exp, std::vector<double>& out) {
  out.resize(skills.size());
  const double inv = gamma / (2.0 * kAssortBandwidth * kAssortBandwidth);
  for (size_t i = 0; i < skills.size(); ++i) {
    double w = std::pow(static_cast<double>(credits[i] + 1), pop_exp);
    if (gamma > 0) {
      double d = skills[i] - tier;
      w *= std::exp(-d * d * inv);
    }
    out[i] = w;
  }
}

/// Draws k distinct indexes, probability proportional to weight; consumes the
/// weight vector. Draw order is the billing order for actors.
inline std::vector<int> draw_without_replacement(std::vector<double>& w, int k, Rng& rng) {
  std::vector<int> picked;
  double total = 0;
  for (double x : w) total += x;
  for (int d = 0; d < k && total > 0; ++d) {
    double u = rng.uniform(0.0, total);
    double acc = 0;
    int chosen = -1;
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0) continue;
      acc += w[i];
      chosen = static_cast<int>(i);
      if (u < acc) break;
    }
    if (chosen < 0) break;
    picked.push_back(chosen);
    total -= w[chosen];
    w[chosen] = 0;
  }
  return picked;
}

inline double mean_skill(const std::vector<double>& skills, const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  double s = 0;
  for (int i : idx) s += skills[i];
  return s / static_cast<double>(idx.size());
}

}  // namespace detail

/// Generates a seeded catalog with a planted linear skill signal. Crew
/// selection is preferential over accumulated credits, which yields the
/// heavy-tailed collaboration structure.
inline std::pair<Catalog, GroundTruth> generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  auto widthof = [](int n) { return std::max(3, static_cast<int>(std::to_string(n).size())); };
  const int wa = widthof(cfg.n_actors), wd = widthof(cfg.n_directors);
  const int wc = widthof(cfg.n_casting_directors), ww = widthof(cfg.n_writers);
  const int wg = widthof(cfg.n_agents), wt = std::max(5, widthof(cfg.n_titles));

  std::vector<PersonRecord> people;
  GroundTruth gt;

  auto add_people = [&](char prefix, int n, Role role, int width, const char* label,
                        std::vector<std::string>& ids, std::vector<double>& skills) {
    for (int i = 1; i <= n; ++i) {
      PersonRecord p;
      p.person_id = detail::pad_id(prefix, i, width);
      p.name = std::string(label) + " " + std::to_string(i);
      p.roles.add(role);
      double s = rng.uniform01();
      gt.skill[p.person_id] = s;
      ids.push_back(p.person_id);
      skills.push_back(s);
      people.push_back(std::move(p));
    }
  };

  std::vector<std::string> actor_ids, director_ids, casting_ids, writer_ids, agent_ids;
  std::vector<double> actor_skill, director_skill, casting_skill, writer_skill, agent_skill;
  add_people('a', cfg.n_actors, Role::Actor, wa, "Actor", actor_ids, actor_skill);
  add_people('d', cfg.n_directors, Role::Director, wd, "Director", director_ids, director_skill);
  add_people('c', cfg.n_casting_directors, Role::CastingDirector, wc, "Casting Director",
             casting_ids, casting_skill);
  add_people('w', cfg.n_writers, Role::Writer, ww, "Writer", writer_ids, writer_skill);
  add_people('g', cfg.n_agents, Role::TalentAgent, wg, "Agent", agent_ids, agent_skill);

  // Every actor signs with one agent; busier agencies attract more clients.
  if (cfg.n_agents > 0) {
    std::vector<int> clients(cfg.n_agents, 0);
    size_t person_base = 0;  // actors sit first in `people`
    for (int i = 0; i < cfg.n_actors; ++i) {
      std::vector<double> w(cfg.n_agents);
      for (int j = 0; j < cfg.n_agents; ++j)
        w[j] = std::pow(static_cast<double>(clients[j] + 1), cfg.popularity_exponent);
      auto pick = detail::draw_without_replacement(w, 1, rng);
      clients[pick[0]] += 1;
      people[person_base + i].agent_id = agent_ids[pick[0]];
    }
  }

  const SkillWeights& sw = cfg.skill_weights;
  const double wmax = sw.max_weight();
  auto gamma = [wmax](double w) {
    if (wmax <= 0) return 0.0;
    double r = w / wmax;
    return r * r;
  };
  const double g_dir = gamma(sw.w_director), g_cast = gamma(sw.w_casting);
  const double g_act = gamma(sw.w_actor), g_writ = gamma(sw.w_writer);

  std::vector<int> actor_credits(cfg.n_actors, 0), director_credits(cfg.n_directors, 0);
  std::vector<int> casting_credits(cfg.n_casting_directors, 0), writer_credits(cfg.n_writers, 0);

  static const std::vector<std::pair<std::string, double>> kGenres = {
      {"drama", 0.22},   {"comedy", 0.18},    {"action", 0.13},      {"thriller", 0.11},
      {"romance", 0.08}, {"crime", 0.07},     {"scifi", 0.06},       {"horror", 0.05},
      {"adventure", 0.04}, {"fantasy", 0.03}, {"documentary", 0.02}, {"animation", 0.01}};
  static const std::vector<std::pair<std::string, double>> kLanguages = {
      {"en", 0.62}, {"fr", 0.08}, {"es", 0.08}, {"de", 0.06},
      {"hi", 0.06}, {"ja", 0.05}, {"ko", 0.03}, {"zh", 0.02}};
  static const std::vector<std::pair<std::string, double>> kCountries = {
      {"US", 0.48}, {"UK", 0.12}, {"FR", 0.08}, {"ES", 0.07}, {"DE", 0.06},
      {"IN", 0.06}, {"JP", 0.05}, {"KR", 0.03}, {"CN", 0.03}, {"CA", 0.02}};
  static const std::vector<std::pair<std::string, double>> kAgeRatings = {
      {"G", 0.08}, {"PG", 0.2}, {"PG-13", 0.32}, {"R", 0.3}, {"NC-17", 0.04}, {"TV-MA", 0.06}};
  auto weighted_pick = [&rng](const std::vector<std::pair<std::string, double>>& table) {
    double u = rng.uniform01(), acc = 0;
    for (const auto& [v, p] : table) {
      acc += p;
      if (u < acc) return v;
    }
    return table.back().first;
  };

  std::vector<TitleRecord> titles;
  std::vector<CreditRecord> credits;
  std::vector<double> wbuf;

  for (int t = 1; t <= cfg.n_titles; ++t) {
    TitleRecord title;
    title.title_id = detail::pad_id('t', t, wt);
    title.name = "Title " + std::to_string(t);

    const double tier = rng.beta_shape1(kTierShape);

    detail::role_weights(director_skill, director_credits, tier, g_dir,
                         cfg.popularity_exponent, wbuf);
    auto dirs = detail::draw_without_replacement(wbuf, 1, rng);
    detail::role_weights(casting_skill, casting_credits, tier, g_cast, cfg.popularity_exponent,
                         wbuf);
    auto casts = detail::draw_without_replacement(wbuf, 1, rng);
    int n_writ = std::min(cfg.n_writers, 1 + (rng.bernoulli(0.4) ? 1 : 0));
    detail::role_weights(writer_skill, writer_credits, tier, g_writ, cfg.popularity_exponent,
                         wbuf);
    auto writs = detail::draw_without_replacement(wbuf, n_writ, rng);
    int span = cfg.actors_per_title_max - cfg.actors_per_title_min + 1;
    int n_act = std::min(cfg.n_actors,
                         cfg.actors_per_title_min + static_cast<int>(rng.uniform_int(span)));
    detail::role_weights(actor_skill, actor_credits, tier, g_act, cfg.popularity_exponent, wbuf);
    auto acts = detail::draw_without_replacement(wbuf, n_act, rng);

    for (int i : dirs) {
      credits.push_back({title.title_id, director_ids[i], Role::Director, 1});
      director_credits[i] += 1;
    }
    for (int i : casts) {
      credits.push_back({title.title_id, casting_ids[i], Role::CastingDirector, 1});
      casting_credits[i] += 1;
    }
    for (int i : writs) {
      credits.push_back({title.title_id, writer_ids[i], Role::Writer, 1});
      writer_credits[i] += 1;
    }
    int billing = 1;
    double cast_pop = 0;
    for (int i : acts) {
      credits.push_back({title.title_id, actor_ids[i], Role::Actor, billing++});
      cast_pop += actor_credits[i];
      actor_credits[i] += 1;
    }
    cast_pop /= std::max<size_t>(1, acts.size());

    TitleTrace tr;
    tr.title_id = title.title_id;
    tr.tier = tier;
    tr.mean_skill_director = detail::mean_skill(director_skill, dirs);
    tr.mean_skill_casting = detail::mean_skill(casting_skill, casts);
    tr.mean_skill_actor = detail::mean_skill(actor_skill, acts);
    tr.mean_skill_writer = detail::mean_skill(writer_skill, writs);

    double wsum = sw.total();
    double m = 0;
    if (wsum > 0)
      m = (sw.w_director * tr.mean_skill_director + sw.w_casting * tr.mean_skill_casting +
           sw.w_actor * tr.mean_skill_actor + sw.w_writer * tr.mean_skill_writer) /
          wsum;
    double raw = kRatingBase + kRatingScale * m;
    if (cfg.noise_sigma > 0) raw += rng.normal(0.0, cfg.noise_sigma);
    tr.raw_score = raw;

    int tenths = static_cast<int>(std::floor(raw * 10.0 + 0.5));
    title.imdb_rating = Rating::from_tenths(std::clamp(tenths, 0, 100));

    title.year = 1950 + rng.uniform_int(75);
    title.production_type = rng.bernoulli(0.15) ? ProductionType::Series : ProductionType::Movie;
    title.runtime_min = title.production_type == ProductionType::Movie
                            ? 80 + rng.uniform_int(101)
                            : 30 + rng.uniform_int(31);
    int n_genres = 1 + rng.uniform_int(3);
    std::set<std::string> gset;
    while (static_cast<int>(gset.size()) < n_genres) gset.insert(weighted_pick(kGenres));
    title.genres.assign(gset.begin(), gset.end());
    title.language = weighted_pick(kLanguages);
    title.country = weighted_pick(kCountries);
    title.imdb_votes =
        std::max<long long>(10, static_cast<long long>(
                                    150.0 * (1.0 + cast_pop) * std::exp(rng.normal(0.0, 0.9))));
    if (!rng.bernoulli(0.2))
      title.rt_user_rating = std::clamp(raw * 10.0 + rng.normal(0.0, 7.0), 0.0, 100.0);
    if (!rng.bernoulli(0.25)) title.budget = std::floor(std::exp(rng.normal(16.5, 1.2)));
    if (!rng.bernoulli(0.35)) {
      double base = title.budget ? *title.budget : std::exp(rng.normal(16.8, 1.2));
      title.income = std::floor(base * std::exp(rng.normal(0.3, 1.0)));
    }
    if (!rng.bernoulli(0.1)) title.age_rating = weighted_pick(kAgeRatings);

    titles.push_back(std::move(title));
    gt.trace.push_back(std::move(tr));
  }

  return {Catalog::build(std::move(titles), std::move(people), std::move(credits)),
          std::move(gt)};
}

// ---------------------------------------------------------------------------
// Planted-signal diagnostic
// ---------------------------------------------------------------------------

struct SignalReport {
  double corr_director = 0.0;
  double corr_casting = 0.0;
  double corr_actor = 0.0;
  double corr_writer = 0.0;
  int n_titles = 0;

  std::string str() const {
    std::string s = "planted signal over " + std::to_string(n_titles) + " titles\n";
    s += "  corr(mean director skill, score) = " + format_double(corr_director) + "\n";
    s += "  corr(mean casting skill, score)  = " + format_double(corr_casting) + "\n";
    s += "  corr(mean actor skill, score)    = " + format_double(corr_actor) + "\n";
    s += "  corr(mean writer skill, score)   = " + format_double(corr_writer) + "\n";
    return s;
  }
};

namespace detail {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// Correlates per-role mean crew skill with the raw title score. Uses the
/// pre-rounding score from the trace so a noise-free single-role setup
/// reports correlation exactly 1.
inline SignalReport planted_signal_check(const Catalog& catalog, const GroundTruth& gt) {
  std::map<std::string, const TitleTrace*> by_title;
  for (const auto& tr : gt.trace) by_title[tr.title_id] = &tr;

  std::vector<double> score, md, mc, ma, mw;
  for (const auto& t : catalog.titles()) {
    auto it = by_title.find(t.title_id);
    if (it == by_title.end())
      throw ValidationError("planted_signal_check: no trace for title '" + t.title_id + "'");
    std::map<Role, std::pair<double, int>> acc;
    for (size_t ci : catalog.credits_of_title(t.title_id)) {
      const auto& cr = catalog.credits()[ci];
      auto sit = gt.skill.find(cr.person_id);
      if (sit == gt.skill.end())
        throw ValidationError("planted_signal_check: no skill for person '" + cr.person_id + "'");
      acc[cr.role].first += sit->second;
      acc[cr.role].second += 1;
    }
    auto mean_of = [&acc](Role r) {
      auto it2 = acc.find(r);
      return it2 == acc.end() || it2->second.second == 0
                 ? 0.0
                 : it2->second.first / it2->second.second;
    };
    score.push_back(it->second->raw_score);
    md.push_back(mean_of(Role::Director));
    mc.push_back(mean_of(Role::CastingDirector));
    ma.push_back(mean_of(Role::Actor));
    mw.push_back(mean_of(Role::Writer));
  }

  SignalReport rep;
  rep.n_titles = static_cast<int>(score.size());
  rep.corr_director = detail::pearson(md, score);
  rep.corr_casting = detail::pearson(mc, score);
  rep.corr_actor = detail::pearson(ma, score);
  rep.corr_writer = detail::pearson(mw, score);
  return rep;
}

}  // namespace cinenet
