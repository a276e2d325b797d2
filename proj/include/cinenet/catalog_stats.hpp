#pragma once

#include <array>
#include <map>
#include <string>

#include "cinenet/catalog.hpp"

namespace cinenet {

/// Rating histogram, per-category means and missing-value counts of a catalog.
struct StatsReport {
  std::array<int, 11> rating_histogram{};  // bin i holds ratings in [i, i+1); bin 10 holds 10.0
  double mean_rating = 0;
  std::map<std::string, double> mean_rating_by_genre;
  std::map<std::string, double> mean_rating_by_language;
  int missing_budget = 0;
  int missing_income = 0;
  int missing_rt = 0;
  int n_titles = 0;

  std::string str() const {
    std::string out = "titles: " + std::to_string(n_titles) + "\n";
    out += "mean imdb rating: " + format_double(mean_rating) + "\n";
    out += "rating histogram (width-1 bins):\n";
    for (int b = 0; b <= 10; ++b)
      out += "  [" + std::to_string(b) + "] " + std::to_string(rating_histogram[b]) + "\n";
    out += "mean rating by genre:\n";
    for (const auto& [g, m] : mean_rating_by_genre)
      out += "  " + g + ": " + format_double(m) + "\n";
    out += "mean rating by language:\n";
    for (const auto& [l, m] : mean_rating_by_language)
      out += "  " + l + ": " + format_double(m) + "\n";
    out += "missing budget: " + std::to_string(missing_budget) + "\n";
    out += "missing income: " + std::to_string(missing_income) + "\n";
    out += "missing rt_user_rating: " + std::to_string(missing_rt) + "\n";
    return out;
  }
};

inline StatsReport summary_stats(const Catalog& c) {
  if (c.titles().empty()) throw ValidationError("summary_stats: empty catalog");
  StatsReport rep;
  rep.n_titles = static_cast<int>(c.titles().size());
  std::map<std::string, std::pair<double, int>> by_genre, by_lang;
  double sum = 0;
  for (const auto& t : c.titles()) {
    int bin = t.imdb_rating.tenths / 10;
    rep.rating_histogram[bin] += 1;
    sum += t.imdb_rating.value();
    for (const auto& g : t.genres) {
      by_genre[g].first += t.imdb_rating.value();
      by_genre[g].second += 1;
    }
    by_lang[t.language].first += t.imdb_rating.value();
    by_lang[t.language].second += 1;
    if (!t.budget) rep.missing_budget++;
    if (!t.income) rep.missing_income++;
    if (!t.rt_user_rating) rep.missing_rt++;
  }
  rep.mean_rating = sum / rep.n_titles;
  for (const auto& [g, sc] : by_genre) rep.mean_rating_by_genre[g] = sc.first / sc.second;
  for (const auto& [l, sc] : by_lang) rep.mean_rating_by_language[l] = sc.first / sc.second;
  return rep;
}

}  // namespace cinenet
