#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cinenet/common.hpp"
#include "cinenet/csv.hpp"

namespace cinenet {

enum class Role { Actor, Director, CastingDirector, Writer, TalentAgent };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::Actor: return "actor";
    case Role::Director: return "director";
    case Role::CastingDirector: return "casting_director";
    case Role::Writer: return "writer";
    case Role::TalentAgent: return "talent_agent";
  }
  return "?";
}

inline std::optional<Role> role_from_name(std::string_view s) {
  if (s == "actor") return Role::Actor;
  if (s == "director") return Role::Director;
  if (s == "casting_director") return Role::CastingDirector;
  if (s == "writer") return Role::Writer;
  if (s == "talent_agent") return Role::TalentAgent;
  return std::nullopt;
}

/// Small value-semantic role set (at most five roles).
class RoleSet {
 public:
  void add(Role r) { bits_ |= bit(r); }
  bool has(Role r) const { return bits_ & bit(r); }
  bool empty() const { return bits_ == 0; }
  bool operator==(const RoleSet&) const = default;

  std::string str() const {
    std::string out;
    for (Role r : {Role::Actor, Role::Director, Role::CastingDirector, Role::Writer,
                   Role::TalentAgent}) {
      if (has(r)) {
        if (!out.empty()) out += '|';
        out += role_name(r);
      }
    }
    return out;
  }

  static RoleSet parse(std::string_view s, const std::string& context) {
    RoleSet rs;
    for (const auto& part : split(s, '|')) {
      auto t = trim(part);
      if (t.empty()) continue;
      auto r = role_from_name(t);
      if (!r) throw ParseError(context + ": unknown role '" + std::string(t) + "'");
      rs.add(*r);
    }
    return rs;
  }

 private:
  static unsigned bit(Role r) { return 1u << static_cast<int>(r); }
  unsigned bits_ = 0;
};

// Ratings carry exactly one decimal, so they are held as integer tenths;
// bucket boundaries are rating-valued and float equality would be fragile.
struct Rating {
  int tenths = 0;

  double value() const { return tenths / 10.0; }
  bool operator==(const Rating&) const = default;

  std::string str() const {
    std::string s = std::to_string(tenths / 10);
    s += '.';
    s += static_cast<char>('0' + tenths % 10);
    return s;
  }

  /// Parses "6.7" or "7" into tenths. Range is validated by the caller.
  static Rating parse(std::string_view s, const std::string& context) {
    auto t = trim(s);
    size_t dot = t.find('.');
    if (dot == std::string_view::npos) {
      long long whole = parse_ll(t, context);
      return Rating{static_cast<int>(whole * 10)};
    }
    long long whole = parse_ll(t.substr(0, dot), context);
    auto frac = t.substr(dot + 1);
    if (frac.size() != 1 || frac[0] < '0' || frac[0] > '9')
      throw ParseError(context + ": rating must have exactly one decimal: '" + std::string(t) + "'");
    return Rating{static_cast<int>(whole * 10 + (frac[0] - '0'))};
  }

  static Rating from_tenths(int tenths) { return Rating{tenths}; }
};

enum class ProductionType { Movie, Series };

inline const char* production_type_name(ProductionType t) {
  return t == ProductionType::Movie ? "movie" : "series";
}

struct PersonRecord {
  std::string person_id;
  std::string name;
  RoleSet roles;
  std::optional<std::string> agent_id;

  bool operator==(const PersonRecord&) const = default;
};

struct TitleRecord {
  std::string title_id;
  std::string name;
  int year = 0;
  ProductionType production_type = ProductionType::Movie;
  std::vector<std::string> genres;
  std::string language;
  std::string country;
  int runtime_min = 0;
  Rating imdb_rating;
  long long imdb_votes = 0;
  std::optional<double> rt_user_rating;
  std::optional<double> budget;
  std::optional<double> income;
  std::optional<std::string> age_rating;

  bool operator==(const TitleRecord&) const = default;
};

struct CreditRecord {
  std::string title_id;
  std::string person_id;
  Role role = Role::Actor;
  int billing_order = 1;

  bool operator==(const CreditRecord&) const = default;
};

/// Immutable once built; validation happens in build().
class Catalog {
 public:
  Catalog() = default;

  static Catalog build(std::vector<TitleRecord> titles, std::vector<PersonRecord> people,
                       std::vector<CreditRecord> credits) {
    Catalog c;
    c.titles_ = std::move(titles);
    c.people_ = std::move(people);
    c.credits_ = std::move(credits);
    c.index();
    c.validate();
    return c;
  }

  const std::vector<TitleRecord>& titles() const { return titles_; }
  const std::vector<PersonRecord>& people() const { return people_; }
  const std::vector<CreditRecord>& credits() const { return credits_; }

  const TitleRecord* find_title(const std::string& id) const {
    auto it = title_idx_.find(id);
    return it == title_idx_.end() ? nullptr : &titles_[it->second];
  }
  const PersonRecord* find_person(const std::string& id) const {
    auto it = person_idx_.find(id);
    return it == person_idx_.end() ? nullptr : &people_[it->second];
  }

  /// Credit indexes grouped by title, in credits() order.
  const std::vector<size_t>& credits_of_title(const std::string& title_id) const {
    static const std::vector<size_t> empty;
    auto it = title_credits_.find(title_id);
    return it == title_credits_.end() ? empty : it->second;
  }

  const std::vector<size_t>& credits_of_person(const std::string& person_id) const {
    static const std::vector<size_t> empty;
    auto it = person_credits_.find(person_id);
    return it == person_credits_.end() ? empty : it->second;
  }

 private:
  void index() {
    for (size_t i = 0; i < titles_.size(); ++i) {
      if (!title_idx_.emplace(titles_[i].title_id, i).second)
        throw ValidationError("duplicate title_id '" + titles_[i].title_id + "'");
    }
    for (size_t i = 0; i < people_.size(); ++i) {
      if (!person_idx_.emplace(people_[i].person_id, i).second)
        throw ValidationError("duplicate person_id '" + people_[i].person_id + "'");
    }
    for (size_t i = 0; i < credits_.size(); ++i) {
      title_credits_[credits_[i].title_id].push_back(i);
      person_credits_[credits_[i].person_id].push_back(i);
    }
  }

  void validate() const {
    std::vector<std::string> errs;
    auto fail = [&errs](std::string msg) {
      if (errs.size() < 20) errs.push_back(std::move(msg));
    };

    for (const auto& t : titles_) {
      if (t.imdb_rating.tenths < 0 || t.imdb_rating.tenths > 100)
        fail("title '" + t.title_id + "': imdb_rating " + t.imdb_rating.str() +
             " outside [0,10]");
      if (t.year < 1870 || t.year > 2100)
        fail("title '" + t.title_id + "': year " + std::to_string(t.year) +
             " outside [1870,2100]");
      if (t.runtime_min <= 0) fail("title '" + t.title_id + "': runtime_min must be positive");
      if (t.rt_user_rating && (*t.rt_user_rating < 0 || *t.rt_user_rating > 100))
        fail("title '" + t.title_id + "': rt_user_rating outside [0,100]");
      if (t.budget && *t.budget < 0) fail("title '" + t.title_id + "': negative budget");
      if (t.income && *t.income < 0) fail("title '" + t.title_id + "': negative income");
    }

    for (const auto& p : people_) {
      if (p.roles.empty()) fail("person '" + p.person_id + "': empty role set");
      if (p.agent_id) {
        if (p.roles.has(Role::TalentAgent))
          fail("person '" + p.person_id + "': a talent_agent has no agent_id");
        const PersonRecord* agent = find_person(*p.agent_id);
        if (!agent)
          fail("person '" + p.person_id + "': agent_id '" + *p.agent_id + "' not found");
        else if (!agent->roles.has(Role::TalentAgent))
          fail("person '" + p.person_id + "': agent '" + *p.agent_id +
               "' lacks talent_agent role");
      }
    }

    std::set<std::tuple<std::string, std::string, int>> seen;
    for (const auto& cr : credits_) {
      if (!find_title(cr.title_id))
        fail("credit references unknown title_id '" + cr.title_id + "'");
      const PersonRecord* p = find_person(cr.person_id);
      if (!p) {
        fail("credit references unknown person_id '" + cr.person_id + "'");
      } else if (!p->roles.has(cr.role)) {
        fail("credit (" + cr.title_id + "," + cr.person_id + "): role '" +
             role_name(cr.role) + "' not among declared roles of person");
      }
      if (cr.billing_order < 1)
        fail("credit (" + cr.title_id + "," + cr.person_id + "): billing_order must be >= 1");
      if (!seen.emplace(cr.title_id, cr.person_id, static_cast<int>(cr.role)).second)
        fail("duplicate credit (" + cr.title_id + "," + cr.person_id + "," +
             role_name(cr.role) + ")");
    }

    if (!errs.empty()) {
      std::string msg = "catalog validation failed (" + std::to_string(errs.size()) +
                        (errs.size() == 20 ? "+" : "") + " problems):";
      for (const auto& e : errs) msg += "\n  - " + e;
      throw ValidationError(msg);
    }
  }

  std::vector<TitleRecord> titles_;
  std::vector<PersonRecord> people_;
  std::vector<CreditRecord> credits_;
  std::unordered_map<std::string, size_t> title_idx_;
  std::unordered_map<std::string, size_t> person_idx_;
  std::unordered_map<std::string, std::vector<size_t>> title_credits_;
  std::unordered_map<std::string, std::vector<size_t>> person_credits_;
};

// ---------------------------------------------------------------------------
// CSV ingestion.  Schemas:
//   titles.csv : title_id,name,year,production_type,genres,language,country,
//                runtime_min,imdb_rating,imdb_votes,rt_user_rating,budget,income,age_rating
//   people.csv : person_id,name,roles,agent_id
//   credits.csv: title_id,person_id,role,billing_order
// Optional fields are empty cells; genres/roles are '|'-separated.
// ---------------------------------------------------------------------------

namespace detail {

inline void expect_header(CsvReader& r, const std::string& expected, const std::string& path) {
  std::vector<std::string> row;
  if (!r.next(row)) throw ParseError(path + ": empty file");
  std::string got;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) got += ',';
    got += row[i];
  }
  if (got != expected)
    throw ParseError(path + ": unexpected header '" + got + "', expected '" + expected + "'");
}

inline std::optional<double> opt_double(const std::string& s, const std::string& context) {
  if (trim(s).empty()) return std::nullopt;
  return parse_double(trim(s), context);
}

}  // namespace detail

inline constexpr const char* kTitlesHeader =
    "title_id,name,year,production_type,genres,language,country,runtime_min,imdb_rating,"
    "imdb_votes,rt_user_rating,budget,income,age_rating";
inline constexpr const char* kPeopleHeader = "person_id,name,roles,agent_id";
inline constexpr const char* kCreditsHeader = "title_id,person_id,role,billing_order";

inline std::vector<TitleRecord> read_titles_csv(std::istream& in, const std::string& path) {
  CsvReader r(in, path);
  detail::expect_header(r, kTitlesHeader, path);
  std::vector<TitleRecord> out;
  std::vector<std::string> row;
  while (r.next(row)) {
    const std::string ctx = r.context();
    if (row.size() != 14)
      throw ParseError(ctx + ": expected 14 fields, got " + std::to_string(row.size()));
    TitleRecord t;
    t.title_id = row[0];
    t.name = row[1];
    t.year = static_cast<int>(parse_ll(trim(row[2]), ctx + " year"));
    if (row[3] == "movie") t.production_type = ProductionType::Movie;
    else if (row[3] == "series") t.production_type = ProductionType::Series;
    else throw ParseError(ctx + ": unknown production_type '" + row[3] + "'");
    for (const auto& g : split(row[4], '|'))
      if (!trim(g).empty()) t.genres.emplace_back(trim(g));
    t.language = row[5];
    t.country = row[6];
    t.runtime_min = static_cast<int>(parse_ll(trim(row[7]), ctx + " runtime_min"));
    t.imdb_rating = Rating::parse(row[8], ctx + " imdb_rating");
    t.imdb_votes = parse_ll(trim(row[9]), ctx + " imdb_votes");
    if (t.imdb_votes < 0) throw ParseError(ctx + ": imdb_votes must be non-negative");
    t.rt_user_rating = detail::opt_double(row[10], ctx + " rt_user_rating");
    t.budget = detail::opt_double(row[11], ctx + " budget");
    t.income = detail::opt_double(row[12], ctx + " income");
    if (!trim(row[13]).empty()) t.age_rating = row[13];
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<PersonRecord> read_people_csv(std::istream& in, const std::string& path) {
  CsvReader r(in, path);
  detail::expect_header(r, kPeopleHeader, path);
  std::vector<PersonRecord> out;
  std::vector<std::string> row;
  while (r.next(row)) {
    const std::string ctx = r.context();
    if (row.size() != 4)
      throw ParseError(ctx + ": expected 4 fields, got " + std::to_string(row.size()));
    PersonRecord p;
    p.person_id = row[0];
    p.name = row[1];
    p.roles = RoleSet::parse(row[2], ctx + " roles");
    if (!trim(row[3]).empty()) p.agent_id = row[3];
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<CreditRecord> read_credits_csv(std::istream& in, const std::string& path) {
  CsvReader r(in, path);
  detail::expect_header(r, kCreditsHeader, path);
  std::vector<CreditRecord> out;
  std::vector<std::string> row;
  while (r.next(row)) {
    const std::string ctx = r.context();
    if (row.size() != 4)
      throw ParseError(ctx + ": expected 4 fields, got " + std::to_string(row.size()));
    CreditRecord c;
    c.title_id = row[0];
    c.person_id = row[1];
    auto role = role_from_name(trim(row[2]));
    if (!role || *role == Role::TalentAgent)
      throw ParseError(ctx + ": invalid credit role '" + row[2] + "'");
    c.role = *role;
    c.billing_order = static_cast<int>(parse_ll(trim(row[3]), ctx + " billing_order"));
    out.push_back(std::move(c));
  }
  return out;
}

inline Catalog load_catalog(const std::string& titles_path, const std::string& people_path,
                            const std::string& credits_path) {
  std::ifstream tf(titles_path);
  if (!tf) throw ParseError("cannot open file: " + titles_path);
  std::ifstream pf(people_path);
  if (!pf) throw ParseError("cannot open file: " + people_path);
  std::ifstream cf(credits_path);
  if (!cf) throw ParseError("cannot open file: " + credits_path);
  return Catalog::build(read_titles_csv(tf, titles_path), read_people_csv(pf, people_path),
                        read_credits_csv(cf, credits_path));
}

// --- emission ---------------------------------------------------------------

inline std::string titles_csv(const Catalog& c) {
  std::string out = std::string(kTitlesHeader) + "\n";
  for (const auto& t : c.titles()) {
    std::string genres;
    for (size_t i = 0; i < t.genres.size(); ++i) {
      if (i) genres += '|';
      genres += t.genres[i];
    }
    out += csv_row({t.title_id, t.name, std::to_string(t.year),
                    production_type_name(t.production_type), genres, t.language, t.country,
                    std::to_string(t.runtime_min), t.imdb_rating.str(),
                    std::to_string(t.imdb_votes),
                    t.rt_user_rating ? format_double(*t.rt_user_rating) : "",
                    t.budget ? format_double(*t.budget) : "",
                    t.income ? format_double(*t.income) : "", t.age_rating.value_or("")});
  }
  return out;
}

inline std::string people_csv(const Catalog& c) {
  std::string out = std::string(kPeopleHeader) + "\n";
  for (const auto& p : c.people())
    out += csv_row({p.person_id, p.name, p.roles.str(), p.agent_id.value_or("")});
  return out;
}

inline std::string credits_csv(const Catalog& c) {
  std::string out = std::string(kCreditsHeader) + "\n";
  for (const auto& cr : c.credits())
    out += csv_row({cr.title_id, cr.person_id, role_name(cr.role),
                    std::to_string(cr.billing_order)});
  return out;
}

inline void write_catalog(const Catalog& c, const std::string& dir) {
  write_file(dir + "/titles.csv", titles_csv(c));
  write_file(dir + "/people.csv", people_csv(c));
  write_file(dir + "/credits.csv", credits_csv(c));
}

inline Catalog load_catalog_dir(const std::string& dir) {
  return load_catalog(dir + "/titles.csv", dir + "/people.csv", dir + "/credits.csv");
}

}  // namespace cinenet
