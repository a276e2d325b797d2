#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace cinenet;

namespace {

TitleRecord make_title(const std::string& id, int year, int tenths,
                       std::optional<double> rt) {
  TitleRecord t;
  t.title_id = id;
  t.name = id;
  t.year = year;
  t.genres = {"drama"};
  t.language = "en";
  t.country = "us";
  t.runtime_min = 100;
  t.imdb_rating = Rating::from_tenths(tenths);
  t.imdb_votes = 50;
  t.rt_user_rating = rt;
  return t;
}

PersonRecord make_person(const std::string& id, std::initializer_list<Role> roles) {
  PersonRecord p;
  p.person_id = id;
  p.name = id;
  for (Role r : roles) p.roles.add(r);
  return p;
}

/// Three titles sharing director d1 and lead a1. d1 is double-credited on
/// t_old1 (director and writer) to exercise title dedup.
Catalog feature_fixture() {
  std::vector<TitleRecord> titles = {make_title("t_old1", 2000, 80, 70.0),
                                     make_title("t_old2", 2005, 60, std::nullopt),
                                     make_title("t_new", 2010, 74, 55.0)};
  std::vector<PersonRecord> people = {
      make_person("d1", {Role::Director, Role::Writer}),
      make_person("c1", {Role::CastingDirector}),
      make_person("w1", {Role::Writer}),
      make_person("a1", {Role::Actor}),
      make_person("a2", {Role::Actor})};
  std::vector<CreditRecord> credits = {{"t_old1", "d1", Role::Director, 1},
                                       {"t_old1", "d1", Role::Writer, 1},
                                       {"t_old1", "a1", Role::Actor, 1},
                                       {"t_old2", "d1", Role::Director, 1},
                                       {"t_old2", "a1", Role::Actor, 1},
                                       {"t_new", "d1", Role::Director, 1},
                                       {"t_new", "c1", Role::CastingDirector, 1},
                                       {"t_new", "w1", Role::Writer, 1},
                                       {"t_new", "a1", Role::Actor, 1},
                                       {"t_new", "a2", Role::Actor, 2}};
  return Catalog::build(std::move(titles), std::move(people), std::move(credits));
}

EmbeddingTable toy_embeddings(bool include_a2) {
  EmbeddingTable emb;
  emb.dim = 2;
  emb.node_ids = {"a1:actor", "c1:casting_director", "d1:director"};
  emb.vectors = {{1, 2}, {7, 8}, {5, 6}};
  if (include_a2) {
    emb.node_ids.push_back("a2:actor");
    emb.vectors.push_back({3, 4});
  }
  emb.build_index();
  return emb;
}

std::vector<double> column(const Dataset& ds, const std::string& name) {
  auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
  REQUIRE(it != ds.feature_names.end());
  size_t j = it - ds.feature_names.begin();
  std::vector<double> col;
  for (const auto& row : ds.X) col.push_back(row[j]);
  return col;
}

}  // namespace

TEST_CASE("historical averages leave out the target year") {
  auto cat = feature_fixture();

  auto h = historical_averages(cat, "d1", 2010);
  CHECK(h.n_titles == 2);  // t_old1 counted once despite two credits
  REQUIRE(h.avg_imdb);
  CHECK(*h.avg_imdb == Catch::Approx(7.0));
  REQUIRE(h.avg_rt);
  CHECK(*h.avg_rt == Catch::Approx(70.0));  // t_old2 has no rt score

  auto strict = historical_averages(cat, "d1", 2005);
  CHECK(strict.n_titles == 1);
  CHECK(*strict.avg_imdb == Catch::Approx(8.0));

  auto none = historical_averages(cat, "d1", 2000);
  CHECK(none.n_titles == 0);
  CHECK(!none.avg_imdb);
  CHECK(!none.avg_rt);

  auto idle = historical_averages(cat, "c1", 2010);
  CHECK(idle.n_titles == 0);

  CHECK_THROWS_AS(historical_averages(cat, "ghost", 2010), ValidationError);
}

TEST_CASE("assemble lays out metadata and history columns") {
  auto cat = feature_fixture();
  auto ds = assemble(cat, nullptr, ActorMode::Mean);

  std::vector<std::string> want = {
      "year",           "runtime_min",     "ptype_movie",     "genre_drama",
      "lang_en",        "hist_director_imdb", "hist_director_rt", "hist_director_n",
      "hist_casting_imdb", "hist_casting_rt", "hist_casting_n",
      "hist_writer_imdb",  "hist_writer_rt",  "hist_writer_n",
      "hist_actor_imdb",   "hist_actor_rt",   "hist_actor_n"};
  CHECK(ds.feature_names == want);
  CHECK(ds.dropped_titles == 0);
  CHECK(!ds.has_group(FeatureGroup::SnaDirector));
  CHECK(ds.group_columns(FeatureGroup::History).size() == 12);
  CHECK(ds.group_columns(FeatureGroup::Metadata).size() == 5);

  // rows sorted by title_id: t_new, t_old1, t_old2
  CHECK(ds.title_ids == std::vector<std::string>{"t_new", "t_old1", "t_old2"});
  CHECK(ds.y == std::vector<int>{2, 3, 2});
  CHECK(column(ds, "year") == std::vector<double>{2010, 2000, 2005});
  CHECK(column(ds, "ptype_movie") == std::vector<double>{1, 1, 1});

  CHECK(column(ds, "hist_director_imdb") == std::vector<double>{7.0, 0.0, 8.0});
  CHECK(column(ds, "hist_director_rt") == std::vector<double>{70.0, 0.0, 70.0});
  CHECK(column(ds, "hist_director_n") == std::vector<double>{2, 0, 1});
  CHECK(column(ds, "hist_actor_imdb") == std::vector<double>{7.0, 0.0, 8.0});
  CHECK(column(ds, "hist_actor_n") == std::vector<double>{2, 0, 1});
  CHECK(column(ds, "hist_casting_n") == std::vector<double>{0, 0, 0});

  // missing flags: value cells never missing, empty histories flagged
  auto jt = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                      "hist_director_imdb") - ds.feature_names.begin();
  CHECK(ds.missing[0][jt] == 0);
  CHECK(ds.missing[1][jt] == 1);  // t_old1 row has no prior work
  CHECK(ds.missing[2][jt] == 0);
  auto jn = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                      "hist_director_n") - ds.feature_names.begin();
  CHECK(ds.missing[0][jn] == 0);
  CHECK(ds.missing[1][jn] == 0);  // counts are real zeros, not unknowns
  CHECK(ds.missing[0][0] == 0);   // year
}

TEST_CASE("assemble truncates categorical columns at top_k") {
  std::vector<TitleRecord> titles;
  const char* langs[] = {"en", "en", "en", "fr", "de"};
  for (int i = 0; i < 5; ++i) {
    auto t = make_title("t" + std::to_string(i), 2000 + i, 70, std::nullopt);
    t.language = langs[i];
    if (i == 4) t.genres = {"drama", "noir"};
    titles.push_back(t);
  }
  std::vector<PersonRecord> people = {make_person("d1", {Role::Director}),
                                      make_person("a1", {Role::Actor})};
  std::vector<CreditRecord> credits;
  for (int i = 0; i < 5; ++i) {
    credits.push_back({"t" + std::to_string(i), "d1", Role::Director, 1});
    credits.push_back({"t" + std::to_string(i), "a1", Role::Actor, 1});
  }
  auto cat = Catalog::build(std::move(titles), std::move(people), std::move(credits));
  auto ds = assemble(cat, nullptr, ActorMode::Mean, 1);

  // count desc then name asc: en wins the single language slot
  CHECK(column(ds, "lang_en") == std::vector<double>{1, 1, 1, 0, 0});
  CHECK(column(ds, "lang_other") == std::vector<double>{0, 0, 0, 1, 1});
  CHECK(column(ds, "genre_drama") == std::vector<double>{1, 1, 1, 1, 1});
  CHECK(column(ds, "genre_other") == std::vector<double>{0, 0, 0, 0, 1});
  CHECK(std::find(ds.feature_names.begin(), ds.feature_names.end(), "lang_fr") ==
        ds.feature_names.end());
  // only one production type in play, so no ptype_other column
  CHECK(std::find(ds.feature_names.begin(), ds.feature_names.end(), "ptype_other") ==
        ds.feature_names.end());
}

TEST_CASE("assemble drops titles missing a director or actors") {
  std::vector<TitleRecord> titles = {make_title("t_ok", 2000, 70, std::nullopt),
                                     make_title("t_nodir", 2001, 70, std::nullopt),
                                     make_title("t_noact", 2002, 70, std::nullopt)};
  std::vector<PersonRecord> people = {make_person("d1", {Role::Director}),
                                      make_person("a1", {Role::Actor})};
  std::vector<CreditRecord> credits = {{"t_ok", "d1", Role::Director, 1},
                                       {"t_ok", "a1", Role::Actor, 1},
                                       {"t_nodir", "a1", Role::Actor, 1},
                                       {"t_noact", "d1", Role::Director, 1}};
  auto cat = Catalog::build(std::move(titles), std::move(people), std::move(credits));
  auto ds = assemble(cat, nullptr, ActorMode::Mean);
  CHECK(ds.title_ids == std::vector<std::string>{"t_ok"});
  CHECK(ds.dropped_titles == 2);

  std::vector<TitleRecord> bare = {make_title("t_noact", 2002, 70, std::nullopt)};
  std::vector<PersonRecord> dir_only = {make_person("d1", {Role::Director})};
  std::vector<CreditRecord> one = {{"t_noact", "d1", Role::Director, 1}};
  auto empty_cat = Catalog::build(std::move(bare), std::move(dir_only), std::move(one));
  CHECK_THROWS_AS(assemble(empty_cat, nullptr, ActorMode::Mean), ValidationError);
}

TEST_CASE("assemble is independent of catalog record order") {
  auto forward = feature_fixture();

  std::vector<TitleRecord> titles = {make_title("t_new", 2010, 74, 55.0),
                                     make_title("t_old2", 2005, 60, std::nullopt),
                                     make_title("t_old1", 2000, 80, 70.0)};
  std::vector<PersonRecord> people = {
      make_person("a2", {Role::Actor}),
      make_person("a1", {Role::Actor}),
      make_person("w1", {Role::Writer}),
      make_person("c1", {Role::CastingDirector}),
      make_person("d1", {Role::Director, Role::Writer})};
  std::vector<CreditRecord> credits = {{"t_new", "a2", Role::Actor, 2},
                                       {"t_new", "w1", Role::Writer, 1},
                                       {"t_new", "c1", Role::CastingDirector, 1},
                                       {"t_new", "a1", Role::Actor, 1},
                                       {"t_new", "d1", Role::Director, 1},
                                       {"t_old2", "a1", Role::Actor, 1},
                                       {"t_old2", "d1", Role::Director, 1},
                                       {"t_old1", "a1", Role::Actor, 1},
                                       {"t_old1", "d1", Role::Writer, 1},
                                       {"t_old1", "d1", Role::Director, 1}};
  auto shuffled = Catalog::build(std::move(titles), std::move(people), std::move(credits));

  auto d1 = assemble(forward, nullptr, ActorMode::Mean);
  auto d2 = assemble(shuffled, nullptr, ActorMode::Mean);
  CHECK(d1.X == d2.X);
  CHECK(d1.y == d2.y);
  CHECK(d1.feature_names == d2.feature_names);
  CHECK(d1.missing == d2.missing);
  CHECK(d1.title_ids == d2.title_ids);
}

TEST_CASE("sna blocks pull person embeddings by role") {
  auto cat = feature_fixture();
  auto emb = toy_embeddings(true);

  auto ds = assemble(cat, &emb, ActorMode::Mean);
  CHECK(ds.missing_embedding_nodes == 0);
  CHECK(ds.group_columns(FeatureGroup::SnaDirector).size() == 2);
  CHECK(ds.group_columns(FeatureGroup::SnaCasting).size() == 2);
  CHECK(ds.group_columns(FeatureGroup::SnaActor).size() == 2);

  CHECK(column(ds, "sna_director_e0") == std::vector<double>{5, 5, 5});
  // only t_new has a casting director; the others fall back to zeros
  CHECK(column(ds, "sna_casting_e0") == std::vector<double>{7, 0, 0});
  CHECK(column(ds, "sna_casting_e1") == std::vector<double>{8, 0, 0});
  // t_new averages a1 and a2; the old titles carry a1 alone
  CHECK(column(ds, "sna_actor_e0") == std::vector<double>{2, 1, 1});
  CHECK(column(ds, "sna_actor_e1") == std::vector<double>{3, 2, 2});

  SECTION("concat mode keeps the four lowest billing slots") {
    auto dc = assemble(cat, &emb, ActorMode::Concat4);
    CHECK(dc.group_columns(FeatureGroup::SnaActor).size() == 8);
    CHECK(column(dc, "sna_actor1_e0") == std::vector<double>{1, 1, 1});
    CHECK(column(dc, "sna_actor2_e0") == std::vector<double>{3, 0, 0});
    CHECK(column(dc, "sna_actor3_e0") == std::vector<double>{0, 0, 0});
    CHECK(column(dc, "sna_actor4_e1") == std::vector<double>{0, 0, 0});
  }

  SECTION("unresolved nodes are counted and averaged around") {
    auto thin = toy_embeddings(false);
    auto dt = assemble(cat, &thin, ActorMode::Mean);
    CHECK(dt.missing_embedding_nodes == 1);  // a2 on t_new
    CHECK(column(dt, "sna_actor_e0") == std::vector<double>{1, 1, 1});
  }
}

TEST_CASE("feature and group csv emitters") {
  auto cat = feature_fixture();
  auto ds = assemble(cat, nullptr, ActorMode::Mean);

  auto csv = features_csv(ds);
  CHECK(csv.rfind("year,runtime_min,", 0) == 0);
  CHECK(csv.find(",label\n") != std::string::npos);
  CHECK(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) ==
        static_cast<int>(ds.n_rows()) + 1);

  auto gcsv = groups_csv(ds);
  CHECK(gcsv.rfind("feature_name,group\n", 0) == 0);
  CHECK(gcsv.find("hist_director_imdb,history\n") != std::string::npos);
  CHECK(gcsv.find("year,metadata\n") != std::string::npos);
  CHECK(static_cast<int>(std::count(gcsv.begin(), gcsv.end(), '\n')) ==
        static_cast<int>(ds.n_features()) + 1);
}
