#include <catch2/catch_amalgamated.hpp>

#include "cinenet/cinenet.hpp"

TEST_CASE("headers compile and a tiny pipeline runs") {
  cinenet::SynthConfig sc;
  sc.n_actors = 40;
  sc.n_directors = 8;
  sc.n_casting_directors = 4;
  sc.n_writers = 10;
  sc.n_agents = 5;
  sc.n_titles = 30;
  sc.seed = 3;
  auto [catalog, truth] = cinenet::generate(sc);
  REQUIRE(catalog.titles().size() == 30);
  auto graph = cinenet::CommunityGraph::build(catalog);
  REQUIRE(graph.n_nodes() > 0);
}
