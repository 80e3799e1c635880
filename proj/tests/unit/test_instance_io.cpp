#include "doctest.h"

#include <string>

#include "parkmatch/errors.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/instance_io.hpp"

using namespace parkmatch;

TEST_CASE("parses a search instance") {
  const InstanceFile f = parse_instance(
      "# a path\n"
      "root 0\n"
      "edge 0 1 1.5\n"
      "edge 1 2 2   # trailing comment\n"
      "\n"
      "spot 0\nspot 2\ncar 1\nkill 2\n");
  REQUIRE(f.tree->size() == 3);
  CHECK(f.tree->distance(0, 2) == 3.5);
  const SearchInstance s = f.search_instance();
  CHECK(s.start == 1);
  CHECK(s.survivor() == 0);
}

TEST_CASE("parses servers with counts and pi entries") {
  const InstanceFile f = parse_instance("root 0\nedge 0 1 1\nserver 1 2\nserver 0\nrequest 0\npi 2 1 0.25\n");
  CHECK(f.server_at == std::vector<Vertex>{1, 1, 0});
  CHECK(f.server_counts() == std::vector<int>{1, 2});
  const auto pi = f.pi_matrix();
  CHECK(pi.rows() == 3);
  CHECK(pi(2, 1) == 0.25);
  CHECK(pi(0, 0) == 0.0);
}

TEST_CASE("rejects malformed input") {
  CHECK_THROWS_AS(parse_instance("edge 0 1 1\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 0\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 x\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nedge 1 0 1\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nedge 2 3 1\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nspot 4\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nbogus 1\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nroot 0\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nserver 0 0\n"), InputError);
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nserver 0\npi 1 0 1\n"), InputError);
  // Two survivors.
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nspot 0\nspot 1\ncar 0\n").search_instance(), InputError);
  // Killing a non-spot.
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nspot 0\ncar 0\nkill 1\n").search_instance(), InputError);
  // More requests than servers.
  CHECK_THROWS_AS(parse_instance("root 0\nedge 0 1 1\nserver 0\nrequest 0\nrequest 1\n").match_instance(),
                  InputError);
}

TEST_CASE("line numbers appear in errors") {
  try {
    parse_instance("root 0\n\nedge 0 1 nope\n");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("writers round trip") {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(2 + static_cast<int>(rng.below(20)), 64.0, rng));
    const SearchInstance s = gen_search_instance(tree, 1 + static_cast<int>(rng.below(tree->size())), rng);
    const std::string text = format_search_instance(s);
    const SearchInstance back = parse_instance(text).search_instance();
    CHECK(format_search_instance(back) == text);
    for (Vertex u = 0; u < tree->size(); ++u) CHECK(back.tree->distance(0, u) == tree->distance(0, u));

    const MatchInstance m = gen_match_instance(tree, 5, 3, rng);
    const std::string mtext = format_match_instance(m);
    CHECK(format_match_instance(parse_instance(mtext).match_instance()) == mtext);
  }
}

TEST_CASE("format_number is shortest round trip") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
