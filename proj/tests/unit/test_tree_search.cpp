#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "parkmatch/errors.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/tree_search.hpp"

using namespace parkmatch;

namespace {

std::shared_ptr<const WeightedTree> make_tree(int n, std::vector<Edge> edges) {
  return std::make_shared<const WeightedTree>(n, std::move(edges), 0);
}

std::vector<int> spots_at(int n, std::initializer_list<Vertex> spots) {
  std::vector<int> c(n, 0);
  for (Vertex s : spots) c[s] = 1;
  return c;
}

std::vector<char> mask(const std::vector<int>& counts) { return {counts.begin(), counts.end()}; }

}  // namespace

TEST_CASE("expert index examples") {
  auto edge2 = make_tree(2, {{0, 1, 1}});
  ExpertIndex a = build_expert_index(*edge2, mask(spots_at(2, {0})));
  CHECK(a.size() == 1);
  CHECK(a.paths[0] == std::vector<Vertex>{0});
  CHECK(a.height == 1);

  auto path = make_tree(3, {{0, 1, 1}, {1, 2, 1}});
  ExpertIndex b = build_expert_index(*path, mask(spots_at(3, {0, 1, 2})));
  CHECK(b.size() == 1);
  CHECK(b.paths[0] == std::vector<Vertex>{0, 1, 2});
  CHECK(b.height == 3);

  auto cherry = make_tree(3, {{0, 1, 1}, {0, 2, 1}});
  ExpertIndex c = build_expert_index(*cherry, mask(spots_at(3, {1, 2})));
  CHECK(c.leaf_spots == std::vector<Vertex>{1, 2});
  CHECK(c.height == 1);
  ExpertIndex d = build_expert_index(*cherry, mask(spots_at(3, {0, 1, 2})));
  CHECK(d.size() == 2);
  CHECK(d.height == 2);
  CHECK(d.experts_through[0] == std::vector<int>{0, 1});

  CHECK_THROWS_AS(build_expert_index(*cherry, mask(spots_at(3, {}))), InputError);
}

TEST_CASE("region examples") {
  Rng rng(1);
  TreeSearch s(make_tree(2, {{0, 1, 1}}), spots_at(2, {0, 1}), 1, 0.5);
  s.settle(rng);
  CHECK(s.region_of(1) == Region::kOuter);
  CHECK(s.spots_on_root_path(1) == 2);
  s.decommission(0, rng);
  CHECK(s.region_of(1) == Region::kFrontier);
  CHECK(s.region_of(0) == Region::kRoot);
}

TEST_CASE("expert sets examples") {
  Rng rng(1);
  SUBCASE("single path, two spots left") {
    TreeSearch s(make_tree(3, {{0, 1, 1}, {1, 2, 1}}), spots_at(3, {1, 2}), 0, 0.5);
    s.settle(rng);
    REQUIRE(s.phase() == Phase::kCore);
    const ExpertSets x = s.sets_xyf(1);
    CHECK(x.x == std::vector<int>{0});
    CHECK(x.y.empty());
    CHECK(x.f.empty());
  }
  SUBCASE("disjoint paths, kill empties path one") {
    TreeSearch s(make_tree(3, {{0, 1, 1}, {0, 2, 1}}), spots_at(3, {1, 2}), 0, 0.5);
    s.settle(rng);
    const ExpertSets x = s.sets_xyf(1);
    CHECK(x.x == std::vector<int>{0});
    CHECK(x.y == std::vector<int>{1});
    CHECK(x.f == std::vector<int>{0});
  }
  SUBCASE("shared spot keeps path one alive") {
    TreeSearch s(make_tree(4, {{0, 1, 1}, {1, 2, 1}, {1, 3, 1}}), spots_at(4, {1, 2, 3}), 0, 0.5);
    s.settle(rng);
    const ExpertSets x = s.sets_xyf(2);
    CHECK(x.x == std::vector<int>{0});
    CHECK(x.y == std::vector<int>{1});
    CHECK(x.f.empty());
    CHECK_THROWS_AS(s.sets_xyf(0), LogicError);
  }
  SUBCASE("prologue has no expert sets") {
    TreeSearch s(make_tree(2, {{0, 1, 1}}), spots_at(2, {0, 1}), 1, 0.5);
    s.settle(rng);
    CHECK_THROWS_AS(s.sets_xyf(0), LogicError);
  }
}

TEST_CASE("q examples") {
  Rng rng(1);
  SUBCASE("sigma killed") {
    TreeSearch s(make_tree(3, {{0, 1, 1}, {0, 2, 1}}), spots_at(3, {1, 2}), 0, 0.5);
    s.settle(rng);
    const Eigen::VectorXd q = s.compute_q(0, 1);
    CHECK(q[0] == 0.0);
    CHECK(q[1] == 1.0);
    CHECK_THROWS_AS(s.compute_q(1, 1), LogicError);
  }
  SUBCASE("sigma survives, one avoiding expert") {
    TreeSearch s(make_tree(4, {{0, 1, 1}, {1, 2, 1}, {0, 3, 1}}), spots_at(4, {1, 2, 3}), 0, 0.5);
    s.settle(rng);
    const Eigen::VectorXd q = s.compute_q(0, 2);
    CHECK(q[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(q[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("no avoiding experts gives uniform") {
    TreeSearch s(make_tree(4, {{0, 1, 1}, {1, 2, 1}, {1, 3, 1}}), spots_at(4, {1, 2, 3}), 0, 0.3);
    s.settle(rng);
    const Eigen::VectorXd q = s.compute_q(0, 1);
    CHECK(q[0] == 0.5);
    CHECK(q[1] == 0.5);
  }
  SUBCASE("nothing left") {
    TreeSearch s(make_tree(2, {{0, 1, 1}}), spots_at(2, {1}), 0, 0.5);
    s.settle(rng);
    CHECK_THROWS_AS(s.compute_q(0, 1), SearchTerminatedError);
  }
}

TEST_CASE("pi tilde examples") {
  // Experts: sigma 0 on [1, 2], sigma 1 on [3].
  auto tree = make_tree(4, {{0, 1, 1}, {1, 2, 1}, {0, 3, 1}});
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng(seed);
    TreeSearch s(tree, spots_at(4, {1, 2, 3}), 0, 0.5);
    s.settle(rng);
    CHECK(s.pi_tilde()[0] == 0.5);
    s.decommission(1, rng);
    CHECK(s.frontier_hits() == std::vector<int>{1, 0});
    const Eigen::VectorXd p = s.pi_tilde();
    CHECK(p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    s.decommission(3, rng);
    CHECK(s.pi_tilde()[1] == 0.0);
    CHECK(s.pi_tilde()[0] == 1.0);
    CHECK(s.car() == 2);
  }
}

TEST_CASE("prologue rules") {
  Rng rng(5);
  SUBCASE("stay on a live spot") {
    TreeSearch s(make_tree(2, {{0, 1, 1}}), spots_at(2, {0, 1}), 1, 0.5);
    const SearchStep st = s.settle(rng);
    CHECK_FALSE(st.jumped);
    CHECK(s.car() == 1);
    CHECK(s.prologue_jumps() == 0);
  }
  SUBCASE("climb to the nearest live ancestor") {
    TreeSearch s(make_tree(3, {{0, 1, 1}, {1, 2, 1}}), spots_at(3, {0, 1, 2}), 2, 0.5);
    s.settle(rng);
    const SearchStep st = s.decommission(2, rng);
    CHECK(st.jumped);
    CHECK(s.car() == 1);
    CHECK(s.prologue_jumps() == 1);
    CHECK(s.phase() == Phase::kPrologue);
  }
  SUBCASE("climb to the root and enter the core") {
    TreeSearch s(make_tree(3, {{0, 1, 2}, {0, 2, 3}}), spots_at(3, {1, 2}), 1, 0.5);
    s.settle(rng);
    const SearchStep st = s.decommission(1, rng);
    CHECK(s.phase() == Phase::kCore);
    CHECK(s.gamma() == 1);
    CHECK(s.car() == 2);
    CHECK(st.prologue_distance == 2.0);
    CHECK(st.core_distance == 3.0);
  }
}

TEST_CASE("core steps") {
  auto tree = make_tree(4, {{0, 1, 1}, {1, 2, 1}, {0, 3, 1}});
  SUBCASE("outer kill leaves everything but the flag") {
    Rng rng(2);
    TreeSearch s(tree, spots_at(4, {1, 2, 3}), 0, 0.5);
    s.settle(rng);
    const Vertex car = s.car();
    const SearchStep st = s.decommission(2, rng);
    CHECK(st.region == Region::kOuter);
    CHECK(s.car() == car);
    CHECK(s.frontier_hits() == std::vector<int>{0, 0});
    CHECK_THROWS_AS(s.decommission(2, rng), LogicError);
  }
  SUBCASE("single expert moves deterministically") {
    Rng rng(2);
    TreeSearch s(make_tree(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}), spots_at(4, {1, 2, 3}), 0, 0.5);
    s.settle(rng);
    CHECK(s.car() == 1);
    s.decommission(1, rng);
    CHECK(s.car() == 2);
    CHECK(s.core_jumps() == 1);
  }
  SUBCASE("frontier kill away from the car counts hits") {
    bool seen = false;
    for (std::uint64_t seed = 0; seed < 64 && !seen; ++seed) {
      Rng rng(seed);
      TreeSearch s(tree, spots_at(4, {1, 2, 3}), 0, 0.5);
      s.settle(rng);
      if (s.car() != 3) continue;
      seen = true;
      const SearchStep st = s.decommission(1, rng);
      CHECK_FALSE(st.jumped);
      CHECK(s.car() == 3);
      CHECK(s.frontier_hits() == std::vector<int>{1, 0});
    }
    CHECK(seen);
  }
}

TEST_CASE("run_tree_search examples") {
  Rng rng(9);
  auto path = make_tree(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  SUBCASE("single spot") {
    const SearchTrace t = run_tree_search({path, {0}, 3, {}}, 0.5, rng);
    CHECK(t.final_car == 0);
    CHECK(t.prologue_jumps + t.core_jumps == 0);
    CHECK(t.total_distance() == 3.0);
  }
  SUBCASE("deterministic chain") {
    const SearchTrace a = run_tree_search({path, {0, 1, 2, 3}, 3, {3, 2, 1}}, 0.5, rng);
    CHECK(a.prologue_jumps == 3);
    CHECK(a.final_car == 0);
    const SearchTrace b = run_tree_search({path, {0, 1, 2, 3}, 3, {1, 3, 2}}, 0.5, rng);
    CHECK(b.prologue_jumps == 2);
    CHECK(b.final_car == 0);
  }
  SUBCASE("trace line format") {
    const SearchTrace a = run_tree_search({path, {0, 1, 2, 3}, 3, {3, 2, 1}}, 0.5, rng);
    CHECK(format_trace_line(0, a.steps[0]) == "t=0 region=outer car=2 gamma=- jump=1");
  }
}

TEST_CASE("star with H = 1 meets the jump bound in expectation") {
  // Root 0 without a spot, six leaf spots.
  std::vector<Edge> edges;
  for (int i = 1; i <= 6; ++i) edges.push_back({0, i, 1.0});
  auto star = make_tree(7, edges);
  const double eps = 0.3;
  const int trials = 4000;
  double sum = 0.0;
  double sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(17, t);
    const SearchTrace tr = run_tree_search({star, {1, 2, 3, 4, 5, 6}, 0, {4, 1, 6, 2, 5}}, eps, rng);
    CHECK(tr.final_car == 3);
    sum += tr.core_jumps;
    sq += double(tr.core_jumps) * tr.core_jumps;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt(std::max(0.0, sq / trials - mean * mean));
  CHECK(mean <= (1 + eps) * 1 + std::log(6.0) / eps + 3 * sd / std::sqrt(double(trials)));
}

TEST_CASE("random runs keep the search invariants") {
  Rng gen(23);
  for (int k = 0; k < 150; ++k) {
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(2 + static_cast<int>(gen.below(25)), 50.0, gen));
    const SearchInstance inst = gen_search_instance(tree, 1 + static_cast<int>(gen.below(tree->size())), gen);
    const double eps = gen.uniform(0.05, 0.95);
    std::vector<int> counts(tree->size(), 0);
    for (Vertex s : inst.spots) counts[s] = 1;
    Rng rng(k);
    TreeSearch s(tree, counts, inst.start, eps);
    s.settle(rng);
    for (Vertex r : inst.kills) {
      if (s.phase() == Phase::kCore) {
        // Experts through r share one counter.
        const ExpertSets sets = s.sets_xyf(r);
        for (int sigma : sets.x) CHECK(s.frontier_hits()[sigma] == s.frontier_hits()[sets.x.front()]);
        const std::vector<int> alive = s.alive_experts();
        CHECK(std::find(alive.begin(), alive.end(), s.gamma()) != alive.end());
      }
      s.decommission(r, rng);
      if (s.phase() == Phase::kCore) CHECK(s.region_of(s.car()) == Region::kFrontier);
    }
    CHECK(s.car() == inst.survivor());
    CHECK(s.prologue_jumps() <= s.index().height);
  }
}

TEST_CASE("constructor validation") {
  auto tree = make_tree(2, {{0, 1, 1}});
  CHECK_THROWS_AS(TreeSearch(tree, spots_at(2, {1}), 0, 0.0), InputError);
  CHECK_THROWS_AS(TreeSearch(tree, spots_at(2, {1}), 0, 1.0), InputError);
  CHECK_THROWS_AS(TreeSearch(tree, spots_at(2, {1}), 4, 0.5), InputError);
  Rng rng(1);
  TreeSearch s(tree, spots_at(2, {1}), 0, 0.5);
  CHECK_THROWS_AS(s.decommission(1, rng), LogicError);
}
