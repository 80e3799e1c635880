#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "parkmatch/assignment.hpp"
#include "parkmatch/errors.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/grove.hpp"
#include "parkmatch/harness.hpp"
#include "parkmatch/reports.hpp"

using namespace parkmatch;

namespace {

double brute_force_assignment(const Eigen::MatrixXd& c) {
  std::vector<int> cols(c.cols());
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Permutations of all columns; the first rows() entries are the choice.
  do {
    double s = 0.0;
    for (Eigen::Index r = 0; r < c.rows(); ++r) s += c(r, cols[r]);
    best = std::min(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

std::shared_ptr<const WeightedTree> star(int legs, double w = 1.0) {
  std::vector<Edge> e;
  for (int i = 1; i <= legs; ++i) e.push_back({0, i, w});
  return std::make_shared<const WeightedTree>(legs + 1, e, 0);
}

}  // namespace

TEST_CASE("assignment matches brute force") {
  Rng rng(71);
  for (int k = 0; k < 300; ++k) {
    const int rows = 1 + static_cast<int>(rng.below(5));
    const int cols = rows + static_cast<int>(rng.below(3));
    Eigen::MatrixXd c(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) c(i, j) = std::floor(rng.uniform(0.0, 20.0));
    const AssignmentSolution s = solve_assignment(c);
    CHECK(s.cost == doctest::Approx(brute_force_assignment(c)));
    std::set<int> used(s.column_of.begin(), s.column_of.end());
    CHECK(used.size() == static_cast<std::size_t>(rows));
    double sum = 0.0;
    for (int i = 0; i < rows; ++i) sum += c(i, s.column_of[i]);
    CHECK(sum == doctest::Approx(s.cost));
  }
  CHECK_THROWS_AS(solve_assignment(Eigen::MatrixXd::Zero(3, 2)), InputError);
}

TEST_CASE("offline optimum examples") {
  auto path = std::make_shared<const WeightedTree>(3, std::vector<Edge>{{0, 1, 1.0}, {1, 2, 2.0}}, 0);
  CHECK(opt_matching_cost({path, {1, 1, 1}, {0, 1, 2}}) == 0.0);
  // One request at 1, servers at distances 1 and 2.
  CHECK(opt_matching_cost({path, {1, 0, 1}, {1}}) == 1.0);
  // Two requests, two servers: checked against both assignments.
  CHECK(opt_matching_cost({path, {1, 0, 1}, {2, 0}}) == 0.0);
  CHECK(opt_matching_cost({path, {1, 0, 1}, {1, 1}}) == 3.0);

  CHECK(opt_search_cost({path, {0, 2}, 2, {0}}) == 0.0);
  CHECK(opt_search_cost({path, {0, 2}, 0, {0}}) == 3.0);
  CHECK(opt_search_cost({path, {0, 2}, 2, {2}}) == 3.0);
}

TEST_CASE("prufer codes round trip") {
  Rng rng(2);
  for (int n = 2; n <= 8; ++n) {
    for (int k = 0; k < 30; ++k) {
      std::vector<int> code(n - 2);
      for (int& c : code) c = static_cast<int>(rng.below(n));
      const WeightedTree t(n, prufer_decode(code, n), 0);
      CHECK(prufer_encode(t) == code);
    }
  }
  CHECK_THROWS_AS(prufer_decode({0, 1}, 3), InputError);
}

TEST_CASE("unlabeled tree shape counts") {
  const std::vector<std::size_t> expected{1, 1, 1, 2, 3, 6, 11, 23};
  for (int n = 1; n <= 8; ++n) CHECK(enumerate_tree_shapes(n).size() == expected[n - 1]);
}

TEST_CASE("random trees reach every shape") {
  Rng rng(5);
  for (int n = 1; n <= 7; ++n) {
    std::set<std::string> shapes;
    for (int k = 0; k < 3000; ++k) shapes.insert(canonical_shape(gen_random_tree(n, 10.0, rng)));
    CHECK(shapes.size() == enumerate_tree_shapes(n).size());
  }
}

TEST_CASE("generated trees respect the requested spread") {
  Rng rng(13);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + static_cast<int>(rng.below(40));
    const double target = std::exp(rng.uniform(std::log(2.0), std::log(1000.0)));
    const WeightedTree t = gen_random_tree(n, target, rng);
    CHECK(t.min_edge_weight() == 1.0);
    const double ecc = t.eccentricity_from_root();
    // A long unit path can overshoot a small target; otherwise within 2x.
    double hops = 0.0;
    for (Vertex v = 0; v < n; ++v) hops = std::max(hops, double(t.depth(v)));
    if (n > 2 && hops < target) {
      CHECK(ecc >= target / 2);
      CHECK(ecc <= target * 2);
    }
  }
  CHECK(gen_random_tree(1, 4.0, rng).size() == 1);
  CHECK(gen_random_tree(2, 4.0, rng).size() == 2);
}

TEST_CASE("q validity on a small sweep") {
  const QValidityReport r = check_q_validity(500, 3);
  CHECK(r.pass());
  CHECK(r.states >= 500);
}

TEST_CASE("occupancy examples") {
  SUBCASE("one expert") {
    auto path = std::make_shared<const WeightedTree>(4, std::vector<Edge>{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}, 0);
    const OccupancyReport r = estimate_occupancy({path, {1, 2, 3}, 0, {1, 2}}, 0.5, 1000, 1, 1);
    CHECK(r.pass());
    for (const OccupancyCell& c : r.cells) {
      CHECK(c.pi_tilde == 1.0);
      CHECK(c.p_hat == 1.0);
    }
  }
  SUBCASE("symmetric pair") {
    const OccupancyReport r = estimate_occupancy({star(2), {1, 2}, 0, {1}}, 0.5, 4000, 2, 2);
    CHECK(r.pass());
    REQUIRE(r.cells.size() == 2);
    CHECK(r.cells[0].pi_tilde == 0.5);
  }
  SUBCASE("asymmetric with frontier hits") {
    // Experts [1, 2], [1, 3], [4]; killing 1 then 2 hits the first two.
    auto t = std::make_shared<const WeightedTree>(
        5, std::vector<Edge>{{0, 1, 1}, {1, 2, 1}, {1, 3, 1}, {0, 4, 1}}, 0);
    const SearchInstance inst{t, {1, 2, 3, 4}, 0, {1, 2, 4}};
    const auto schedule = pi_tilde_schedule(inst, 0.5, 0);
    REQUIRE(schedule.size() == 3);
    CHECK(schedule[0][0] == doctest::Approx(1.0 / 3));
    // After the frontier kill at 1: weights (1/2, 1/2, 1).
    CHECK(schedule[1][2] == doctest::Approx(0.5));
    const OccupancyReport r = estimate_occupancy(inst, 0.5, 5000, 3, 2);
    CHECK(r.pass());
  }
}

TEST_CASE("jump bound examples") {
  auto one = std::make_shared<const WeightedTree>(2, std::vector<Edge>{{0, 1, 1}}, 0);
  const JumpReport a = check_jump_bound({one, {1}, 0, {}}, 0.5, 100, 1, 1);
  CHECK(a.pass());
  CHECK(a.max_core == 0);
  for (double eps : {0.1, 0.3, 0.5}) {
    const JumpReport r = check_jump_bound({star(5), {1, 2, 3, 4, 5}, 0, {3, 1, 5, 2}}, eps, 2000, 4, 2);
    CHECK(r.pass());
    CHECK(r.height == 1);
    CHECK(r.bound == doctest::Approx(1 + eps + std::log(5.0) / eps));
  }
}

TEST_CASE("monotonicity on a small instance") {
  auto t = std::make_shared<const WeightedTree>(
      7, std::vector<Edge>{{0, 1, 1}, {1, 2, 2}, {1, 3, 1}, {0, 4, 3}, {4, 5, 1}, {4, 6, 2}}, 0);
  const MatchInstance inst{t, {0, 0, 1, 1, 0, 1, 1}, {1, 5, 0}};
  for (MatcherKind kind : {MatcherKind::kTreeMatch, MatcherKind::kGroveMatch}) {
    const MonotonicityReport c = check_monotonicity(inst, 1, kind, 0.4, 2.0, 4000, 9, true, 2);
    CHECK(c.pass());
    CHECK(c.exact_checked > 0);
    const MonotonicityReport u = check_monotonicity(inst, 2, kind, 0.4, 2.0, 4000, 9, false, 2);
    CHECK(u.pass());
  }
}

TEST_CASE("distortion and hops on a small tree") {
  Rng rng(21);
  auto t = std::make_shared<const WeightedTree>(gen_random_tree(12, 64.0, rng));
  const DistortionReport r = check_distortion(t, 2.5, 500, 4, 0, 2);
  CHECK(r.pass_lower());
  CHECK(r.pass_hops());
  CHECK(r.edge_count_errors == 0);
  CHECK(r.pairs == 66);
  // The mean ratio is reported, not asserted here; see the next case.
  CHECK(r.worst_mean_ratio >= 1.0);
}

TEST_CASE("top-level cuts follow leaders, not a random offset") {
  // Path 0-1:9, 1-2:10, 2-3:1, R=20, alpha=2, z ~ U[0,10].
  // z<9 makes 1 a leader whose part stops at 2, so 2-3 is cut: probability 0.9,
  // far above alpha*w/R = 0.1.
  auto t = std::make_shared<const WeightedTree>(
      WeightedTree(4, {{0, 1, 9.0}, {1, 2, 10.0}, {2, 3, 1.0}}, 0));
  const int builds = 4000;
  int cut = 0;
  for (int b = 0; b < builds; ++b) {
    Rng r(17, static_cast<std::uint64_t>(b));
    const Grove g = grove_build(t, 2.0, r);
    if (g.edge_depth(3, 2) == 1) ++cut;
  }
  const double p = static_cast<double>(cut) / builds;
  CHECK(std::abs(p - 0.9) < 4 * std::sqrt(0.09 / builds));
}

TEST_CASE("bound formula") {
  const double e4 = std::exp(4.0);
  const double e5 = std::exp(5.0);
  // log_4 16 = 2.
  CHECK(grove_match_bound(4.0, 16.0) == doctest::Approx((3 * e5 * 4 * 4 + 2 * e4 * 2) * 4 * 3));
  // L is floored at 1.
  CHECK(grove_match_bound(4.0, 2.0) == doctest::Approx((3 * e5 * 4 + 2 * e4) * 4 * 2));
}

TEST_CASE("experiment on a small instance") {
  Rng rng(33);
  auto t = std::make_shared<const WeightedTree>(gen_random_tree(15, 64.0, rng));
  ExperimentConfig cfg{gen_search_instance(t, 6, rng), 40, 5, std::nullopt, std::nullopt, 2};
  const RatioReport r = run_experiment(cfg);
  CHECK(r.opt > 0.0);
  CHECK(r.pass());
  CHECK(r.alg_mean >= r.opt * (1 - 1e-12));
}

TEST_CASE("reports do not depend on the worker count") {
  Rng rng(34);
  auto t = std::make_shared<const WeightedTree>(gen_random_tree(14, 64.0, rng));
  SearchInstance inst = gen_search_instance(t, 8, rng);
  inst.start = 0;
  CHECK(report_jumps(check_jump_bound(inst, 0.3, 3000, 8, 1)) ==
        report_jumps(check_jump_bound(inst, 0.3, 3000, 8, 4)));
  CHECK(report_occupancy(estimate_occupancy(inst, 0.3, 3000, 8, 1), true) ==
        report_occupancy(estimate_occupancy(inst, 0.3, 3000, 8, 3), true));
  CHECK(report_distortion(check_distortion(t, 3.0, 300, 8, 0, 1)) ==
        report_distortion(check_distortion(t, 3.0, 300, 8, 0, 4)));
  ExperimentConfig cfg{inst, 30, 8, std::nullopt, std::nullopt, 1};
  const std::string a = report_ratio(run_experiment(cfg));
  cfg.workers = 4;
  CHECK(a == report_ratio(run_experiment(cfg)));
}
