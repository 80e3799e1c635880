// Runs every acceptance criterion at full scale and prints one
// `criterion <k> PASS|FAIL ...` line each. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "parkmatch/assignment.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/grove.hpp"
#include "parkmatch/harness.hpp"
#include "parkmatch/instance_io.hpp"
#include "parkmatch/parallel.hpp"
#include "parkmatch/pricing.hpp"
#include "parkmatch/reports.hpp"

using namespace parkmatch;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) { return format_number(x); }

// Search instances whose core phase begins, with at most `max_experts`
// leaf-spots and at most `max_spots` spots.
std::vector<SearchInstance> core_instances(int count, int max_experts, int max_spots, int max_n, double delta,
                                           std::uint64_t seed) {
  std::vector<SearchInstance> out;
  for (std::uint64_t k = 0; static_cast<int>(out.size()) < count; ++k) {
    Rng rng(seed, k);
    const int n = 6 + static_cast<int>(rng.below(static_cast<std::size_t>(max_n - 5)));
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(n, delta, rng));
    const int spots = 3 + static_cast<int>(rng.below(static_cast<std::size_t>(std::min(n, max_spots) - 2)));
    SearchInstance inst = gen_search_instance(tree, spots, rng);
    std::vector<int> counts(n, 0);
    for (Vertex s : inst.spots) counts[s] = 1;
    const ExpertIndex index = build_expert_index(*tree, {counts.begin(), counts.end()});
    if (index.size() < 2 || index.size() > max_experts) continue;
    Rng probe(0);
    const SearchTrace trace = run_tree_search(inst, 0.5, probe);
    if (trace.core_begins_at + 1 >= inst.kills.size()) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome criterion1() {
  const QValidityReport r = check_q_validity(10000, kSeed);
  return {r.pass(), "states=" + std::to_string(r.states) + " laws=" + std::to_string(r.laws) +
                        " negative=" + std::to_string(r.negative) + " bad_sum=" + std::to_string(r.bad_sum) +
                        " worst_sum_error=" + fmt(r.worst_sum_error) + " min_entry=" + fmt(r.min_entry)};
}

Outcome criterion2() {
  Outcome o;
  std::size_t cells = 0;
  std::size_t failed = 0;
  std::size_t reruns = 0;
  int index = 0;
  for (const SearchInstance& inst : core_instances(6, 6, 20, 24, 64.0, kSeed + 2)) {
    const OccupancyReport r = estimate_occupancy(inst, 0.3, 100000, kSeed + 20 + index, 0);
    cells += r.cells.size();
    failed += r.failed_after_rerun;
    reruns += r.rerun_cells;
    o.pass = o.pass && r.pass();
    ++index;
  }
  o.detail = "instances=" + std::to_string(index) + " cells=" + std::to_string(cells) + " rerun=" +
             std::to_string(reruns) + " failed=" + std::to_string(failed);
  return o;
}

Outcome criterion3() {
  Outcome o;
  int runs = 0;
  double worst_slack = -1e300;
  std::size_t prologue_violations = 0;
  for (const SearchInstance& inst : core_instances(5, 8, 20, 30, 128.0, kSeed + 3)) {
    const GroveParameters gp = grove_parameters(inst.tree->size(), inst.tree->eccentricity_from_root());
    for (double eps : {0.1, 0.3, gp.epsilon}) {
      const JumpReport r = check_jump_bound(inst, eps, 20000, kSeed + 30 + runs, 0);
      prologue_violations += r.prologue_violations;
      worst_slack = std::max(worst_slack, r.mean_core - r.bound);
      o.pass = o.pass && r.pass();
      ++runs;
    }
  }
  o.detail = "runs=" + std::to_string(runs) + " prologue_violations=" + std::to_string(prologue_violations) +
             " max_mean_minus_bound=" + fmt(worst_slack);
  return o;
}

struct PricingSweep {
  std::size_t distributions = 0;
  std::size_t failed_marginals = 0;
  double worst_marginal = 0.0;
  std::size_t partitions = 0;
  std::size_t choice_failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
};

// Criteria 4 and 5 share one sweep: every unlabeled tree shape with at most
// 7 vertices, every server count 1..4, 50 random monotone laws each.
PricingSweep pricing_sweep() {
  PricingSweep sweep;
  Rng rng(kSeed, 4);
  for (int n = 1; n <= 7; ++n) {
    for (const WeightedTree& shape : enumerate_tree_shapes(n)) {
      // Random weights on the shape, so distances are generic.
      std::vector<Edge> edges(shape.edges().begin(), shape.edges().end());
      for (Edge& e : edges) e.weight = 1.0 + std::floor(rng.uniform(0.0, 9.0));
      const WeightedTree t(n, edges, 0);
      for (int servers = 1; servers <= 4; ++servers) {
        for (int k = 0; k < 50; ++k) {
          std::vector<Vertex> at(servers);
          for (auto& s : at) s = static_cast<Vertex>(rng.below(n));
          const ProbabilityMatrix pi = random_monotone_pi(t, at, rng);
          const DistributionBuild b = build_partition_distribution(t, at, pi);
          const MarginalReport m = verify_marginals(b.distribution, pi, 1e-9);
          ++sweep.distributions;
          sweep.failed_marginals += !m.pass;
          sweep.worst_marginal = std::max(sweep.worst_marginal, m.max_error);
          for (const auto& e : b.distribution.entries) {
            const PriceTable p = price_partition(t, at, e.partition);
            ++sweep.partitions;
            for (Vertex v = 0; v < n; ++v) {
              const SelfishChoice c = selfish_choice(t, at, p, v);
              sweep.min_margin = std::min(sweep.min_margin, c.margin);
              if (c.server != e.partition.leader_of[v] || !(c.margin > 1e-12)) ++sweep.choice_failures;
            }
          }
        }
      }
    }
  }
  return sweep;
}

struct DistortionRun {
  DistortionReport fixed;
  std::size_t extra_trees = 0;
  std::size_t extra_hop_violations = 0;
  int extra_max_hops = 0;
};

DistortionRun distortion_run() {
  DistortionRun run;
  Rng rng(kSeed, 6);
  auto tree = std::make_shared<const WeightedTree>(gen_random_tree(30, 256.0, rng));
  const GroveParameters gp = grove_parameters(30, tree->eccentricity_from_root());
  run.fixed = check_distortion(tree, gp.alpha, 10000, kSeed + 6, 0, 0);
  // Hops on canopies of other trees and several alphas too.
  for (int k = 0; k < 200; ++k) {
    auto t = std::make_shared<const WeightedTree>(
        gen_random_tree(2 + static_cast<int>(rng.below(59)), std::exp(rng.uniform(0.0, std::log(4096.0))), rng));
    const double alpha = 1.5 + rng.uniform(0.0, 10.0);
    const DistortionReport r = check_distortion(t, alpha, 50, kSeed + 60 + k, 0, 0);
    ++run.extra_trees;
    run.extra_hop_violations += r.hop_violations + r.lower_violations + r.edge_count_errors;
    run.extra_max_hops = std::max(run.extra_max_hops, r.max_hops);
  }
  return run;
}

Outcome criterion8() {
  Outcome o;
  std::size_t reports = 0;
  std::size_t violations = 0;
  std::size_t exact_violations = 0;
  double max_gap = 0.0;
  Rng rng(kSeed, 8);
  for (int k = 0; k < 4; ++k) {
    const int n = 6 + static_cast<int>(rng.below(7));
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(n, 32.0, rng));
    const int servers = 3 + static_cast<int>(rng.below(static_cast<std::size_t>(n - 2)));
    const MatchInstance inst = gen_match_instance(tree, servers, servers, rng);
    const GroveParameters gp = grove_parameters(n, tree->eccentricity_from_root());
    for (MatcherKind kind : {MatcherKind::kTreeMatch, MatcherKind::kGroveMatch}) {
      for (bool conditioned : {true, false}) {
        for (std::size_t history : {std::size_t{0}, std::size_t{1}, std::size_t(servers / 2)}) {
          const MonotonicityReport r = check_monotonicity(inst, history, kind, gp.epsilon, gp.alpha, 50000,
                                                          kSeed + 80 + k, conditioned, 0);
          ++reports;
          violations += r.violations;
          exact_violations += r.exact_violations;
          max_gap = std::max(max_gap, r.max_exact_gap);
          if (!r.pass()) std::fputs(report_monotonicity(r).c_str(), stdout);
          o.pass = o.pass && r.pass();
        }
      }
    }
  }
  o.detail = "reports=" + std::to_string(reports) + " violations=" + std::to_string(violations) +
             " exact_violations=" + std::to_string(exact_violations) + " max_exact_gap=" + fmt(max_gap);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double worst_ratio = 0.0;
  double worst_fraction = 0.0;  // ratio / bound
  for (int k = 0; k < 20; ++k) {
    Rng rng(kSeed + 9, k);
    const int n = 5 + static_cast<int>(rng.below(36));
    const double delta = std::exp(rng.uniform(std::log(2.0), std::log(256.0)));
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(n, delta, rng));
    const int spots = 2 + static_cast<int>(rng.below(static_cast<std::size_t>(n - 1)));
    ExperimentConfig cfg{gen_search_instance(tree, spots, rng), 200, kSeed + 90 + k, std::nullopt, std::nullopt, 0};
    const RatioReport r = run_experiment(cfg);
    std::printf("  instance=%d n=%d delta=%s alpha=%s ratio_mean=%s ratio_max=%s bound=%s\n", k, n,
                fmt(r.delta).c_str(), fmt(r.alpha).c_str(), fmt(r.ratio_mean).c_str(), fmt(r.ratio_max).c_str(),
                fmt(r.bound).c_str());
    worst_ratio = std::max(worst_ratio, r.ratio_mean);
    worst_fraction = std::max(worst_fraction, r.ratio_mean / r.bound);
    o.pass = o.pass && r.pass();
  }
  o.detail = "instances=20 worst_ratio_mean=" + fmt(worst_ratio) + " worst_ratio_over_bound=" + fmt(worst_fraction);
  return o;
}

Outcome criterion10() {
  // The same reports with one worker, four workers and a repeat.
  Rng rng(kSeed, 10);
  auto tree = std::make_shared<const WeightedTree>(gen_random_tree(16, 64.0, rng));
  const SearchInstance inst = core_instances(1, 6, 12, 16, 64.0, kSeed + 10).front();
  const MatchInstance match = gen_match_instance(tree, 6, 6, rng);
  std::vector<std::function<std::string(int)>> runs{
      [&](int) { return report_q_validity(check_q_validity(300, kSeed)); },
      [&](int w) { return report_occupancy(estimate_occupancy(inst, 0.3, 5000, kSeed, w), true); },
      [&](int w) { return report_jumps(check_jump_bound(inst, 0.3, 5000, kSeed, w)); },
      [&](int w) {
        return report_monotonicity(
            check_monotonicity(match, 2, MatcherKind::kGroveMatch, 0.3, 2.5, 3000, kSeed, true, w));
      },
      [&](int w) { return report_distortion(check_distortion(tree, 2.5, 500, kSeed, 0, w)); },
      [&](int w) {
        ExperimentConfig cfg{inst, 50, kSeed, std::nullopt, std::nullopt, w};
        return report_ratio(run_experiment(cfg));
      },
  };
  Outcome o;
  int identical = 0;
  for (auto& run : runs) {
    const std::string a = run(1);
    const std::string b = run(4);
    const std::string c = run(4);
    if (a == b && b == c) ++identical;
    else o.pass = false;
  }
  o.detail = "identical=" + std::to_string(identical) + "/" + std::to_string(runs.size());
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int k, const Outcome& o, double seconds) {
    std::printf("criterion %d %s %s time=%.1fs\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !o.pass;
  };
  auto timed = [&](int k, const std::function<Outcome()>& fn) {
    Clock clock;
    const Outcome o = fn();
    report(k, o, clock.seconds());
  };

  timed(1, criterion1);
  timed(2, criterion2);
  timed(3, criterion3);

  {
    Clock clock;
    const PricingSweep s = pricing_sweep();
    const double t = clock.seconds();
    report(4,
           {s.failed_marginals == 0, "distributions=" + std::to_string(s.distributions) +
                                         " failed=" + std::to_string(s.failed_marginals) +
                                         " worst_error=" + fmt(s.worst_marginal)},
           t);
    report(5,
           {s.choice_failures == 0, "partitions=" + std::to_string(s.partitions) +
                                        " failures=" + std::to_string(s.choice_failures) +
                                        " min_margin=" + fmt(s.min_margin)},
           t);
  }

  {
    Clock clock;
    const DistortionRun d = distortion_run();
    const double t = clock.seconds();
    const DistortionReport& r = d.fixed;
    report(6,
           {r.pass_lower() && r.pass_expected(),
            "builds=" + std::to_string(r.builds) + " pairs=" + std::to_string(r.pairs) + " alpha=" + fmt(r.alpha) +
                " delta=" + fmt(r.delta) + " lower_violations=" + std::to_string(r.lower_violations) +
                " worst_mean_ratio=" + fmt(r.worst_mean_ratio) + " bound_factor=" + fmt(r.bound_factor) +
                " over_bound=" + std::to_string(r.pairs_over_bound) +
                " over_natural_log_bound=" + std::to_string(r.pairs_over_natural)},
           t);
    report(7,
           {r.pass_hops() && d.extra_hop_violations == 0,
            "max_hops=" + std::to_string(r.max_hops) + " alpha=" + fmt(r.alpha) +
                " hop_violations=" + std::to_string(r.hop_violations) + " extra_trees=" +
                std::to_string(d.extra_trees) + " extra_violations=" + std::to_string(d.extra_hop_violations) +
                " extra_max_hops=" + std::to_string(d.extra_max_hops)},
           t);
  }

  timed(8, criterion8);
  timed(9, criterion9);
  timed(10, criterion10);
  return failures;
}
