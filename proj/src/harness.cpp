#include "parkmatch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "parkmatch/assignment.hpp"
#include "parkmatch/errors.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/parallel.hpp"

namespace parkmatch {

int default_workers() {
  if (const char* env = std::getenv("PARKMATCH_THREADS")) {
    int w = std::atoi(env);
    if (w > 0) return w;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp<unsigned>(hw, 1, 16));
}

namespace {

constexpr std::size_t kChunk = 256;

std::vector<int> spot_counts(const SearchInstance& instance) {
  std::vector<int> counts(instance.tree->size(), 0);
  for (Vertex s : instance.spots) counts[s] = 1;
  return counts;
}

// Half-width of the acceptance band around probability p with n draws.
double band(double p, std::size_t n) {
  return 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)) + kBandSlack;
}

double z_score(double p_hat, double p, std::size_t n) {
  double var = p * (1.0 - p) / static_cast<double>(n);
  if (var <= 0.0) return std::abs(p_hat - p) <= kBandSlack ? 0.0 : std::numeric_limits<double>::infinity();
  return (p_hat - p) / std::sqrt(var);
}

}  // namespace

// ---- q-distribution validity -------------------------------------------

QValidityReport check_q_validity(std::size_t states, std::uint64_t seed, int max_n, int max_experts) {
  if (max_n < 2) throw InputError("max_n must be at least 2");
  QValidityReport report;
  for (std::uint64_t inst = 0; report.states < states; ++inst) {
    Rng rng(seed, inst);
    int n = 2 + static_cast<int>(rng.below(static_cast<std::size_t>(max_n - 1)));
    double delta = std::exp2(rng.uniform(0.0, 6.0));
    auto tree = std::make_shared<const WeightedTree>(gen_random_tree(n, std::max(delta, 1.0), rng));
    int spots = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(std::min(n, 12))));
    SearchInstance instance = gen_search_instance(tree, spots, rng, false);
    std::vector<char> mask(n, 0);
    for (Vertex s : instance.spots) mask[s] = 1;
    if (build_expert_index(*tree, mask).size() > max_experts) continue;
    ++report.instances;

    TreeSearch search(tree, spot_counts(instance), instance.start, rng.uniform(0.05, 0.95));
    search.settle(rng);
    for (Vertex r : instance.kills) {
      if (search.phase() == Phase::kCore && search.alive(r)) {
        ++report.states;
        ExpertSets sets = search.sets_xyf(r);
        for (int sigma : sets.x) {
          Eigen::VectorXd q = search.compute_q(sigma, r);
          ++report.laws;
          double err = std::abs(q.sum() - 1.0);
          report.worst_sum_error = std::max(report.worst_sum_error, err);
          report.min_entry = std::min(report.min_entry, q.minCoeff());
          if (q.minCoeff() < 0.0) ++report.negative;
          if (err > 1e-12) ++report.bad_sum;
        }
      }
      search.decommission(r, rng);
    }
  }
  return report;
}

// ---- occupancy ------------------------------------------------------------

std::vector<std::vector<double>> pi_tilde_schedule(const SearchInstance& instance, double epsilon,
                                                   std::size_t core_begins_at) {
  instance.validate();
  const WeightedTree& tree = *instance.tree;
  std::vector<char> alive(tree.size(), 0);
  for (Vertex s : instance.spots) alive[s] = 1;

  // Leaf-spots: spots with no other spot below them.
  std::vector<Vertex> leaves;
  for (Vertex s : instance.spots) {
    bool leaf = true;
    for (Vertex w : instance.spots)
      if (w != s && tree.is_ancestor(s, w)) leaf = false;
    if (leaf) leaves.push_back(s);
  }
  std::sort(leaves.begin(), leaves.end());
  std::vector<std::vector<Vertex>> path_spots(leaves.size());
  for (std::size_t k = 0; k < leaves.size(); ++k)
    for (Vertex v = leaves[k]; v != kNoVertex; v = tree.parent(v))
      if (alive[v]) path_spots[k].push_back(v);

  std::vector<int> hits(leaves.size(), 0);
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < instance.kills.size(); ++t) {
    if (t >= core_begins_at) {
      std::vector<double> row(leaves.size(), 0.0);
      double total = 0.0;
      for (std::size_t k = 0; k < leaves.size(); ++k) {
        bool expert_alive = std::any_of(path_spots[k].begin(), path_spots[k].end(), [&](Vertex v) { return alive[v]; });
        if (!expert_alive) continue;
        row[k] = std::pow(1.0 - epsilon, hits[k]);
        total += row[k];
      }
      for (double& x : row) x /= total;
      out.push_back(std::move(row));
    }
    const Vertex r = instance.kills[t];
    int z = 0;
    for (Vertex v = r; v != kNoVertex; v = tree.parent(v)) z += alive[v];
    if (t >= core_begins_at && z == 1)
      for (std::size_t k = 0; k < leaves.size(); ++k)
        if (std::find(path_spots[k].begin(), path_spots[k].end(), r) != path_spots[k].end()) ++hits[k];
    alive[r] = 0;
  }
  return out;
}

namespace {

struct OccupancyCounts {
  std::vector<std::uint64_t> gamma;  // [(t - core) * d + sigma]
  std::size_t mismatches = 0;
};

OccupancyCounts count_gamma(const SearchInstance& instance, double epsilon, std::size_t trials, std::uint64_t seed,
                            std::size_t core, int experts, int workers) {
  const std::size_t times = instance.kills.size() - core;
  const auto counts = spot_counts(instance);
  std::vector<OccupancyCounts> parts(chunk_count(trials, kChunk));
  for_each_chunk(trials, kChunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    OccupancyCounts local;
    local.gamma.assign(times * experts, 0);
    for (std::size_t trial = begin; trial < end; ++trial) {
      Rng rng(seed, trial);
      TreeSearch search(instance.tree, counts, instance.start, epsilon);
      search.settle(rng);
      bool mismatch = false;
      for (std::size_t t = 0; t < instance.kills.size(); ++t) {
        bool core_now = search.phase() == Phase::kCore;
        if (core_now != (t >= core)) mismatch = true;
        if (t >= core && core_now) ++local.gamma[(t - core) * experts + search.gamma()];
        search.decommission(instance.kills[t], rng);
      }
      local.mismatches += mismatch;
    }
    parts[c] = std::move(local);
  });
  OccupancyCounts total;
  total.gamma.assign(times * experts, 0);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.gamma.size(); ++i) total.gamma[i] += p.gamma[i];
    total.mismatches += p.mismatches;
  }
  return total;
}

}  // namespace

OccupancyReport estimate_occupancy(const SearchInstance& instance, double epsilon, std::size_t trials,
                                   std::uint64_t seed, int workers) {
  instance.validate();
  if (trials == 0) throw InputError("need at least one trial");
  OccupancyReport report;
  report.trials = trials;
  {
    Rng probe(seed, std::numeric_limits<std::uint64_t>::max());
    report.core_begins_at = run_tree_search(instance, epsilon, probe).core_begins_at;
  }
  const std::size_t core = report.core_begins_at;
  const auto schedule = pi_tilde_schedule(instance, epsilon, core);

  std::vector<char> mask(instance.tree->size(), 0);
  for (Vertex s : instance.spots) mask[s] = 1;
  const ExpertIndex index = build_expert_index(*instance.tree, mask);
  const int d = index.size();
  {
    std::vector<Vertex> leaves = index.leaf_spots;
    std::sort(leaves.begin(), leaves.end());
    if (leaves != index.leaf_spots) throw LogicError("expert numbering is not in vertex order");
  }

  OccupancyCounts counts = count_gamma(instance, epsilon, trials, seed, core, d, workers);
  report.phase_mismatches = counts.mismatches;
  std::vector<std::size_t> outside;
  for (std::size_t t = 0; t < schedule.size(); ++t)
    for (int sigma = 0; sigma < d; ++sigma) {
      double pt = schedule[t][sigma];
      if (pt <= 0.0) continue;
      double p_hat = double(counts.gamma[t * d + sigma]) / double(trials);
      OccupancyCell cell{core + t, sigma, p_hat, pt, z_score(p_hat, pt, trials), std::abs(p_hat - pt) <= band(pt, trials)};
      if (!cell.in_band) {
        ++report.outside_band;
        outside.push_back(report.cells.size());
      }
      if (std::abs(cell.z) > 4.0) ++report.flagged;
      report.cells.push_back(cell);
    }

  if (!outside.empty()) {
    const std::size_t more = 4 * trials;
    OccupancyCounts again = count_gamma(instance, epsilon, more, seed ^ 0x5bd1e9955bd1e995ULL, core, d, workers);
    report.rerun_cells = outside.size();
    for (std::size_t i : outside) {
      const OccupancyCell& cell = report.cells[i];
      double p_hat = double(again.gamma[(cell.t - core) * d + cell.sigma]) / double(more);
      if (std::abs(p_hat - cell.pi_tilde) > band(cell.pi_tilde, more)) ++report.failed_after_rerun;
    }
  }
  return report;
}

// ---- jump bound -----------------------------------------------------------

JumpReport check_jump_bound(const SearchInstance& instance, double epsilon, std::size_t trials, std::uint64_t seed,
                            int workers) {
  instance.validate();
  if (trials == 0) throw InputError("need at least one trial");
  std::vector<char> mask(instance.tree->size(), 0);
  for (Vertex s : instance.spots) mask[s] = 1;
  const ExpertIndex index = build_expert_index(*instance.tree, mask);

  JumpReport report;
  report.trials = trials;
  report.height = index.height;
  report.experts = index.size();
  report.epsilon = epsilon;
  report.bound = (1.0 + epsilon) * index.height + std::log(static_cast<double>(index.size())) / epsilon;

  struct Part {
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;
    int max_core = 0;
    int max_prologue = 0;
    std::size_t violations = 0;
  };
  std::vector<Part> parts(chunk_count(trials, kChunk));
  for_each_chunk(trials, kChunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Part local;
    for (std::size_t trial = begin; trial < end; ++trial) {
      Rng rng(seed, trial);
      SearchTrace trace = run_tree_search(instance, epsilon, rng);
      auto cj = static_cast<std::uint64_t>(trace.core_jumps);
      local.sum += cj;
      local.sum_sq += cj * cj;
      local.max_core = std::max(local.max_core, trace.core_jumps);
      local.max_prologue = std::max(local.max_prologue, trace.prologue_jumps);
      if (trace.prologue_jumps > index.height) ++local.violations;
    }
    parts[c] = local;
  });
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  for (const Part& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    report.max_core = std::max(report.max_core, p.max_core);
    report.max_prologue = std::max(report.max_prologue, p.max_prologue);
    report.prologue_violations += p.violations;
  }
  const double n = static_cast<double>(trials);
  report.mean_core = double(sum) / n;
  double var = trials > 1 ? (double(sum_sq) - n * report.mean_core * report.mean_core) / (n - 1.0) : 0.0;
  report.stderr_core = std::sqrt(std::max(var, 0.0) / n);
  return report;
}

// ---- monotonicity ---------------------------------------------------------

const char* to_string(MatcherKind kind) { return kind == MatcherKind::kTreeMatch ? "treematch" : "grovematch"; }

namespace {

class AnyMatcher {
 public:
  AnyMatcher(MatcherKind kind, const MatchInstance& instance, const std::shared_ptr<const Grove>& grove,
             double epsilon) {
    if (kind == MatcherKind::kTreeMatch)
      tree_.emplace(instance.tree, instance.servers, epsilon);
    else
      grove_.emplace(grove, instance.servers, epsilon);
  }

  Vertex serve(Vertex v, Rng& rng) { return tree_ ? tree_->serve(v, rng) : grove_->serve(v, rng).server; }
  Eigen::VectorXd law(Vertex v) const { return tree_ ? tree_->match_law(v) : grove_->match_law(v); }
  const std::vector<int>& unmatched() const { return tree_ ? tree_->unmatched() : grove_->unmatched(); }

 private:
  std::optional<TreeMatch> tree_;
  std::optional<GroveMatch> grove_;
};

}  // namespace

MonotonicityReport check_monotonicity(const MatchInstance& instance, std::size_t history, MatcherKind kind,
                                      double epsilon, double alpha, std::size_t trials, std::uint64_t seed,
                                      bool conditioned, int workers) {
  instance.validate();
  if (trials == 0) throw InputError("need at least one trial");
  if (history > instance.requests.size()) throw InputError("history longer than the request sequence");
  if (static_cast<int>(history) >= instance.server_total()) throw InputError("no server left for the probe");
  const WeightedTree& tree = *instance.tree;
  const int n = tree.size();

  std::shared_ptr<const Grove> grove;
  if (kind == MatcherKind::kGroveMatch) {
    Rng grove_rng(seed, 2);
    grove = std::make_shared<const Grove>(grove_build(instance.tree, alpha, grove_rng));
  }
  const std::vector<Vertex> prefix(instance.requests.begin(), instance.requests.begin() + history);

  MonotonicityReport report;
  report.kind = kind;
  report.conditioned = conditioned;
  report.trials = trials;
  report.history = history;

  std::optional<AnyMatcher> state;
  std::vector<Eigen::VectorXd> exact;
  if (conditioned) {
    state.emplace(kind, instance, grove, epsilon);
    Rng rng(seed, 1);
    for (Vertex r : prefix) state->serve(r, rng);
    for (Vertex u = 0; u < n; ++u) exact.push_back(state->law(u));
  }

  const std::size_t total = trials * static_cast<std::size_t>(n);
  std::vector<std::vector<std::uint64_t>> parts(chunk_count(total, kChunk));
  for_each_chunk(total, kChunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<std::uint64_t> local(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto u = static_cast<Vertex>(i / trials);
      const std::size_t t = i % trials;
      Rng rng(seed, (static_cast<std::uint64_t>(u) + 16) << 32 | t);
      Vertex s;
      if (conditioned) {
        AnyMatcher copy = *state;
        s = copy.serve(u, rng);
      } else {
        AnyMatcher fresh(kind, instance, grove, epsilon);
        for (Vertex r : prefix) fresh.serve(r, rng);
        s = fresh.serve(u, rng);
      }
      ++local[static_cast<std::size_t>(u) * n + s];
    }
    parts[c] = std::move(local);
  });
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(n) * n, 0);
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.size(); ++i) hits[i] += p[i];
  auto p_hat = [&](Vertex u, Vertex s) { return double(hits[static_cast<std::size_t>(u) * n + s]) / double(trials); };

  const std::vector<int>& available = conditioned ? state->unmatched() : instance.servers;
  for (Vertex c = 0; c < n; ++c) {
    Vertex b = tree.parent(c);
    if (b == kNoVertex) continue;
    for (Vertex s = 0; s < n; ++s) {
      if (available[s] <= 0) continue;
      bool down = tree.is_ancestor(c, s);
      Vertex far = down ? b : c;
      Vertex near = down ? c : b;
      double pf = p_hat(far, s);
      double pn = p_hat(near, s);
      double allowance = 3.0 * (std::sqrt(pf * (1 - pf) / trials) + std::sqrt(pn * (1 - pn) / trials)) + kBandSlack;
      ++report.checked;
      if (pf > pn + allowance) {
        ++report.violations;
        if (report.examples.size() < 10) report.examples.push_back({far, near, s, pf, pn, allowance});
      }
      if (conditioned) {
        ++report.exact_checked;
        double gap = exact[far][s] - exact[near][s];
        report.max_exact_gap = std::max(report.max_exact_gap, gap);
        if (gap > 1e-12) ++report.exact_violations;
      }
    }
  }
  if (conditioned)
    for (Vertex u = 0; u < n; ++u)
      for (Vertex s = 0; s < n; ++s)
        report.max_estimate_z = std::max(report.max_estimate_z, std::abs(z_score(p_hat(u, s), exact[u][s], trials)));
  return report;
}

// ---- distortion and hops --------------------------------------------------

DistortionReport check_distortion(std::shared_ptr<const WeightedTree> tree, double alpha, std::size_t builds,
                                  std::uint64_t seed, std::size_t pairs, int workers) {
  const int n = tree->size();
  if (n < 2) throw DegenerateInputError("distortion needs at least two vertices");
  if (builds == 0) throw InputError("need at least one build");
  DistortionReport report;
  report.builds = builds;
  report.alpha = alpha;
  report.delta = tree->eccentricity_from_root();
  report.log_alpha_delta = std::log(report.delta) / std::log(alpha);
  report.bound_factor = alpha * (1.0 + report.log_alpha_delta);
  report.bound_factor_natural = alpha * (1.0 + std::log(report.delta));

  std::vector<std::pair<Vertex, Vertex>> all_pairs;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) all_pairs.emplace_back(u, v);
  std::vector<std::pair<Vertex, Vertex>> sampled = all_pairs;
  if (pairs > 0 && pairs < all_pairs.size()) {
    Rng pick(seed, 3);
    shuffle(sampled, pick);
    sampled.resize(pairs);
    std::sort(sampled.begin(), sampled.end());
  }
  report.pairs = sampled.size();

  struct Part {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::size_t lower = 0;
    std::size_t hops = 0;
    std::size_t edges = 0;
    int max_hops = 0;
    int max_depth = 0;
  };
  const std::size_t chunk = 64;
  std::vector<Part> parts(chunk_count(builds, chunk));
  for_each_chunk(builds, chunk, workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Part local;
    local.sum.assign(sampled.size(), 0.0);
    local.sum_sq.assign(sampled.size(), 0.0);
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng(seed, b + 1024);
      Grove grove = grove_build(tree, alpha, rng);
      bool lower_ok = true;
      for (const auto& [u, v] : all_pairs)
        if (grove.d_G(u, v) < tree->distance(u, v)) lower_ok = false;
      local.lower += !lower_ok;
      std::size_t canopy_edges = 0;
      bool hops_ok = true;
      for (const GroveNode& node : grove.nodes()) {
        canopy_edges += node.edges.size();
        int h = node.max_hops();
        local.max_hops = std::max(local.max_hops, h);
        if (h > alpha + 1.0) hops_ok = false;
      }
      local.hops += !hops_ok;
      local.edges += canopy_edges != static_cast<std::size_t>(n - 1);
      local.max_depth = std::max(local.max_depth, grove.max_depth());
      for (std::size_t p = 0; p < sampled.size(); ++p) {
        double g = grove.d_G(sampled[p].first, sampled[p].second);
        local.sum[p] += g;
        local.sum_sq[p] += g * g;
      }
    }
    parts[c] = std::move(local);
  });

  std::vector<double> sum(sampled.size(), 0.0), sum_sq(sampled.size(), 0.0);
  for (const Part& p : parts) {
    for (std::size_t i = 0; i < sampled.size(); ++i) {
      sum[i] += p.sum[i];
      sum_sq[i] += p.sum_sq[i];
    }
    report.lower_violations += p.lower;
    report.hop_violations += p.hops;
    report.edge_count_errors += p.edges;
    report.max_hops = std::max(report.max_hops, p.max_hops);
    report.max_depth = std::max(report.max_depth, p.max_depth);
  }
  const double nb = static_cast<double>(builds);
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    double d = tree->distance(sampled[i].first, sampled[i].second);
    double mean = sum[i] / nb;
    double var = builds > 1 ? std::max(sum_sq[i] - nb * mean * mean, 0.0) / (nb - 1.0) : 0.0;
    double se = std::sqrt(var / nb);
    report.worst_mean_ratio = std::max(report.worst_mean_ratio, mean / d);
    if (mean > report.bound_factor * d + 3.0 * se) ++report.pairs_over_bound;
    if (mean > report.bound_factor_natural * d + 3.0 * se) ++report.pairs_over_natural;
  }
  return report;
}

// ---- competitiveness ------------------------------------------------------

double grove_match_bound(double alpha, double delta) {
  const double L = std::max(1.0, std::log(std::max(delta, 1.0)) / std::log(alpha));
  const double e4 = std::exp(4.0);
  const double e5 = std::exp(5.0);
  return (3.0 * e5 * alpha * L * L + 2.0 * e4 * L) * alpha * (1.0 + L);
}

RatioReport run_experiment(const ExperimentConfig& config) {
  const SearchInstance& instance = config.instance;
  instance.validate();
  if (config.trials == 0) throw InputError("need at least one trial");
  const WeightedTree& tree = *instance.tree;
  RatioReport report;
  report.trials = config.trials;
  report.n = tree.size();
  report.delta = tree.size() > 1 ? tree.eccentricity_from_root() : 0.0;
  GroveParameters params = grove_parameters(report.n, report.delta, config.alpha, config.epsilon);
  report.alpha = params.alpha;
  report.epsilon = params.epsilon;
  report.opt = opt_search_cost(instance);
  if (!(report.opt > 0.0)) throw InputError("the car starts on the survivor; the ratio is undefined");
  report.bound = grove_match_bound(report.alpha, report.delta);

  const MatchInstance match = as_match_instance(instance);
  struct Trial {
    double cost;
    double grove_cost;
    std::vector<DepthCharge> charges;
  };
  std::vector<Trial> results(config.trials);
  for_each_chunk(config.trials, 8, config.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng(config.seed, t);
      auto grove = std::make_shared<const Grove>(grove_build(instance.tree, report.alpha, rng));
      GroveMatchResult r = run_grove_match(match, grove, report.epsilon, rng);
      results[t] = {r.total_cost, r.total_grove_cost, std::move(r.charges)};
    }
  });

  double sum = 0.0, sum_sq = 0.0, gsum = 0.0;
  std::size_t depth = 0;
  for (const Trial& t : results) depth = std::max(depth, t.charges.size());
  report.mean_charges.resize(depth);
  for (std::size_t d = 0; d < depth; ++d) report.mean_charges[d].depth = static_cast<int>(d + 1);
  for (const Trial& t : results) {
    sum += t.cost;
    sum_sq += t.cost * t.cost;
    gsum += t.grove_cost;
    report.alg_max = std::max(report.alg_max, t.cost);
    for (std::size_t d = 0; d < t.charges.size(); ++d) {
      DepthCharge& m = report.mean_charges[d];
      m.prologue += t.charges[d].prologue;
      m.core += t.charges[d].core;
      m.fallback += t.charges[d].fallback;
      m.prologue_grove += t.charges[d].prologue_grove;
      m.core_grove += t.charges[d].core_grove;
      m.fallback_grove += t.charges[d].fallback_grove;
    }
  }
  const double n = static_cast<double>(config.trials);
  report.alg_mean = sum / n;
  report.alg_std = config.trials > 1 ? std::sqrt(std::max(sum_sq - n * report.alg_mean * report.alg_mean, 0.0) / (n - 1.0)) : 0.0;
  report.grove_cost_mean = gsum / n;
  report.ratio_mean = report.alg_mean / report.opt;
  report.ratio_std = report.alg_std / report.opt;
  report.ratio_max = report.alg_max / report.opt;
  for (DepthCharge& m : report.mean_charges) {
    m.prologue /= n;
    m.core /= n;
    m.fallback /= n;
    m.prologue_grove /= n;
    m.core_grove /= n;
    m.fallback_grove /= n;
  }
  return report;
}

}  // namespace parkmatch
