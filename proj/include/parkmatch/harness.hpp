#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "parkmatch/grove.hpp"
#include "parkmatch/grove_match.hpp"
#include "parkmatch/tree_match.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

// Statistical checks use 3-sigma binomial bands plus this absolute slack.
inline constexpr double kBandSlack = 1e-6;

// ---- q-distribution validity -------------------------------------------

struct QValidityReport {
  std::size_t states = 0;     // core states visited
  std::size_t laws = 0;       // compute_q calls checked
  std::size_t negative = 0;   // laws with an entry below 0
  std::size_t bad_sum = 0;    // laws summing off 1 by more than 1e-12
  double worst_sum_error = 0.0;
  double min_entry = 0.0;
  std::size_t instances = 0;
  bool pass() const { return negative == 0 && bad_sum == 0 && states > 0; }
};

// Walks random core states of random search instances (n <= max_n, at most
// max_experts leaf-spots) until `states` states with an alive decommission
// target were seen, checking compute_q for every sigma in X.
QValidityReport check_q_validity(std::size_t states, std::uint64_t seed, int max_n = 30, int max_experts = 8);

// ---- occupancy ------------------------------------------------------------

// pi-tilde per core time, recomputed from the kill order alone: entry
// [t - core_begins_at][k] belongs to the k-th leaf-spot in vertex order.
std::vector<std::vector<double>> pi_tilde_schedule(const SearchInstance& instance, double epsilon,
                                                   std::size_t core_begins_at);

struct OccupancyCell {
  std::size_t t;
  int sigma;
  double p_hat;
  double pi_tilde;
  double z;
  bool in_band;
};

struct OccupancyReport {
  std::size_t trials = 0;
  std::size_t core_begins_at = 0;
  std::size_t phase_mismatches = 0;  // trials whose core phase began elsewhere
  std::vector<OccupancyCell> cells;  // alive experts at core times
  std::size_t outside_band = 0;
  std::size_t flagged = 0;  // |z| > 4
  std::size_t rerun_cells = 0;
  std::size_t failed_after_rerun = 0;
  double fail_fraction() const { return cells.empty() ? 0.0 : double(failed_after_rerun) / double(cells.size()); }
  // At most 0.3% of cells may fail after the re-run.
  bool pass() const { return phase_mismatches == 0 && fail_fraction() <= 0.003; }
};

// Empirical frequency of gamma before every core decommission vs pi-tilde.
// Cells outside the band are re-estimated once with 4x trials on a fresh
// stream; a cell fails if it is outside the band both times.
OccupancyReport estimate_occupancy(const SearchInstance& instance, double epsilon, std::size_t trials,
                                   std::uint64_t seed, int workers = 0);

// ---- jump bound -----------------------------------------------------------

struct JumpReport {
  std::size_t trials = 0;
  int height = 0;
  int experts = 0;
  double epsilon = 0.0;
  double bound = 0.0;  // (1 + eps) H + ln(d) / eps
  double mean_core = 0.0;
  double stderr_core = 0.0;
  int max_core = 0;
  int max_prologue = 0;
  std::size_t prologue_violations = 0;
  bool pass() const { return prologue_violations == 0 && mean_core <= bound + 3.0 * stderr_core; }
};

JumpReport check_jump_bound(const SearchInstance& instance, double epsilon, std::size_t trials, std::uint64_t seed,
                            int workers = 0);

// ---- monotonicity ---------------------------------------------------------

enum class MatcherKind { kTreeMatch, kGroveMatch };
const char* to_string(MatcherKind kind);

struct MonotoneViolation {
  Vertex far;   // u
  Vertex near;  // v, next to u on the way to s
  Vertex server;
  double p_far;
  double p_near;
  double allowance;
};

struct MonotonicityReport {
  MatcherKind kind = MatcherKind::kTreeMatch;
  bool conditioned = true;
  std::size_t trials = 0;
  std::size_t history = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t exact_checked = 0;
  std::size_t exact_violations = 0;
  double max_exact_gap = 0.0;
  double max_estimate_z = 0.0;  // empirical law vs exact law
  std::vector<MonotoneViolation> examples;
  bool pass() const { return violations == 0 && exact_violations == 0; }
};

// Definition-1 test of the next request after serving the first `history`
// requests of the instance. Conditioned: the history is replayed once with
// a fixed stream and each probe clones that state; the exact law is checked
// too. Unconditioned: every probe trial replays the history on its own
// stream. GroveMatch uses one grove built from the seed.
MonotonicityReport check_monotonicity(const MatchInstance& instance, std::size_t history, MatcherKind kind,
                                      double epsilon, double alpha, std::size_t trials, std::uint64_t seed,
                                      bool conditioned, int workers = 0);

// ---- distortion and hops --------------------------------------------------

struct DistortionReport {
  std::size_t builds = 0;
  double alpha = 0.0;
  double delta = 0.0;
  double log_alpha_delta = 0.0;
  double bound_factor = 0.0;          // alpha (1 + log_alpha Delta)
  double bound_factor_natural = 0.0;  // alpha (1 + ln Delta)
  std::size_t lower_violations = 0;   // d_G < d_T somewhere
  std::size_t pairs = 0;
  std::size_t pairs_over_bound = 0;
  std::size_t pairs_over_natural = 0;
  double worst_mean_ratio = 0.0;  // max over pairs of mean d_G / d_T
  std::size_t hop_violations = 0;
  int max_hops = 0;
  int max_depth = 0;
  std::size_t edge_count_errors = 0;
  bool pass_lower() const { return lower_violations == 0; }
  bool pass_expected() const { return pairs_over_bound == 0; }
  bool pass_hops() const { return hop_violations == 0; }
};

// `pairs` sampled vertex pairs (all pairs when 0) on `builds` independent
// groves of one tree; the lower bound and hop bound are checked on all
// pairs and canopies of every build.
DistortionReport check_distortion(std::shared_ptr<const WeightedTree> tree, double alpha, std::size_t builds,
                                  std::uint64_t seed, std::size_t pairs = 0, int workers = 0);

// ---- competitiveness ------------------------------------------------------

// (3 e^5 alpha L^2 + 2 e^4 L) * alpha (1 + L) with L = max(1, log_alpha
// Delta): the d_G recurrences unrolled at depth 1 times the expected
// distortion of the grove.
double grove_match_bound(double alpha, double delta);

struct ExperimentConfig {
  SearchInstance instance;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  int workers = 0;
};

struct RatioReport {
  std::size_t trials = 0;
  int n = 0;
  double delta = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double opt = 0.0;
  double alg_mean = 0.0;
  double alg_std = 0.0;
  double alg_max = 0.0;
  double grove_cost_mean = 0.0;
  double ratio_mean = 0.0;
  double ratio_std = 0.0;
  double ratio_max = 0.0;
  double bound = 0.0;
  std::vector<DepthCharge> mean_charges;
  bool pass() const { return std::isfinite(ratio_mean) && ratio_mean < bound; }
};

// Fresh grove and GroveMatch run per trial; opt is the direct drive to the
// survivor.
RatioReport run_experiment(const ExperimentConfig& config);

}  // namespace parkmatch
