#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parkmatch/rng.hpp"
#include "parkmatch/tree_metric.hpp"

namespace parkmatch {

// Servers are indexed 0..k-1; server_at[i] is the vertex holding server i.
// pi(i, v) is the probability that a request at v is matched to server i.
using ProbabilityMatrix = Eigen::MatrixXd;

// Server indices for per-vertex counts, in increasing vertex order.
std::vector<Vertex> expand_servers(const std::vector<int>& counts);

// A monotone partition stored as the leader (server index) of the part of
// every vertex. Each leader heads exactly one connected part.
struct MonotonePartition {
  std::vector<int> leader_of;

  struct Part {
    int leader;
    std::vector<Vertex> members;
  };
  // Parts ordered by leader index.
  std::vector<Part> parts() const;
  bool operator==(const MonotonePartition&) const = default;
};

// Throws ValidationError if a part is disconnected or a leader sits outside
// its own part.
void validate_partition(const WeightedTree& tree, const std::vector<Vertex>& server_at, const MonotonePartition& p);

struct PartitionDistribution {
  struct Entry {
    MonotonePartition partition;
    double probability;
  };
  std::vector<Entry> entries;

  double total() const;
  // Probability that a request at w goes to server i.
  double marginal(int server, Vertex w) const;
  const MonotonePartition& sample(Rng& rng) const;
};

// Column sums within 1e-9, entries in [0, 1], and monotone along every edge
// towards every server. Throws ValidationError naming (u, v, s) for the
// first violation: v is next to u on the way to server s but pi(s, u) >
// pi(s, v).
void validate_probability_matrix(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                 const ProbabilityMatrix& pi, double tolerance = 1e-9);

// Per-level check of the class sums of the construction, one entry per
// re-attached vertex.
struct LevelAccounting {
  Vertex u;
  Vertex v;
  int relocated;           // servers in the subtree of u
  double extension_error;  // max |mass of extensions - parent mass|
  double class_error;      // max error over the class sums
};

struct DistributionBuild {
  PartitionDistribution distribution;
  std::vector<LevelAccounting> levels;
  double pruned_mass = 0.0;
};

// Exact distribution over monotone partitions whose marginals equal pi.
// Vertices are removed deepest first, so the base case is the root holding
// every server, and re-attached in breadth-first order. Entries below 1e-15
// are pruned and identical partitions merged.
DistributionBuild build_partition_distribution(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                               const ProbabilityMatrix& pi);

struct MarginalReport {
  double max_error = 0.0;
  int worst_server = -1;
  Vertex worst_vertex = kNoVertex;
  bool pass = true;
};

MarginalReport verify_marginals(const PartitionDistribution& dist, const ProbabilityMatrix& pi,
                                double tolerance = 1e-9);

// Price per server; +infinity for servers that lead no part.
struct PriceTable {
  std::vector<double> price;
};

// The leader of the lowest-index part is priced 0, and prices spread over
// adjacent parts with p(s_j) = p(s_i) + d(u_ij, s_i) - d(u_ji, s_j), where
// (u_ij, u_ji) is the tree edge joining the parts.
PriceTable price_partition(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                           const MonotonePartition& partition);

struct SelfishChoice {
  int server = -1;
  double cost = 0.0;
  // Second best cost minus best cost; infinite with one finite price.
  double margin = 0.0;
};

// argmin over servers of d(v, s) + p(s), ties to the lowest index.
SelfishChoice selfish_choice(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                             const PriceTable& prices, Vertex v);

// Law induced by selfish agents facing the prices of a sampled partition.
ProbabilityMatrix induced_law(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                              const PartitionDistribution& dist);

struct MonotoneReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_gap = 0.0;  // max pi(s, u) - pi(s, v) over the checks
  bool pass() const { return violations == 0; }
};

// Edge-local monotonicity: for each edge and each server, the endpoint
// farther from the server has no larger probability. Chains of edges cover
// every (u, v, s) with v between u and s.
MonotoneReport check_monotone(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                              const ProbabilityMatrix& pi, double tolerance = 1e-12);

// Deterministic prices induce the greedy-with-offsets law; returns its
// monotonicity report.
MonotoneReport prices_induce_monotone(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                      const PriceTable& prices);

struct PostedPriceStep {
  MonotonePartition partition;
  PriceTable prices;
};

// One posted-price step realizing pi: build the distribution, sample a
// partition, price it.
PostedPriceStep price_step_for_algorithm(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                         const ProbabilityMatrix& pi, Rng& rng);

// Turns a law over vertices into server probabilities, splitting evenly
// among servers sharing a vertex.
Eigen::VectorXd split_vertex_law(const Eigen::VectorXd& vertex_law, const std::vector<Vertex>& server_at);

std::string format_price(double p);

}  // namespace parkmatch
