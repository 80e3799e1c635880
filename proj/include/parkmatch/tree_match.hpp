#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "parkmatch/rng.hpp"
#include "parkmatch/tree_metric.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

// Servers are stored as multiplicities per vertex.
struct MatchInstance {
  std::shared_ptr<const WeightedTree> tree;
  std::vector<int> servers;  // count per vertex
  std::vector<Vertex> requests;

  int server_total() const;
  void validate() const;
};

// Requests = [start] + kills, servers = spots.
MatchInstance as_match_instance(const SearchInstance& search);

struct NeighborSets {
  std::vector<Vertex> q;    // spots adjacent to the car with no spot in between
  std::vector<Vertex> r;    // vertices reaching the car without crossing q
  std::vector<Vertex> far;  // the rest, separated from the car by q
};

// Neighbor sets around car `c` for the spots with positive `counts`; the
// car's own vertex never belongs to q.
NeighborSets neighbor_sets(const WeightedTree& tree, const std::vector<int>& counts, Vertex c);

// Monotone online matching built around TreeSearch. While every request
// finds a co-located server it is served there. The first request without
// one starts a shadow TreeSearch with the car at that request, its experts
// taken from the initial servers and the servers used so far already
// decommissioned; requests at
// the car follow the car, co-located requests stay put. The first request
// that fits neither pattern is a deviation: it is routed by the neighbor
// sets of the car and every later request goes to the nearest server.
class TreeMatch {
 public:
  enum class Mode { kColocated, kShadowing, kFallback };

  TreeMatch(std::shared_ptr<const WeightedTree> tree, std::vector<int> servers, double epsilon);

  // Returns the vertex of the server matched to a request at v.
  Vertex serve(Vertex v, Rng& rng);

  // Exact law over vertices of the server a request at v would be matched
  // to, given the current state. Does not mutate.
  Eigen::VectorXd match_law(Vertex v) const;

  // Neighbor sets of the shadow car. Requires shadowing mode.
  NeighborSets neighbor_sets() const;

  Mode mode() const { return mode_; }
  // True while a shadow search is in its core phase.
  bool in_core() const { return mode_ == Mode::kShadowing && shadow_->phase() == Phase::kCore; }
  const std::vector<int>& unmatched() const { return unmatched_; }
  int unmatched_total() const { return unmatched_total_; }
  const std::optional<TreeSearch>& shadow() const { return shadow_; }
  const WeightedTree& tree() const { return *tree_; }
  double epsilon() const { return epsilon_; }

 private:
  Vertex nearest_server(Vertex v) const;
  Vertex first_spot_towards(Vertex from, Vertex to) const;
  void take(Vertex s);

  std::shared_ptr<const WeightedTree> tree_;
  std::vector<int> initial_;
  std::vector<int> unmatched_;
  int unmatched_total_ = 0;
  double epsilon_;
  Mode mode_ = Mode::kColocated;
  std::optional<TreeSearch> shadow_;
};

const char* to_string(TreeMatch::Mode mode);

// Greedy nearest available server, ties to the smallest vertex id.
Vertex nearest_available(const WeightedTree& tree, const std::vector<int>& counts, Vertex v);

struct Assignment {
  Vertex request;
  Vertex server;
  double cost;
};

struct MatchResult {
  std::vector<Assignment> assignments;
  double total_cost = 0.0;
};

MatchResult run_tree_match(const MatchInstance& instance, double epsilon, Rng& rng);

}  // namespace parkmatch
