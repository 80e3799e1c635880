#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkmatch/rng.hpp"
#include "parkmatch/tree_metric.hpp"

namespace parkmatch {

struct GroveParameters {
  double alpha = 2.0;
  double epsilon = 0.5;
  double log_alpha_delta = 1.0;
  int iterations = 0;
};

// Solves alpha = max(2, ln(n) * (ln(delta) / ln(alpha))^2) and sets
// epsilon = 1 / log_alpha(delta). Requires n >= 2 and delta >= 2.
GroveParameters solve_alpha(int n, double delta);

// Parameters used by the grove pipeline for any tree: solve_alpha on
// max(delta, 2), overridden by the given values. An epsilon of 1 or more
// (delta <= alpha) falls back to 1/2.
GroveParameters grove_parameters(int n, double delta, std::optional<double> alpha_override = std::nullopt,
                                 std::optional<double> epsilon_override = std::nullopt);

struct LddPartition {
  std::vector<std::vector<Vertex>> parts;  // each sorted by vertex id
  std::vector<Vertex> leaders;             // leaders[0] == rho
  double ball_radius = 0.0;                // the random z
};

// Ball-growing decomposition of the connected vertex set `members` (which
// contains rho). Part 0 is the closed ball of random radius
// z ~ U[0, R/alpha] around rho. Later leaders are the unassigned vertices
// met first in breadth-first order from rho; each part is the set of
// unassigned descendants (rooted at rho) within R/alpha of its leader.
LddPartition ldd_partition(const WeightedTree& tree, std::span<const Vertex> members, Vertex rho, double radius,
                           double alpha, Rng& rng);

struct GrovePart {
  std::vector<Vertex> members;  // sorted
  Vertex leader = kNoVertex;
  int child = -1;  // node index of the subgrove on this part
};

// A canopy edge joins parts a and b and is identified with the tree edge
// (u, v), u in part a, v in part b; b is the child side.
struct CanopyEdge {
  int part_a;
  int part_b;
  Vertex u;
  Vertex v;
};

// One tree of the grove. A node with one member is a leaf grove.
struct GroveNode {
  int depth = 1;
  double radius = 0.0;  // R at this level; also the d_G length of its edges
  Vertex root = kNoVertex;
  std::vector<Vertex> members;  // sorted
  std::vector<int> member_part;  // parallel to members
  std::vector<GrovePart> parts;
  std::vector<CanopyEdge> edges;
  std::shared_ptr<const WeightedTree> canopy;  // unit weights, part 0 is the root
  int parent_node = -1;
  int parent_part = -1;

  bool is_leaf() const { return members.size() == 1; }
  // Part holding original vertex v, or -1.
  int part_of(Vertex v) const;
  bool contains(Vertex v) const { return part_of(v) >= 0; }
  // Largest number of canopy hops from the root part.
  int max_hops() const;
};

class Grove {
 public:
  Grove(std::shared_ptr<const WeightedTree> tree, double delta, double alpha, std::vector<GroveNode> nodes);

  const WeightedTree& tree() const { return *tree_; }
  std::shared_ptr<const WeightedTree> tree_ptr() const { return tree_; }
  const std::vector<GroveNode>& nodes() const { return nodes_; }
  const GroveNode& node(int i) const { return nodes_.at(i); }
  double delta() const { return delta_; }
  double alpha() const { return alpha_; }
  int max_depth() const;

  // Depth of the unique grove tree whose canopy holds the edge (u, v).
  int edge_depth(Vertex u, Vertex v) const;
  int edge_node(Vertex u, Vertex v) const;
  // Grove length of the edge (c, parent(c)) of the underlying tree.
  double edge_length_below(Vertex c) const { return edge_length_[c]; }
  int edge_node_below(Vertex c) const { return edge_node_[c]; }

  double d_G(Vertex u, Vertex v) const;

  // First vertex of node's members met when walking from v towards them.
  Vertex entry_vertex(int node, Vertex v) const;

 private:
  Vertex child_endpoint(Vertex u, Vertex v) const;

  std::shared_ptr<const WeightedTree> tree_;
  double delta_;
  double alpha_;
  std::vector<GroveNode> nodes_;
  std::vector<int> edge_node_;      // indexed by the child endpoint
  std::vector<double> edge_length_;  // indexed by the child endpoint
};

// Builds the grove of `tree` rooted at its designated root with R = Delta
// (the root eccentricity) and depth 1. Recursion deeper than
// 10 * log_alpha(Delta / min edge) + 10 throws LogicError.
Grove grove_build(std::shared_ptr<const WeightedTree> tree, double alpha, Rng& rng);

// General form: the top canopy is rooted at rho and cut with radius R at the
// given depth.
Grove grove_build(std::shared_ptr<const WeightedTree> tree, Vertex rho, double radius, double alpha, int depth,
                  Rng& rng);

// Indented dump: `tree depth=<d> parts=<k>`, `part <i> leader=<v>
// members=<...>`, `edge <Pi> <Pj> via <u> <v>`.
std::string format_grove(const Grove& grove);

}  // namespace parkmatch
