#pragma once

#include <span>
#include <vector>

namespace parkmatch {

// Vertices are dense integers 0..n-1.
using Vertex = int;
inline constexpr Vertex kNoVertex = -1;

struct Edge {
  Vertex u;
  Vertex v;
  double weight;
};

// A positively weighted tree with a designated root. Immutable after
// construction; parent pointers, depths and root distances are precomputed
// so path queries are walks to the lowest common ancestor.
class WeightedTree {
 public:
  // Throws InputError on cycles, disconnection, bad ids or nonpositive
  // weights.
  WeightedTree(int vertex_count, std::vector<Edge> edges, Vertex root);

  static WeightedTree single_vertex() { return WeightedTree(1, {}, 0); }

  int size() const { return static_cast<int>(parent_.size()); }
  Vertex root() const { return root_; }
  std::span<const Edge> edges() const { return edges_; }

  Vertex parent(Vertex v) const { return parent_[checked(v)]; }
  // Weight of the edge (v, parent(v)); zero at the root.
  double parent_weight(Vertex v) const { return parent_weight_[checked(v)]; }
  const std::vector<Vertex>& children(Vertex v) const { return children_[checked(v)]; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return neighbors_[checked(v)]; }
  int depth(Vertex v) const { return depth_[checked(v)]; }
  double root_distance(Vertex v) const { return root_distance_[checked(v)]; }
  // Breadth-first order from the root, children visited by increasing id.
  const std::vector<Vertex>& bfs_order() const { return bfs_order_; }

  bool contains(Vertex v) const { return v >= 0 && v < size(); }
  // True iff a is v or an ancestor of v.
  bool is_ancestor(Vertex a, Vertex v) const;
  Vertex lca(Vertex u, Vertex v) const;

  double distance(Vertex u, Vertex v) const;
  // Vertices from u to v inclusive.
  std::vector<Vertex> path(Vertex u, Vertex v) const;
  // True iff v lies on the u-s path, endpoints included.
  bool is_between(Vertex u, Vertex v, Vertex s) const;

  // Maximum root distance; the Delta that seeds the grove construction.
  double eccentricity_from_root() const;
  double min_edge_weight() const;
  // All weights divided by the minimum edge weight.
  WeightedTree normalized() const;
  WeightedTree rerooted(Vertex new_root) const;

  // Sums cost(c) over the edges (c, parent(c)) of the u-v path. The walk
  // order is fixed, so two cost functions with cost1 <= cost2 edgewise give
  // sums that compare the same way in floating point.
  template <typename EdgeCost>
  double path_sum(Vertex u, Vertex v, EdgeCost&& cost) const {
    checked(u);
    checked(v);
    double up = 0.0;
    double down = 0.0;
    while (depth_[u] > depth_[v]) {
      up += cost(u);
      u = parent_[u];
    }
    while (depth_[v] > depth_[u]) {
      down += cost(v);
      v = parent_[v];
    }
    while (u != v) {
      up += cost(u);
      down += cost(v);
      u = parent_[u];
      v = parent_[v];
    }
    return up + down;
  }

 private:
  int checked(Vertex v) const;

  Vertex root_;
  std::vector<Edge> edges_;
  std::vector<Vertex> parent_;
  std::vector<double> parent_weight_;
  std::vector<std::vector<Vertex>> children_;
  std::vector<std::vector<Vertex>> neighbors_;
  std::vector<int> depth_;
  std::vector<double> root_distance_;
  std::vector<Vertex> bfs_order_;
  std::vector<int> enter_;
  std::vector<int> exit_;
};

}  // namespace parkmatch
