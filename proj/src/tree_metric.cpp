#include "parkmatch/tree_metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parkmatch/errors.hpp"

namespace parkmatch {

WeightedTree::WeightedTree(int vertex_count, std::vector<Edge> edges, Vertex root)
    : root_(root), edges_(std::move(edges)) {
  if (vertex_count < 1) throw InputError("tree must have at least one vertex");
  if (root < 0 || root >= vertex_count) throw InputError("root " + std::to_string(root) + " is not a vertex");
  if (static_cast<int>(edges_.size()) != vertex_count - 1) {
    throw InputError("a tree on " + std::to_string(vertex_count) + " vertices needs " +
                     std::to_string(vertex_count - 1) + " edges, got " + std::to_string(edges_.size()));
  }

  const auto n = static_cast<std::size_t>(vertex_count);
  std::vector<std::vector<std::pair<Vertex, double>>> adjacency(n);
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= vertex_count || e.v < 0 || e.v >= vertex_count) {
      throw InputError("edge references unknown vertex");
    }
    if (e.u == e.v) throw InputError("self loop at vertex " + std::to_string(e.u));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InputError("edge weights must be positive and finite");
    }
    adjacency[e.u].emplace_back(e.v, e.weight);
    adjacency[e.v].emplace_back(e.u, e.weight);
  }
  for (auto& list : adjacency) std::sort(list.begin(), list.end());

  parent_.assign(n, kNoVertex);
  parent_weight_.assign(n, 0.0);
  children_.assign(n, {});
  neighbors_.assign(n, {});
  depth_.assign(n, 0);
  root_distance_.assign(n, 0.0);
  std::vector<char> seen(n, 0);
  bfs_order_.reserve(n);
  bfs_order_.push_back(root);
  seen[root] = 1;
  for (std::size_t head = 0; head < bfs_order_.size(); ++head) {
    const Vertex u = bfs_order_[head];
    for (const auto& [v, w] : adjacency[u]) {
      neighbors_[u].push_back(v);
      if (v == parent_[u]) continue;
      // n-1 edges plus connectivity rules out cycles; a revisit here means
      // a cycle exists and some vertex is unreachable.
      if (seen[v]) throw InputError("edges contain a cycle");
      seen[v] = 1;
      parent_[v] = u;
      parent_weight_[v] = w;
      depth_[v] = depth_[u] + 1;
      root_distance_[v] = root_distance_[u] + w;
      children_[u].push_back(v);
      bfs_order_.push_back(v);
    }
  }
  if (bfs_order_.size() != n) throw InputError("tree is disconnected");

  // Euler tour for O(1) ancestry.
  enter_.assign(n, 0);
  exit_.assign(n, 0);
  int clock = 0;
  std::vector<std::pair<Vertex, std::size_t>> stack{{root, 0}};
  enter_[root] = clock++;
  while (!stack.empty()) {
    auto& [u, next] = stack.back();
    if (next < children_[u].size()) {
      const Vertex c = children_[u][next++];
      enter_[c] = clock++;
      stack.emplace_back(c, 0);
    } else {
      exit_[u] = clock++;
      stack.pop_back();
    }
  }
}

int WeightedTree::checked(Vertex v) const {
  if (!contains(v)) throw InputError("unknown vertex " + std::to_string(v));
  return v;
}

bool WeightedTree::is_ancestor(Vertex a, Vertex v) const {
  checked(a);
  checked(v);
  return enter_[a] <= enter_[v] && exit_[v] <= exit_[a];
}

Vertex WeightedTree::lca(Vertex u, Vertex v) const {
  checked(u);
  checked(v);
  while (depth_[u] > depth_[v]) u = parent_[u];
  while (depth_[v] > depth_[u]) v = parent_[v];
  while (u != v) {
    u = parent_[u];
    v = parent_[v];
  }
  return u;
}

double WeightedTree::distance(Vertex u, Vertex v) const {
  return path_sum(u, v, [this](Vertex c) { return parent_weight_[c]; });
}

std::vector<Vertex> WeightedTree::path(Vertex u, Vertex v) const {
  const Vertex top = lca(u, v);
  std::vector<Vertex> forward;
  for (Vertex x = u; x != top; x = parent_[x]) forward.push_back(x);
  forward.push_back(top);
  std::vector<Vertex> backward;
  for (Vertex x = v; x != top; x = parent_[x]) backward.push_back(x);
  forward.insert(forward.end(), backward.rbegin(), backward.rend());
  return forward;
}

bool WeightedTree::is_between(Vertex u, Vertex v, Vertex s) const {
  const Vertex top = lca(u, s);
  return is_ancestor(top, v) && (is_ancestor(v, u) || is_ancestor(v, s));
}

double WeightedTree::eccentricity_from_root() const {
  if (size() < 2) throw DegenerateInputError("eccentricity of a single-vertex tree is undefined");
  return *std::max_element(root_distance_.begin(), root_distance_.end());
}

double WeightedTree::min_edge_weight() const {
  double best = 0.0;
  for (const Edge& e : edges_) best = (best == 0.0) ? e.weight : std::min(best, e.weight);
  return best;
}

WeightedTree WeightedTree::normalized() const {
  if (edges_.empty()) return *this;
  const double scale = min_edge_weight();
  std::vector<Edge> scaled = edges_;
  for (Edge& e : scaled) e.weight = (e.weight == scale) ? 1.0 : e.weight / scale;
  return WeightedTree(size(), std::move(scaled), root_);
}

WeightedTree WeightedTree::rerooted(Vertex new_root) const {
  checked(new_root);
  return WeightedTree(size(), edges_, new_root);
}

}  // namespace parkmatch
