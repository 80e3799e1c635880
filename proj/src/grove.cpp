#include "parkmatch/grove.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <string>

#include "parkmatch/errors.hpp"

namespace parkmatch {

namespace {

// g(a) = a - ln(n) * (ln(delta) / ln(a))^2 is strictly increasing for a > 1,
// so the fixed point is its unique root and bisection always finds it.
// Plain iteration from 2 oscillates when the root is below e^2.
double alpha_residual(double a, double ln_n, double ln_delta) {
  double r = ln_delta / std::log(a);
  return a - ln_n * r * r;
}

}  // namespace

GroveParameters solve_alpha(int n, double delta) {
  if (n < 2) throw InputError("solve_alpha: need n >= 2");
  if (!(delta >= 2.0) || !std::isfinite(delta)) throw InputError("solve_alpha: need finite delta >= 2");
  const double ln_n = std::log(static_cast<double>(n));
  const double ln_delta = std::log(delta);
  GroveParameters out;
  if (alpha_residual(2.0, ln_n, ln_delta) >= 0.0) {
    out.alpha = 2.0;
  } else {
    double lo = 2.0;
    double hi = 4.0;
    while (alpha_residual(hi, ln_n, ln_delta) < 0.0) {
      lo = hi;
      hi *= 2.0;
    }
    int it = 0;
    for (; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (alpha_residual(mid, ln_n, ln_delta) < 0.0 ? lo : hi) = mid;
    }
    out.iterations = it;
    out.alpha = 0.5 * (lo + hi);
    if (std::abs(alpha_residual(out.alpha, ln_n, ln_delta)) > 1e-6 * out.alpha)
      throw NumericalError("solve_alpha did not converge", out.alpha);
  }
  out.log_alpha_delta = ln_delta / std::log(out.alpha);
  out.epsilon = 1.0 / out.log_alpha_delta;
  return out;
}

GroveParameters grove_parameters(int n, double delta, std::optional<double> alpha_override,
                                 std::optional<double> epsilon_override) {
  GroveParameters p = solve_alpha(std::max(n, 2), std::max(delta, 2.0));
  if (alpha_override) {
    if (!(*alpha_override > 1.0)) throw InputError("alpha must exceed 1");
    p.alpha = *alpha_override;
  }
  p.log_alpha_delta = std::log(std::max(delta, 2.0)) / std::log(p.alpha);
  p.epsilon = p.log_alpha_delta > 1.0 ? 1.0 / p.log_alpha_delta : 0.5;
  if (epsilon_override) {
    if (!(*epsilon_override > 0.0 && *epsilon_override < 1.0)) throw InputError("epsilon must lie in (0, 1)");
    p.epsilon = *epsilon_override;
  }
  return p;
}

namespace {

// Scratch shared across the recursion: local[v] is the position of v in the
// current member list or -1.
struct Workspace {
  explicit Workspace(int n) : local(n, -1), parent(n, kNoVertex), dist(n, 0.0), part(n, -1) {}
  std::vector<int> local;
  std::vector<Vertex> parent;
  std::vector<double> dist;
  std::vector<int> part;
};

LddPartition ldd_impl(const WeightedTree& tree, std::span<const Vertex> members, Vertex rho, double radius,
                      double alpha, Rng& rng, Workspace& ws) {
  for (std::size_t i = 0; i < members.size(); ++i) ws.local[members[i]] = static_cast<int>(i);
  if (ws.local[rho] < 0) {
    for (Vertex v : members) ws.local[v] = -1;
    throw InputError("ldd_partition: rho is not a member");
  }

  // Breadth-first order from rho inside the members; neighbor lists are
  // sorted, so ties go to smaller ids.
  std::vector<Vertex> order;
  order.reserve(members.size());
  order.push_back(rho);
  ws.parent[rho] = kNoVertex;
  ws.dist[rho] = 0.0;
  for (std::size_t h = 0; h < order.size(); ++h) {
    Vertex u = order[h];
    for (Vertex w : tree.neighbors(u)) {
      if (w == ws.parent[u] || ws.local[w] < 0) continue;
      ws.parent[w] = u;
      double we = tree.parent(w) == u ? tree.parent_weight(w) : tree.parent_weight(u);
      ws.dist[w] = ws.dist[u] + we;
      order.push_back(w);
    }
  }
  if (order.size() != members.size()) {
    for (Vertex v : members) ws.local[v] = -1;
    throw InputError("ldd_partition: members are not connected");
  }

  const double cap = radius / alpha;
  LddPartition out;
  out.ball_radius = rng.uniform(0.0, cap);
  for (Vertex v : order) ws.part[v] = -1;

  // Grows part `index` from `leader` through unassigned descendants whose
  // distance from the leader is within `limit`.
  auto grow = [&](Vertex leader, double limit, int index) {
    std::vector<Vertex> part{leader};
    ws.part[leader] = index;
    for (std::size_t h = 0; h < part.size(); ++h) {
      Vertex u = part[h];
      for (Vertex w : tree.neighbors(u)) {
        if (ws.local[w] < 0 || ws.parent[w] != u || ws.part[w] >= 0) continue;
        if (ws.dist[w] - ws.dist[leader] > limit) continue;
        ws.part[w] = index;
        part.push_back(w);
      }
    }
    std::sort(part.begin(), part.end());
    out.parts.push_back(std::move(part));
    out.leaders.push_back(leader);
  };

  grow(rho, out.ball_radius, 0);
  for (Vertex v : order)
    if (ws.part[v] < 0) grow(v, cap, static_cast<int>(out.parts.size()));

  for (Vertex v : members) ws.local[v] = -1;
  return out;
}

class Builder {
 public:
  Builder(const WeightedTree& tree, double alpha, int depth_cap, Rng& rng)
      : tree_(tree), alpha_(alpha), depth_cap_(depth_cap), rng_(rng), ws_(tree.size()) {}

  int build(std::vector<Vertex> members, Vertex rho, double radius, int depth, int parent_node, int parent_part) {
    if (depth > depth_cap_) throw LogicError("grove recursion exceeded its depth cap");
    std::sort(members.begin(), members.end());
    int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    {
      GroveNode& node = nodes_.back();
      node.depth = depth;
      node.radius = radius;
      node.root = rho;
      node.members = members;
      node.parent_node = parent_node;
      node.parent_part = parent_part;
    }
    if (members.size() == 1) {
      GroveNode& node = nodes_[index];
      node.member_part = {0};
      node.parts.push_back({members, members[0], -1});
      node.canopy = std::make_shared<const WeightedTree>(WeightedTree::single_vertex());
      return index;
    }

    LddPartition ldd = ldd_impl(tree_, members, rho, radius, alpha_, rng_, ws_);
    const int k = static_cast<int>(ldd.parts.size());
    std::vector<int> member_part(members.size());
    for (int i = 0; i < k; ++i)
      for (Vertex v : ldd.parts[i]) ws_.part[v] = i;
    for (std::size_t i = 0; i < members.size(); ++i) member_part[i] = ws_.part[members[i]];

    // Cross edges are exactly (parent of leader, leader) in the rho-rooted
    // member tree, since parts are closed under walking back to the leader.
    std::vector<CanopyEdge> edges;
    std::vector<Edge> canopy_edges;
    for (int j = 1; j < k; ++j) {
      Vertex l = ldd.leaders[j];
      Vertex p = ws_.parent[l];
      int i = ws_.part[p];
      edges.push_back({i, j, p, l});
      canopy_edges.push_back({i, j, 1.0});
    }
    {
      GroveNode& node = nodes_[index];
      node.member_part = std::move(member_part);
      node.edges = edges;
      node.canopy = std::make_shared<const WeightedTree>(k, std::move(canopy_edges), 0);
      for (int i = 0; i < k; ++i) node.parts.push_back({ldd.parts[i], ldd.leaders[i], -1});
    }

    for (int i = 0; i < k; ++i) {
      std::vector<Vertex> part = nodes_[index].parts[i].members;
      Vertex leader = nodes_[index].parts[i].leader;
      int child = build(std::move(part), leader, radius / alpha_, depth + 1, index, i);
      nodes_[index].parts[i].child = child;
    }
    return index;
  }

  std::vector<GroveNode> take_nodes() { return std::move(nodes_); }

 private:
  const WeightedTree& tree_;
  double alpha_;
  int depth_cap_;
  Rng& rng_;
  Workspace ws_;
  std::vector<GroveNode> nodes_;
};

int depth_cap_for(const WeightedTree& tree, double delta, double alpha) {
  if (tree.size() < 2) return 10;
  double spread = std::max(delta / tree.min_edge_weight(), 1.0);
  return static_cast<int>(std::floor(10.0 * std::log(spread) / std::log(alpha) + 10.0));
}

}  // namespace

LddPartition ldd_partition(const WeightedTree& tree, std::span<const Vertex> members, Vertex rho, double radius,
                           double alpha, Rng& rng) {
  if (members.size() < 2) throw InputError("ldd_partition: need at least two vertices");
  if (!(radius > 0.0)) throw InputError("ldd_partition: need R > 0");
  if (!(alpha > 1.0)) throw InputError("ldd_partition: need alpha > 1");
  for (Vertex v : members)
    if (!tree.contains(v)) throw InputError("ldd_partition: unknown vertex");
  Workspace ws(tree.size());
  return ldd_impl(tree, members, rho, radius, alpha, rng, ws);
}

int GroveNode::part_of(Vertex v) const {
  auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v) return -1;
  return member_part[it - members.begin()];
}

int GroveNode::max_hops() const { return canopy->size() == 1 ? 0 : canopy->depth(canopy->bfs_order().back()); }

Grove::Grove(std::shared_ptr<const WeightedTree> tree, double delta, double alpha, std::vector<GroveNode> nodes)
    : tree_(std::move(tree)), delta_(delta), alpha_(alpha), nodes_(std::move(nodes)) {
  const int n = tree_->size();
  edge_node_.assign(n, -1);
  edge_length_.assign(n, 0.0);
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    for (const CanopyEdge& e : nodes_[i].edges) {
      Vertex c = child_endpoint(e.u, e.v);
      if (edge_node_[c] >= 0) throw LogicError("grove: edge owned by two trees");
      edge_node_[c] = i;
      edge_length_[c] = nodes_[i].radius;
    }
  }
  for (Vertex v = 0; v < n; ++v)
    if (v != tree_->root() && edge_node_[v] < 0) throw LogicError("grove: edge owned by no tree");
}

Vertex Grove::child_endpoint(Vertex u, Vertex v) const {
  if (tree_->contains(u) && tree_->contains(v)) {
    if (tree_->parent(v) == u) return v;
    if (tree_->parent(u) == v) return u;
  }
  throw InputError("not an edge of the tree: " + std::to_string(u) + " " + std::to_string(v));
}

int Grove::max_depth() const {
  int d = 0;
  for (const GroveNode& node : nodes_) d = std::max(d, node.depth);
  return d;
}

int Grove::edge_node(Vertex u, Vertex v) const { return edge_node_[child_endpoint(u, v)]; }

int Grove::edge_depth(Vertex u, Vertex v) const { return nodes_[edge_node(u, v)].depth; }

double Grove::d_G(Vertex u, Vertex v) const {
  return tree_->path_sum(u, v, [this](Vertex c) { return edge_length_[c]; });
}

Vertex Grove::entry_vertex(int node, Vertex v) const {
  const GroveNode& g = nodes_.at(node);
  if (g.contains(v)) return v;
  for (Vertex w : tree_->path(v, g.root))
    if (g.contains(w)) return w;
  throw LogicError("entry_vertex: node has no members on the path");
}

Grove grove_build(std::shared_ptr<const WeightedTree> tree, Vertex rho, double radius, double alpha, int depth,
                  Rng& rng) {
  if (!(alpha > 1.0)) throw InputError("grove_build: need alpha > 1");
  if (!tree->contains(rho)) throw InputError("grove_build: unknown root");
  if (tree->size() > 1 && !(radius > 0.0)) throw InputError("grove_build: need R > 0");
  if (depth < 1) throw InputError("grove_build: depth starts at 1");
  std::vector<Vertex> all(tree->size());
  for (int i = 0; i < tree->size(); ++i) all[i] = i;
  Builder builder(*tree, alpha, depth - 1 + depth_cap_for(*tree, radius, alpha), rng);
  builder.build(std::move(all), rho, radius, depth, -1, -1);
  return Grove(std::move(tree), radius, alpha, builder.take_nodes());
}

Grove grove_build(std::shared_ptr<const WeightedTree> tree, double alpha, Rng& rng) {
  double delta = tree->size() > 1 ? tree->eccentricity_from_root() : 0.0;
  Vertex rho = tree->root();
  return grove_build(std::move(tree), rho, delta, alpha, 1, rng);
}

std::string format_grove(const Grove& grove) {
  std::string out;
  auto emit = [&](auto&& self, int index, int indent) -> void {
    const GroveNode& node = grove.node(index);
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out += pad + "tree depth=" + std::to_string(node.depth) + " parts=" + std::to_string(node.parts.size()) + "\n";
    for (std::size_t i = 0; i < node.parts.size(); ++i) {
      const GrovePart& part = node.parts[i];
      out += pad + "  part " + std::to_string(i) + " leader=" + std::to_string(part.leader) + " members=";
      for (std::size_t j = 0; j < part.members.size(); ++j) {
        if (j) out += ',';
        out += std::to_string(part.members[j]);
      }
      out += "\n";
    }
    for (const CanopyEdge& e : node.edges)
      out += pad + "  edge " + std::to_string(e.part_a) + " " + std::to_string(e.part_b) + " via " +
             std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
    if (node.is_leaf()) return;
    for (const GrovePart& part : node.parts) {
      if (grove.node(part.child).is_leaf()) continue;
      self(self, part.child, indent + 1);
    }
  };
  emit(emit, 0, 0);
  return out;
}

}  // namespace parkmatch
