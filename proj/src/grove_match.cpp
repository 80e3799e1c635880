#include "parkmatch/grove_match.hpp"

#include <algorithm>

#include "parkmatch/errors.hpp"

namespace parkmatch {

GroveMatch::GroveMatch(std::shared_ptr<const Grove> grove, const std::vector<int>& servers, double epsilon)
    : grove_(std::move(grove)), epsilon_(epsilon), unmatched_(servers) {
  const WeightedTree& tree = grove_->tree();
  if (static_cast<int>(servers.size()) != tree.size()) throw InputError("server vector does not match the tree");
  for (int c : servers)
    if (c < 0) throw InputError("negative server count");
  const auto& nodes = grove_->nodes();
  matchers_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const GroveNode& node = nodes[i];
    if (node.is_leaf()) continue;
    std::vector<int> counts(node.parts.size(), 0);
    for (std::size_t p = 0; p < node.parts.size(); ++p)
      for (Vertex v : node.parts[p].members) counts[p] += servers[v];
    matchers_[i].emplace(node.canopy, std::move(counts), epsilon);
  }
}

GroveServe GroveMatch::serve(Vertex v, Rng& rng) {
  const WeightedTree& tree = grove_->tree();
  if (!tree.contains(v)) throw InputError("request at unknown vertex " + std::to_string(v));
  GroveServe out;
  int node = 0;
  while (!grove_->node(node).is_leaf()) {
    const GroveNode& g = grove_->node(node);
    int x = g.part_of(grove_->entry_vertex(node, v));
    int y = matchers_[node]->serve(x, rng);
    out.trace.push_back({node, x, y});
    node = g.parts[y].child;
  }
  Vertex s = grove_->node(node).members.front();
  if (unmatched_[s] <= 0) throw CapacityError("grove dispatch reached a vertex with no server left");
  --unmatched_[s];
  out.server = s;
  return out;
}

void GroveMatch::law_into(int node, Vertex v, double mass, Eigen::VectorXd& out) const {
  const GroveNode& g = grove_->node(node);
  if (g.is_leaf()) {
    out[g.members.front()] += mass;
    return;
  }
  int x = g.part_of(grove_->entry_vertex(node, v));
  Eigen::VectorXd law = matchers_[node]->match_law(x);
  for (Eigen::Index y = 0; y < law.size(); ++y)
    if (law[y] > 0.0) law_into(g.parts[y].child, v, mass * law[y], out);
}

Eigen::VectorXd GroveMatch::match_law(Vertex v) const {
  const WeightedTree& tree = grove_->tree();
  if (!tree.contains(v)) throw InputError("request at unknown vertex " + std::to_string(v));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(tree.size());
  law_into(0, v, 1.0, out);
  return out;
}

namespace {

enum class Charge { kPrologue, kCore, kFallback };

Charge charge_kind(const TreeMatch& m) {
  switch (m.mode()) {
    case TreeMatch::Mode::kColocated:
      return Charge::kPrologue;
    case TreeMatch::Mode::kShadowing:
      return m.in_core() ? Charge::kCore : Charge::kPrologue;
    case TreeMatch::Mode::kFallback:
      break;
  }
  return Charge::kFallback;
}

}  // namespace

GroveMatchResult run_grove_match(const MatchInstance& instance, std::shared_ptr<const Grove> grove, double epsilon,
                                 Rng& rng) {
  instance.validate();
  if (grove->tree().size() != instance.tree->size()) throw InputError("grove was built on a different tree");
  GroveMatch matcher(grove, instance.servers, epsilon);
  const WeightedTree& tree = *instance.tree;
  const auto& nodes = grove->nodes();

  GroveMatchResult result;
  result.charges.resize(grove->max_depth());
  for (int d = 0; d < grove->max_depth(); ++d) result.charges[d].depth = d + 1;

  std::vector<Charge> kinds(nodes.size(), Charge::kPrologue);
  for (Vertex v : instance.requests) {
    // The phase a tree is billed under is its state before this request.
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (const TreeMatch* m = matcher.matcher(static_cast<int>(i))) kinds[i] = charge_kind(*m);

    GroveServe served = matcher.serve(v, rng);
    double cost = tree.distance(v, served.server);
    result.assignments.push_back({v, served.server, cost});
    result.traces.push_back(std::move(served.trace));
    result.total_cost += cost;
    result.total_grove_cost += grove->d_G(v, served.server);

    std::vector<Vertex> path = tree.path(v, served.server);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      Vertex a = path[k];
      Vertex b = path[k + 1];
      Vertex c = tree.parent(a) == b ? a : b;
      int owner = grove->edge_node_below(c);
      DepthCharge& dc = result.charges[nodes[owner].depth - 1];
      double w = tree.parent_weight(c);
      double g = grove->edge_length_below(c);
      switch (kinds[owner]) {
        case Charge::kPrologue:
          dc.prologue += w;
          dc.prologue_grove += g;
          break;
        case Charge::kCore:
          dc.core += w;
          dc.core_grove += g;
          break;
        case Charge::kFallback:
          dc.fallback += w;
          dc.fallback_grove += g;
          break;
      }
    }
  }
  return result;
}

}  // namespace parkmatch
