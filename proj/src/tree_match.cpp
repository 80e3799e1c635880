#include "parkmatch/tree_match.hpp"

#include <algorithm>
#include <numeric>

#include "parkmatch/errors.hpp"

namespace parkmatch {

int MatchInstance::server_total() const { return std::accumulate(servers.begin(), servers.end(), 0); }

void MatchInstance::validate() const {
  if (!tree) throw InputError("match instance has no tree");
  if (static_cast<int>(servers.size()) != tree->size()) throw InputError("server counts do not match tree size");
  for (int c : servers) {
    if (c < 0) throw InputError("negative server count");
  }
  for (Vertex v : requests) {
    if (!tree->contains(v)) throw InputError("request at unknown vertex " + std::to_string(v));
  }
  if (static_cast<int>(requests.size()) > server_total()) throw InputError("more requests than servers");
}

MatchInstance as_match_instance(const SearchInstance& search) {
  search.validate();
  MatchInstance out;
  out.tree = search.tree;
  out.servers.assign(search.tree->size(), 0);
  for (Vertex s : search.spots) out.servers[s] = 1;
  out.requests.push_back(search.start);
  out.requests.insert(out.requests.end(), search.kills.begin(), search.kills.end());
  return out;
}

const char* to_string(TreeMatch::Mode mode) {
  switch (mode) {
    case TreeMatch::Mode::kColocated: return "colocated";
    case TreeMatch::Mode::kShadowing: return "shadowing";
    case TreeMatch::Mode::kFallback: return "fallback";
  }
  return "?";
}

NeighborSets neighbor_sets(const WeightedTree& tree, const std::vector<int>& counts, Vertex c) {
  NeighborSets sets;
  std::vector<char> state(tree.size(), 0);  // 1 = reached (R), 2 = blocking spot (Q)
  std::vector<Vertex> frontier{c};
  state[c] = 1;
  while (!frontier.empty()) {
    const Vertex u = frontier.back();
    frontier.pop_back();
    for (Vertex w : tree.neighbors(u)) {
      if (state[w]) continue;
      if (counts[w] > 0) {
        state[w] = 2;
      } else {
        state[w] = 1;
        frontier.push_back(w);
      }
    }
  }
  for (Vertex v = 0; v < tree.size(); ++v) {
    if (state[v] == 1) {
      sets.r.push_back(v);
    } else if (state[v] == 2) {
      sets.q.push_back(v);
    } else {
      sets.far.push_back(v);
    }
  }
  return sets;
}

Vertex nearest_available(const WeightedTree& tree, const std::vector<int>& counts, Vertex v) {
  Vertex best = kNoVertex;
  double best_distance = 0.0;
  for (Vertex s = 0; s < tree.size(); ++s) {
    if (counts[s] <= 0) continue;
    const double d = tree.distance(v, s);
    if (best == kNoVertex || d < best_distance) {
      best = s;
      best_distance = d;
    }
  }
  if (best == kNoVertex) throw CapacityError("no unmatched server");
  return best;
}

TreeMatch::TreeMatch(std::shared_ptr<const WeightedTree> tree, std::vector<int> servers, double epsilon)
    : tree_(std::move(tree)), initial_(servers), unmatched_(std::move(servers)), epsilon_(epsilon) {
  if (!tree_) throw InputError("matching needs a tree");
  if (static_cast<int>(unmatched_.size()) != tree_->size()) throw InputError("server counts do not match tree size");
  for (int c : unmatched_) {
    if (c < 0) throw InputError("negative server count");
    unmatched_total_ += c;
  }
}

Vertex TreeMatch::nearest_server(Vertex v) const { return nearest_available(*tree_, unmatched_, v); }

void TreeMatch::take(Vertex s) {
  if (unmatched_[s] <= 0) throw LogicError("server at " + std::to_string(s) + " already matched");
  --unmatched_[s];
  --unmatched_total_;
}

NeighborSets TreeMatch::neighbor_sets() const {
  if (mode_ != Mode::kShadowing) throw LogicError("neighbor sets need a shadow search");
  return parkmatch::neighbor_sets(*tree_, shadow_->counts(), shadow_->car());
}

Vertex TreeMatch::first_spot_towards(Vertex from, Vertex to) const {
  for (Vertex x : tree_->path(from, to)) {
    if (x != to && shadow_->count(x) > 0) return x;
  }
  throw LogicError("no spot between a far vertex and the car");
}

Vertex TreeMatch::serve(Vertex v, Rng& rng) {
  if (!tree_->contains(v)) throw InputError("request at unknown vertex " + std::to_string(v));
  if (unmatched_total_ <= 0) throw CapacityError("no unmatched server");

  switch (mode_) {
    case Mode::kColocated: {
      if (unmatched_[v] > 0) {
        take(v);
        return v;
      }
      shadow_.emplace(tree_, initial_, unmatched_, v, epsilon_);
      mode_ = Mode::kShadowing;
      shadow_->settle(rng);
      const Vertex s = shadow_->car();
      take(s);
      return s;
    }
    case Mode::kShadowing: {
      const Vertex car = shadow_->car();
      if (unmatched_[v] > 0) {
        take(v);
        shadow_->decommission(v, rng);
        return v;
      }
      if (v == car) {
        shadow_->decommission(v, rng);
        const Vertex s = shadow_->car();
        take(s);
        return s;
      }
      // Deviation: the instance is not a search instance.
      const NeighborSets sets = neighbor_sets();
      Vertex s = kNoVertex;
      if (std::find(sets.far.begin(), sets.far.end(), v) != sets.far.end()) {
        s = first_spot_towards(v, car);
      } else if (sets.q.empty()) {
        s = car;
      } else {
        const Eigen::VectorXd law = shadow_->relocation_law();
        s = static_cast<Vertex>(rng.sample(law));
      }
      mode_ = Mode::kFallback;
      take(s);
      return s;
    }
    case Mode::kFallback: {
      const Vertex s = nearest_server(v);
      take(s);
      return s;
    }
  }
  throw LogicError("unreachable");
}

Eigen::VectorXd TreeMatch::match_law(Vertex v) const {
  if (!tree_->contains(v)) throw InputError("request at unknown vertex " + std::to_string(v));
  if (unmatched_total_ <= 0) throw CapacityError("no unmatched server");
  Eigen::VectorXd law = Eigen::VectorXd::Zero(tree_->size());
  switch (mode_) {
    case Mode::kColocated: {
      if (unmatched_[v] > 0) {
        law[v] = 1.0;
        return law;
      }
      const TreeSearch fresh(tree_, initial_, unmatched_, v, epsilon_);
      return fresh.settle_law();
    }
    case Mode::kShadowing: {
      const Vertex car = shadow_->car();
      if (unmatched_[v] > 0) {
        law[v] = 1.0;
        return law;
      }
      if (v == car) return shadow_->relocation_law();
      const NeighborSets sets = neighbor_sets();
      if (std::find(sets.far.begin(), sets.far.end(), v) != sets.far.end()) {
        law[first_spot_towards(v, car)] = 1.0;
      } else if (sets.q.empty()) {
        law[car] = 1.0;
      } else {
        law = shadow_->relocation_law();
      }
      return law;
    }
    case Mode::kFallback:
      law[nearest_server(v)] = 1.0;
      return law;
  }
  throw LogicError("unreachable");
}

MatchResult run_tree_match(const MatchInstance& instance, double epsilon, Rng& rng) {
  instance.validate();
  TreeMatch matcher(instance.tree, instance.servers, epsilon);
  MatchResult result;
  for (Vertex v : instance.requests) {
    const Vertex s = matcher.serve(v, rng);
    const double cost = instance.tree->distance(v, s);
    result.assignments.push_back({v, s, cost});
    result.total_cost += cost;
  }
  return result;
}

}  // namespace parkmatch
