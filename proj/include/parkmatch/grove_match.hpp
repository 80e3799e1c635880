#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "parkmatch/grove.hpp"
#include "parkmatch/rng.hpp"
#include "parkmatch/tree_match.hpp"

namespace parkmatch {

// One level of a dispatch: TreeMatch on `node`'s canopy mapped part x to
// part y.
struct Dispatch {
  int node;
  int x;
  int y;
};

struct GroveServe {
  Vertex server = kNoVertex;
  std::vector<Dispatch> trace;
};

// Recursive matcher over a grove. Every non-leaf grove tree runs its own
// TreeMatch on the unweighted canopy with the part server counts; a request
// descends from the top canopy until it reaches a leaf grove.
class GroveMatch {
 public:
  GroveMatch(std::shared_ptr<const Grove> grove, const std::vector<int>& servers, double epsilon);

  GroveServe serve(Vertex v, Rng& rng);

  // Exact law over original vertices of the server a request at v gets.
  Eigen::VectorXd match_law(Vertex v) const;

  const Grove& grove() const { return *grove_; }
  // Null for leaf groves.
  const TreeMatch* matcher(int node) const { return matchers_[node] ? &*matchers_[node] : nullptr; }
  const std::vector<int>& unmatched() const { return unmatched_; }
  double epsilon() const { return epsilon_; }

 private:
  void law_into(int node, Vertex v, double mass, Eigen::VectorXd& out) const;

  std::shared_ptr<const Grove> grove_;
  double epsilon_;
  std::vector<std::optional<TreeMatch>> matchers_;
  std::vector<int> unmatched_;
};

// Cost charged to the grove trees of one depth: every edge of a matched
// path is billed to the tree owning it, split by that tree's TreeMatch state
// when the request arrived.
struct DepthCharge {
  int depth = 0;
  double prologue = 0.0;  // co-located mode or shadow prologue, d_T
  double core = 0.0;
  double fallback = 0.0;
  double prologue_grove = 0.0;  // the same under d_G
  double core_grove = 0.0;
  double fallback_grove = 0.0;

  double total() const { return prologue + core + fallback; }
};

struct GroveMatchResult {
  std::vector<Assignment> assignments;
  std::vector<std::vector<Dispatch>> traces;
  double total_cost = 0.0;        // d_T
  double total_grove_cost = 0.0;  // d_G
  std::vector<DepthCharge> charges;  // index depth - 1
};

GroveMatchResult run_grove_match(const MatchInstance& instance, std::shared_ptr<const Grove> grove, double epsilon,
                                 Rng& rng);

}  // namespace parkmatch
