#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parkmatch/rng.hpp"
#include "parkmatch/tree_metric.hpp"

namespace parkmatch {

// Online metrical search: a car starts at `start`; spots are decommissioned
// in `kills` order until exactly one survives.
struct SearchInstance {
  std::shared_ptr<const WeightedTree> tree;
  std::vector<Vertex> spots;
  Vertex start = kNoVertex;
  std::vector<Vertex> kills;

  // Throws InputError unless every kill is a distinct spot, spots are
  // distinct, and exactly one spot is never killed.
  void validate() const;
  Vertex survivor() const;
};

// One expert per leaf-spot: the spots on the root-to-leaf-spot path.
struct ExpertIndex {
  std::vector<Vertex> leaf_spots;
  // paths[sigma] lists the spots of T_sigma from the root downwards.
  std::vector<std::vector<Vertex>> paths;
  // experts_through[v] lists every sigma whose path contains spot v.
  std::vector<std::vector<int>> experts_through;
  int height = 0;  // H

  int size() const { return static_cast<int>(leaf_spots.size()); }
};

// Leaf-spots are enumerated by increasing vertex id. `spot_at[v]` marks the
// vertices holding at least one spot.
ExpertIndex build_expert_index(const WeightedTree& tree, const std::vector<char>& spot_at);

enum class Region { kRoot, kFrontier, kOuter };
enum class Phase { kPrologue, kCore };

const char* to_string(Region region);
const char* to_string(Phase phase);

struct ExpertSets {
  std::vector<int> x;  // alive experts whose path contains r
  std::vector<int> y;  // alive experts avoiding r
  std::vector<int> f;  // experts of x killed by r
};

struct SearchStep {
  Vertex decommissioned = kNoVertex;
  Region region = Region::kOuter;  // region of the decommissioned spot
  Phase phase_before = Phase::kPrologue;
  bool spot_died = false;
  bool jumped = false;
  Vertex car_before = kNoVertex;
  Vertex car_after = kNoVertex;
  int gamma = -1;
  double prologue_distance = 0.0;
  double core_distance = 0.0;
};

// The multiplicative-weights search on a rooted tree. Spots carry
// multiplicities so the matching layer can reuse it: a spot is in
// commission while its count is positive and is decommissioned when the
// count reaches zero. Search instances always use count 1.
//
// Expert counters start at zero when the core phase begins, so the uniform
// draw at the transition coincides with the normalized expert weights.
class TreeSearch {
 public:
  TreeSearch(std::shared_ptr<const WeightedTree> tree, std::vector<int> spot_counts, Vertex car,
             double epsilon);
  // Experts come from `initial_counts`; spots whose current count is zero
  // start out decommissioned. Lets a search join an instance midway through
  // its prologue with the expert index the full run would have used.
  TreeSearch(std::shared_ptr<const WeightedTree> tree, const std::vector<int>& initial_counts,
             std::vector<int> current_counts, Vertex car, double epsilon);

  // Applies the prologue rules once before any decommissioning, moving a
  // car that does not sit on a spot. Must be called exactly once.
  SearchStep settle(Rng& rng);

  // Removes one unit of spot at r and moves the car as required.
  SearchStep decommission(Vertex r, Rng& rng);

  // Law of the car's destination if its current spot were fully
  // decommissioned now; a vector over vertices. Used for the one-step law of
  // the matching extension.
  Eigen::VectorXd relocation_law() const;
  // Law of where settle() would place the car.
  Eigen::VectorXd settle_law() const;

  int spots_on_root_path(Vertex v) const;  // z^v
  Region region_of(Vertex v) const;
  bool alive(Vertex v) const { return counts_[v] > 0; }
  bool expert_alive(int sigma) const { return alive_spots_[sigma] > 0; }
  std::vector<int> alive_experts() const;

  // Requires core phase and r in commission.
  ExpertSets sets_xyf(Vertex r) const;
  // q^sigma over experts for the decommissioning of r. Requires sigma in X.
  Eigen::VectorXd compute_q(int sigma, Vertex r) const;
  // Normalized weights over alive experts.
  Eigen::VectorXd pi_tilde() const;
  double weight(int sigma) const;

  Vertex first_alive_spot(int sigma) const;

  const WeightedTree& tree() const { return *tree_; }
  const ExpertIndex& index() const { return *index_; }
  Vertex car() const { return car_; }
  Phase phase() const { return phase_; }
  int gamma() const { return gamma_; }
  double epsilon() const { return epsilon_; }
  int count(Vertex v) const { return counts_[v]; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<int>& frontier_hits() const { return hits_; }
  int prologue_jumps() const { return prologue_jumps_; }
  int core_jumps() const { return core_jumps_; }
  bool settled() const { return settled_; }

 private:
  struct Destination {
    bool enters_core = false;
    Vertex via_root = kNoVertex;  // set when the prologue climbs to the root
  };

  Vertex nearest_alive_ancestor(Vertex from, Vertex excluded) const;
  Eigen::VectorXd expert_law_to_vertices(const Eigen::VectorXd& expert_law, Vertex excluded) const;
  Vertex first_alive_spot_excluding(int sigma, Vertex excluded) const;
  Eigen::VectorXd q_for(int sigma, const ExpertSets& sets) const;
  ExpertSets sets_for(Vertex r) const;
  void kill_spot(Vertex r);
  void run_prologue_rules(SearchStep& step, Rng& rng);

  std::shared_ptr<const WeightedTree> tree_;
  std::shared_ptr<const ExpertIndex> index_;
  std::vector<int> counts_;
  std::vector<int> alive_spots_;  // per expert
  std::vector<int> hits_;         // n^sigma, frontier decommissionings
  Vertex car_;
  Phase phase_ = Phase::kPrologue;
  int gamma_ = -1;
  double epsilon_;
  int prologue_jumps_ = 0;
  int core_jumps_ = 0;
  bool settled_ = false;
};

struct SearchTrace {
  std::vector<SearchStep> steps;
  SearchStep initial;
  int prologue_jumps = 0;
  int core_jumps = 0;
  int height = 0;
  int experts = 0;
  double prologue_distance = 0.0;
  double core_distance = 0.0;
  Vertex final_car = kNoVertex;
  // First decommission index handled in the core phase; steps.size() if
  // the core phase never began on a decommissioning.
  std::size_t core_begins_at = 0;

  double total_distance() const { return prologue_distance + core_distance; }
};

SearchTrace run_tree_search(const SearchInstance& instance, double epsilon, Rng& rng);

// `t=<i> region=<r> car=<v> gamma=<sigma> jump=<0|1>`
std::string format_trace_line(std::size_t t, const SearchStep& step);

}  // namespace parkmatch
