#include "parkmatch/tree_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "parkmatch/errors.hpp"

namespace parkmatch {

void SearchInstance::validate() const {
  if (!tree) throw InputError("search instance has no tree");
  if (spots.empty()) throw InputError("search instance has no spots");
  if (!tree->contains(start)) throw InputError("car start is not a vertex");
  std::vector<char> is_spot(tree->size(), 0);
  for (Vertex s : spots) {
    if (!tree->contains(s)) throw InputError("spot " + std::to_string(s) + " is not a vertex");
    if (is_spot[s]) throw InputError("at most one spot per vertex in a search instance");
    is_spot[s] = 1;
  }
  if (kills.size() + 1 != spots.size()) {
    throw InputError("exactly one spot must survive: " + std::to_string(spots.size()) + " spots, " +
                     std::to_string(kills.size()) + " kills");
  }
  std::vector<char> killed(tree->size(), 0);
  for (Vertex r : kills) {
    if (!tree->contains(r) || !is_spot[r]) throw InputError("kill " + std::to_string(r) + " is not a spot");
    if (killed[r]) throw InputError("spot " + std::to_string(r) + " killed twice");
    killed[r] = 1;
  }
}

Vertex SearchInstance::survivor() const {
  std::set<Vertex> remaining(spots.begin(), spots.end());
  for (Vertex r : kills) remaining.erase(r);
  return remaining.size() == 1 ? *remaining.begin() : kNoVertex;
}

ExpertIndex build_expert_index(const WeightedTree& tree, const std::vector<char>& spot_at) {
  const int n = tree.size();
  if (static_cast<int>(spot_at.size()) != n) throw InputError("spot mask size does not match tree");
  if (std::none_of(spot_at.begin(), spot_at.end(), [](char c) { return c != 0; })) {
    throw InputError("no spots");
  }
  std::vector<char> spot_below(n, 0);
  const auto& order = tree.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Vertex p = tree.parent(*it);
    if (p != kNoVertex && (spot_at[*it] || spot_below[*it])) spot_below[p] = 1;
  }

  ExpertIndex index;
  index.experts_through.assign(n, {});
  for (Vertex v = 0; v < n; ++v) {
    if (!spot_at[v] || spot_below[v]) continue;
    const int sigma = index.size();
    index.leaf_spots.push_back(v);
    std::vector<Vertex> path;
    for (Vertex x = v; x != kNoVertex; x = tree.parent(x)) {
      if (spot_at[x]) path.push_back(x);
    }
    std::reverse(path.begin(), path.end());
    for (Vertex s : path) index.experts_through[s].push_back(sigma);
    index.height = std::max(index.height, static_cast<int>(path.size()));
    index.paths.push_back(std::move(path));
  }
  return index;
}

const char* to_string(Region region) {
  switch (region) {
    case Region::kRoot: return "root";
    case Region::kFrontier: return "frontier";
    case Region::kOuter: return "outer";
  }
  return "?";
}

const char* to_string(Phase phase) { return phase == Phase::kPrologue ? "prologue" : "core"; }

TreeSearch::TreeSearch(std::shared_ptr<const WeightedTree> tree, std::vector<int> spot_counts, Vertex car,
                       double epsilon)
    : TreeSearch(tree, spot_counts, spot_counts, car, epsilon) {}

TreeSearch::TreeSearch(std::shared_ptr<const WeightedTree> tree, const std::vector<int>& initial_counts,
                       std::vector<int> current_counts, Vertex car, double epsilon)
    : tree_(std::move(tree)), counts_(std::move(current_counts)), car_(car), epsilon_(epsilon) {
  if (!tree_) throw InputError("search needs a tree");
  if (static_cast<int>(counts_.size()) != tree_->size() || initial_counts.size() != counts_.size())
    throw InputError("spot counts do not match tree size");
  if (!tree_->contains(car_)) throw InputError("car is not a vertex");
  if (!(epsilon_ > 0.0 && epsilon_ < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  std::vector<char> spot_at(counts_.size());
  for (std::size_t v = 0; v < counts_.size(); ++v) {
    if (counts_[v] < 0 || initial_counts[v] < 0) throw InputError("negative spot count");
    if (counts_[v] > 0 && initial_counts[v] == 0) throw InputError("current spots must be initial spots");
    spot_at[v] = initial_counts[v] > 0;
  }
  index_ = std::make_shared<const ExpertIndex>(build_expert_index(*tree_, spot_at));
  alive_spots_.assign(index_->size(), 0);
  for (int sigma = 0; sigma < index_->size(); ++sigma)
    for (Vertex s : index_->paths[sigma]) alive_spots_[sigma] += counts_[s] > 0;
  hits_.assign(index_->size(), 0);
}

double TreeSearch::weight(int sigma) const { return std::pow(1.0 - epsilon_, hits_[sigma]); }

std::vector<int> TreeSearch::alive_experts() const {
  std::vector<int> out;
  for (int sigma = 0; sigma < index_->size(); ++sigma) {
    if (alive_spots_[sigma] > 0) out.push_back(sigma);
  }
  return out;
}

int TreeSearch::spots_on_root_path(Vertex v) const {
  int z = 0;
  for (Vertex x = v; x != kNoVertex; x = tree_->parent(x)) z += counts_[x] > 0;
  return z;
}

Region TreeSearch::region_of(Vertex v) const {
  const int z = spots_on_root_path(v);
  return z == 0 ? Region::kRoot : (z == 1 ? Region::kFrontier : Region::kOuter);
}

Vertex TreeSearch::first_alive_spot(int sigma) const { return first_alive_spot_excluding(sigma, kNoVertex); }

Vertex TreeSearch::first_alive_spot_excluding(int sigma, Vertex excluded) const {
  for (Vertex s : index_->paths.at(sigma)) {
    if (s != excluded && counts_[s] > 0) return s;
  }
  return kNoVertex;
}

Vertex TreeSearch::nearest_alive_ancestor(Vertex from, Vertex excluded) const {
  for (Vertex x = from; x != kNoVertex; x = tree_->parent(x)) {
    if (x != excluded && counts_[x] > 0) return x;
  }
  return kNoVertex;
}

ExpertSets TreeSearch::sets_for(Vertex r) const {
  ExpertSets sets;
  std::vector<char> through(index_->size(), 0);
  for (int sigma : index_->experts_through[r]) {
    through[sigma] = 1;
    if (alive_spots_[sigma] <= 0) continue;
    sets.x.push_back(sigma);
    if (alive_spots_[sigma] == 1) sets.f.push_back(sigma);
  }
  for (int sigma = 0; sigma < index_->size(); ++sigma) {
    if (!through[sigma] && alive_spots_[sigma] > 0) sets.y.push_back(sigma);
  }
  return sets;
}

ExpertSets TreeSearch::sets_xyf(Vertex r) const {
  if (phase_ != Phase::kCore) throw LogicError("expert sets are defined in the core phase only");
  if (!tree_->contains(r) || counts_[r] <= 0) throw LogicError("spot " + std::to_string(r) + " is not in commission");
  return sets_for(r);
}

Eigen::VectorXd TreeSearch::q_for(int sigma, const ExpertSets& sets) const {
  const bool sigma_killed = std::find(sets.f.begin(), sets.f.end(), sigma) != sets.f.end();
  std::vector<int> survivors;  // X \ F
  for (int tau : sets.x) {
    if (std::find(sets.f.begin(), sets.f.end(), tau) == sets.f.end()) survivors.push_back(tau);
  }
  if (survivors.empty() && sets.y.empty()) throw SearchTerminatedError("no alive expert remains");

  double w_survivors = 0.0;
  for (int tau : survivors) w_survivors += weight(tau);
  double w_avoiding = 0.0;
  for (int tau : sets.y) w_avoiding += weight(tau);
  const double denominator = (1.0 - epsilon_) * w_survivors + w_avoiding;

  Eigen::VectorXd q = Eigen::VectorXd::Zero(index_->size());
  const double scale = sigma_killed ? 1.0 : epsilon_;
  double avoiding_mass = 0.0;
  for (int tau : sets.y) {
    q[tau] = scale * weight(tau) / denominator;
    avoiding_mass += q[tau];
  }
  // With X \ F empty the uniform branch is vacuous.
  for (int tau : survivors) q[tau] = (1.0 - avoiding_mass) / static_cast<double>(survivors.size());
  return q;
}

Eigen::VectorXd TreeSearch::compute_q(int sigma, Vertex r) const {
  const ExpertSets sets = sets_xyf(r);
  if (std::find(sets.x.begin(), sets.x.end(), sigma) == sets.x.end()) {
    throw LogicError("q is only defined for experts whose path contains the decommissioned spot");
  }
  return q_for(sigma, sets);
}

Eigen::VectorXd TreeSearch::pi_tilde() const {
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(index_->size());
  double total = 0.0;
  for (int sigma = 0; sigma < index_->size(); ++sigma) {
    if (alive_spots_[sigma] > 0) {
      pi[sigma] = weight(sigma);
      total += pi[sigma];
    }
  }
  if (total <= 0.0) throw LogicError("all experts are dead");
  return pi / total;
}

void TreeSearch::kill_spot(Vertex r) {
  for (int sigma : index_->experts_through[r]) --alive_spots_[sigma];
}

void TreeSearch::run_prologue_rules(SearchStep& step, Rng& rng) {
  if (counts_[car_] > 0) return;
  const Vertex above = nearest_alive_ancestor(car_, kNoVertex);
  if (above != kNoVertex) {
    step.prologue_distance += tree_->distance(car_, above);
    car_ = above;
    step.jumped = true;
    return;
  }
  step.prologue_distance += tree_->distance(car_, tree_->root());
  car_ = tree_->root();
  phase_ = Phase::kCore;
  const std::vector<int> alive = alive_experts();
  if (alive.empty()) throw SearchTerminatedError("no spots remain");
  gamma_ = alive[rng.below(alive.size())];
  const Vertex target = first_alive_spot(gamma_);
  step.core_distance += tree_->distance(car_, target);
  car_ = target;
  step.jumped = true;
}

SearchStep TreeSearch::settle(Rng& rng) {
  if (settled_) throw LogicError("settle called twice");
  settled_ = true;
  SearchStep step;
  step.car_before = car_;
  step.phase_before = phase_;
  step.region = region_of(car_);
  run_prologue_rules(step, rng);
  step.car_after = car_;
  step.gamma = gamma_;
  return step;
}

SearchStep TreeSearch::decommission(Vertex r, Rng& rng) {
  if (!settled_) throw LogicError("settle must run before the first decommissioning");
  if (!tree_->contains(r) || counts_[r] <= 0) {
    throw LogicError("spot " + std::to_string(r) + " is not in commission");
  }
  SearchStep step;
  step.decommissioned = r;
  step.car_before = car_;
  step.phase_before = phase_;
  step.region = region_of(r);

  if (counts_[r] > 1) {
    --counts_[r];
    step.car_after = car_;
    step.gamma = gamma_;
    return step;
  }
  step.spot_died = true;

  if (phase_ == Phase::kCore) {
    const ExpertSets sets = sets_for(r);
    int next_gamma = -1;
    if (car_ == r) {
      const Eigen::VectorXd q = q_for(gamma_, sets);
      next_gamma = static_cast<int>(rng.sample(q));
    }
    if (step.region == Region::kFrontier) {
      for (int sigma : sets.x) ++hits_[sigma];
    }
    counts_[r] = 0;
    kill_spot(r);
    if (car_ == r) {
      gamma_ = next_gamma;
      const Vertex target = first_alive_spot(gamma_);
      step.core_distance += tree_->distance(car_, target);
      car_ = target;
      step.jumped = true;
      ++core_jumps_;
    }
  } else {
    counts_[r] = 0;
    kill_spot(r);
    run_prologue_rules(step, rng);
    if (step.jumped) ++prologue_jumps_;
  }
  step.car_after = car_;
  step.gamma = gamma_;
  return step;
}

Eigen::VectorXd TreeSearch::expert_law_to_vertices(const Eigen::VectorXd& expert_law, Vertex excluded) const {
  Eigen::VectorXd law = Eigen::VectorXd::Zero(tree_->size());
  for (int tau = 0; tau < index_->size(); ++tau) {
    if (expert_law[tau] <= 0.0) continue;
    const Vertex target = first_alive_spot_excluding(tau, excluded);
    if (target == kNoVertex) throw LogicError("positive mass on a dead expert");
    law[target] += expert_law[tau];
  }
  return law;
}

Eigen::VectorXd TreeSearch::settle_law() const {
  Eigen::VectorXd law = Eigen::VectorXd::Zero(tree_->size());
  if (counts_[car_] > 0) {
    law[car_] = 1.0;
    return law;
  }
  const Vertex above = nearest_alive_ancestor(car_, kNoVertex);
  if (above != kNoVertex) {
    law[above] = 1.0;
    return law;
  }
  const std::vector<int> alive = alive_experts();
  if (alive.empty()) throw SearchTerminatedError("no spots remain");
  Eigen::VectorXd uniform = Eigen::VectorXd::Zero(index_->size());
  for (int sigma : alive) uniform[sigma] = 1.0 / static_cast<double>(alive.size());
  return expert_law_to_vertices(uniform, kNoVertex);
}

Eigen::VectorXd TreeSearch::relocation_law() const {
  if (!settled_) return settle_law();
  const Vertex c = car_;
  if (phase_ == Phase::kCore) {
    const ExpertSets sets = sets_for(c);
    return expert_law_to_vertices(q_for(gamma_, sets), c);
  }
  Eigen::VectorXd law = Eigen::VectorXd::Zero(tree_->size());
  const Vertex above = nearest_alive_ancestor(c, c);
  if (above != kNoVertex) {
    law[above] = 1.0;
    return law;
  }
  std::vector<char> through(index_->size(), 0);
  for (int sigma : index_->experts_through[c]) through[sigma] = 1;
  std::vector<int> alive;
  for (int sigma = 0; sigma < index_->size(); ++sigma) {
    const int remaining = alive_spots_[sigma] - ((through[sigma] && counts_[c] > 0) ? 1 : 0);
    if (remaining > 0) alive.push_back(sigma);
  }
  if (alive.empty()) throw SearchTerminatedError("no spots remain");
  Eigen::VectorXd uniform = Eigen::VectorXd::Zero(index_->size());
  for (int sigma : alive) uniform[sigma] = 1.0 / static_cast<double>(alive.size());
  return expert_law_to_vertices(uniform, c);
}

SearchTrace run_tree_search(const SearchInstance& instance, double epsilon, Rng& rng) {
  instance.validate();
  std::vector<int> counts(instance.tree->size(), 0);
  for (Vertex s : instance.spots) counts[s] = 1;
  TreeSearch search(instance.tree, std::move(counts), instance.start, epsilon);

  SearchTrace trace;
  trace.height = search.index().height;
  trace.experts = search.index().size();
  trace.initial = search.settle(rng);
  trace.prologue_distance = trace.initial.prologue_distance;
  trace.core_distance = trace.initial.core_distance;
  trace.core_begins_at = instance.kills.size();
  trace.steps.reserve(instance.kills.size());
  for (Vertex r : instance.kills) {
    SearchStep step = search.decommission(r, rng);
    if (step.phase_before == Phase::kCore && trace.core_begins_at == instance.kills.size()) {
      trace.core_begins_at = trace.steps.size();
    }
    trace.prologue_distance += step.prologue_distance;
    trace.core_distance += step.core_distance;
    trace.steps.push_back(step);
  }
  trace.prologue_jumps = search.prologue_jumps();
  trace.core_jumps = search.core_jumps();
  trace.final_car = search.car();
  return trace;
}

std::string format_trace_line(std::size_t t, const SearchStep& step) {
  std::ostringstream out;
  out << "t=" << t << " region=" << to_string(step.region) << " car=" << step.car_after << " gamma=";
  if (step.gamma < 0) {
    out << '-';
  } else {
    out << step.gamma;
  }
  out << " jump=" << (step.jumped ? 1 : 0);
  return out.str();
}

}  // namespace parkmatch
