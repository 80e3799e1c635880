#include "parkmatch/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <unordered_map>

#include "parkmatch/errors.hpp"

namespace parkmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrune = 1e-15;

struct LeaderHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (int x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

void check_servers(const WeightedTree& tree, const std::vector<Vertex>& server_at) {
  if (server_at.empty()) throw InputError("no servers");
  for (Vertex s : server_at)
    if (!tree.contains(s)) throw InputError("server at unknown vertex " + std::to_string(s));
}

void check_shape(const WeightedTree& tree, const std::vector<Vertex>& server_at, const ProbabilityMatrix& pi) {
  if (pi.rows() != static_cast<Eigen::Index>(server_at.size()) || pi.cols() != tree.size())
    throw InputError("probability matrix must be servers x vertices");
}

// True iff server i sits in the subtree of u.
bool below(const WeightedTree& tree, const std::vector<Vertex>& server_at, int i, Vertex u) {
  return tree.is_ancestor(u, server_at[i]);
}

}  // namespace

std::vector<Vertex> expand_servers(const std::vector<int>& counts) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < static_cast<Vertex>(counts.size()); ++v)
    for (int k = 0; k < counts[v]; ++k) out.push_back(v);
  return out;
}

std::vector<MonotonePartition::Part> MonotonePartition::parts() const {
  std::vector<Part> out;
  std::vector<int> slot;
  for (Vertex v = 0; v < static_cast<Vertex>(leader_of.size()); ++v) {
    int l = leader_of[v];
    if (l < 0) continue;
    if (l >= static_cast<int>(slot.size())) slot.resize(l + 1, -1);
    if (slot[l] < 0) {
      slot[l] = 0;
      out.push_back({l, {}});
    }
  }
  std::sort(out.begin(), out.end(), [](const Part& a, const Part& b) { return a.leader < b.leader; });
  for (std::size_t i = 0; i < out.size(); ++i) slot[out[i].leader] = static_cast<int>(i);
  for (Vertex v = 0; v < static_cast<Vertex>(leader_of.size()); ++v)
    if (leader_of[v] >= 0) out[slot[leader_of[v]]].members.push_back(v);
  return out;
}

void validate_partition(const WeightedTree& tree, const std::vector<Vertex>& server_at, const MonotonePartition& p) {
  if (static_cast<int>(p.leader_of.size()) != tree.size()) throw ValidationError("partition size mismatch");
  for (Vertex v = 0; v < tree.size(); ++v) {
    int l = p.leader_of[v];
    if (l < 0 || l >= static_cast<int>(server_at.size()))
      throw ValidationError("vertex " + std::to_string(v) + " has no valid leader");
  }
  // A part is connected iff exactly one of its vertices has its parent
  // outside the part.
  std::vector<int> tops(server_at.size(), 0);
  std::vector<char> used(server_at.size(), 0);
  for (Vertex v = 0; v < tree.size(); ++v) {
    int l = p.leader_of[v];
    used[l] = 1;
    Vertex up = tree.parent(v);
    if (up == kNoVertex || p.leader_of[up] != l) ++tops[l];
  }
  for (std::size_t l = 0; l < server_at.size(); ++l) {
    if (!used[l]) continue;
    if (tops[l] != 1) throw ValidationError("part led by server " + std::to_string(l) + " is disconnected");
    if (p.leader_of[server_at[l]] != static_cast<int>(l))
      throw ValidationError("server " + std::to_string(l) + " leads a part it is not in");
  }
}

double PartitionDistribution::total() const {
  double t = 0.0;
  for (const Entry& e : entries) t += e.probability;
  return t;
}

double PartitionDistribution::marginal(int server, Vertex w) const {
  double t = 0.0;
  for (const Entry& e : entries)
    if (e.partition.leader_of[w] == server) t += e.probability;
  return t;
}

const MonotonePartition& PartitionDistribution::sample(Rng& rng) const {
  if (entries.empty()) throw LogicError("sampling from an empty distribution");
  Eigen::VectorXd p(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) p[i] = entries[i].probability;
  return entries[rng.sample(p)].partition;
}

void validate_probability_matrix(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                 const ProbabilityMatrix& pi, double tolerance) {
  check_servers(tree, server_at);
  check_shape(tree, server_at, pi);
  for (Eigen::Index i = 0; i < pi.rows(); ++i)
    for (Eigen::Index v = 0; v < pi.cols(); ++v)
      if (!std::isfinite(pi(i, v)) || pi(i, v) < -tolerance || pi(i, v) > 1.0 + tolerance)
        throw ValidationError("pi entry out of [0,1] at server " + std::to_string(i) + " vertex " + std::to_string(v));
  for (Eigen::Index v = 0; v < pi.cols(); ++v) {
    double s = pi.col(v).sum();
    if (std::abs(s - 1.0) > tolerance)
      throw ValidationError("column of vertex " + std::to_string(v) + " sums to " + std::to_string(s));
  }
  for (Vertex c = 0; c < tree.size(); ++c) {
    Vertex b = tree.parent(c);
    if (b == kNoVertex) continue;
    for (int i = 0; i < static_cast<int>(server_at.size()); ++i) {
      bool down = below(tree, server_at, i, c);
      Vertex far = down ? b : c;
      Vertex near = down ? c : b;
      if (pi(i, far) > pi(i, near) + tolerance)
        throw ValidationError("pi is not monotone: (u,v,s) = (" + std::to_string(far) + "," + std::to_string(near) +
                              "," + std::to_string(i) + ")");
    }
  }
}

DistributionBuild build_partition_distribution(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                               const ProbabilityMatrix& pi) {
  validate_probability_matrix(tree, server_at, pi);
  const int n = tree.size();
  const int k = static_cast<int>(server_at.size());
  using Entry = PartitionDistribution::Entry;

  DistributionBuild out;
  std::vector<Entry> current;
  const Vertex root = tree.root();
  for (int i = 0; i < k; ++i) {
    double p = pi(i, root);
    if (p < kPrune) {
      out.pruned_mass += std::max(p, 0.0);
      continue;
    }
    MonotonePartition part{std::vector<int>(n, -1)};
    part.leader_of[root] = i;
    current.push_back({std::move(part), p});
  }

  const auto& order = tree.bfs_order();
  std::vector<double> phi(k), pi_sum(k), relocated_sum(k);
  for (std::size_t step = 1; step < order.size(); ++step) {
    const Vertex u = order[step];
    const Vertex v = tree.parent(u);
    std::vector<int> relocated;
    std::vector<char> is_relocated(k, 0);
    for (int i = 0; i < k; ++i)
      if (below(tree, server_at, i, u)) {
        relocated.push_back(i);
        is_relocated[i] = 1;
      }
    std::vector<double> delta(k, 0.0);
    double delta_sum = 0.0;
    for (int j : relocated) {
      delta[j] = std::max(pi(j, u) - pi(j, v), 0.0);
      delta_sum += delta[j];
    }

    std::fill(phi.begin(), phi.end(), 0.0);
    std::fill(pi_sum.begin(), pi_sum.end(), 0.0);
    std::fill(relocated_sum.begin(), relocated_sum.end(), 0.0);
    LevelAccounting acct{u, v, static_cast<int>(relocated.size()), 0.0, 0.0};

    std::vector<Entry> next;
    std::unordered_map<std::vector<int>, std::size_t, LeaderHash> seen;
    auto emit = [&](MonotonePartition&& p, double prob) {
      if (prob < kPrune) {
        out.pruned_mass += std::max(prob, 0.0);
        return;
      }
      auto [it, fresh] = seen.try_emplace(p.leader_of, next.size());
      if (fresh)
        next.push_back({std::move(p), prob});
      else
        next[it->second].probability += prob;
    };

    for (Entry& e : current) {
      const int i = e.partition.leader_of[v];
      const double parent_mass = e.probability;
      if (is_relocated[i]) {
        phi[i] += parent_mass;
        e.partition.leader_of[u] = i;
        emit(std::move(e.partition), parent_mass);
        continue;
      }
      const double piv = pi(i, v);
      const double piu = pi(i, u);
      if (!(piv > 0.0)) {
        // The parent carries no mass in exact arithmetic.
        out.pruned_mass += parent_mass;
        continue;
      }
      double emitted = 0.0;
      if (delta_sum <= kPrune) {
        phi[i] += parent_mass;
        emitted = parent_mass;
        MonotonePartition stay = std::move(e.partition);
        stay.leader_of[u] = i;
        emit(std::move(stay), parent_mass);
      } else {
        const double gap = std::max(piv - piu, 0.0);
        for (int j : relocated) {
          double pj = parent_mass * delta[j] * gap / (delta_sum * piv);
          if (pj <= 0.0) continue;
          pi_sum[i] += pj;
          relocated_sum[j] += pj;
          emitted += pj;
          MonotonePartition split = e.partition;
          split.leader_of[u] = j;
          emit(std::move(split), pj);
        }
        const double stay_mass = parent_mass * std::min(piu / piv, 1.0);
        phi[i] += stay_mass;
        emitted += stay_mass;
        MonotonePartition stay = std::move(e.partition);
        stay.leader_of[u] = i;
        emit(std::move(stay), stay_mass);
      }
      acct.extension_error = std::max(acct.extension_error, std::abs(emitted - parent_mass));
    }

    for (int i = 0; i < k; ++i) {
      double err;
      if (is_relocated[i]) {
        err = std::max(std::abs(phi[i] - pi(i, v)), std::abs(phi[i] + relocated_sum[i] - pi(i, u)));
      } else {
        err = std::max(std::abs(phi[i] - pi(i, u)), std::abs(pi_sum[i] - (pi(i, v) - pi(i, u))));
      }
      acct.class_error = std::max(acct.class_error, err);
    }
    out.levels.push_back(acct);
    current = std::move(next);
  }

  double total = 0.0;
  for (const Entry& e : current) total += e.probability;
  if (!(total > 0.0)) throw NumericalError("partition distribution lost all mass", total);
  for (Entry& e : current) e.probability /= total;
  out.distribution.entries = std::move(current);
  return out;
}

MarginalReport verify_marginals(const PartitionDistribution& dist, const ProbabilityMatrix& pi, double tolerance) {
  ProbabilityMatrix got = ProbabilityMatrix::Zero(pi.rows(), pi.cols());
  for (const auto& e : dist.entries) {
    if (static_cast<Eigen::Index>(e.partition.leader_of.size()) != pi.cols())
      throw InputError("partition and matrix disagree on the vertex count");
    for (Eigen::Index w = 0; w < pi.cols(); ++w) {
      int l = e.partition.leader_of[w];
      if (l < 0 || l >= pi.rows()) throw InputError("partition leader out of range");
      got(l, w) += e.probability;
    }
  }
  MarginalReport r;
  for (Eigen::Index i = 0; i < pi.rows(); ++i)
    for (Eigen::Index w = 0; w < pi.cols(); ++w) {
      double err = std::abs(got(i, w) - pi(i, w));
      if (err > r.max_error) {
        r.max_error = err;
        r.worst_server = static_cast<int>(i);
        r.worst_vertex = static_cast<Vertex>(w);
      }
    }
  r.pass = r.max_error <= tolerance;
  return r;
}

PriceTable price_partition(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                           const MonotonePartition& partition) {
  check_servers(tree, server_at);
  validate_partition(tree, server_at, partition);
  const int k = static_cast<int>(server_at.size());

  struct Link {
    int other;
    Vertex mine;
    Vertex theirs;
  };
  std::vector<std::vector<Link>> adj(k);
  std::vector<char> leads(k, 0);
  for (Vertex c = 0; c < tree.size(); ++c) {
    leads[partition.leader_of[c]] = 1;
    Vertex b = tree.parent(c);
    if (b == kNoVertex) continue;
    int lc = partition.leader_of[c];
    int lb = partition.leader_of[b];
    if (lc == lb) continue;
    adj[lc].push_back({lb, c, b});
    adj[lb].push_back({lc, b, c});
  }
  int anchor = -1;
  for (int i = 0; i < k && anchor < 0; ++i)
    if (leads[i]) anchor = i;
  if (anchor < 0) throw InputError("partition has no nonempty part");

  PriceTable t{std::vector<double>(k, kInf)};
  std::vector<char> priced(k, 0);
  t.price[anchor] = 0.0;
  priced[anchor] = 1;
  std::deque<int> queue{anchor};
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (const Link& l : adj[i]) {
      int j = l.other;
      if (priced[j]) continue;
      t.price[j] = t.price[i] + tree.distance(l.mine, server_at[i]) - tree.distance(l.theirs, server_at[j]);
      priced[j] = 1;
      queue.push_back(j);
    }
  }
  return t;
}

SelfishChoice selfish_choice(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                             const PriceTable& prices, Vertex v) {
  if (prices.price.size() != server_at.size()) throw InputError("price table size mismatch");
  SelfishChoice best;
  best.cost = kInf;
  double second = kInf;
  for (int i = 0; i < static_cast<int>(server_at.size()); ++i) {
    if (!std::isfinite(prices.price[i])) continue;
    double c = tree.distance(v, server_at[i]) + prices.price[i];
    if (c < best.cost) {
      second = best.cost;
      best.cost = c;
      best.server = i;
    } else if (c < second) {
      second = c;
    }
  }
  if (best.server < 0) throw InputError("every price is infinite");
  best.margin = second - best.cost;
  return best;
}

ProbabilityMatrix induced_law(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                              const PartitionDistribution& dist) {
  ProbabilityMatrix out = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(server_at.size()), tree.size());
  for (const auto& e : dist.entries) {
    PriceTable t = price_partition(tree, server_at, e.partition);
    for (Vertex v = 0; v < tree.size(); ++v) out(selfish_choice(tree, server_at, t, v).server, v) += e.probability;
  }
  return out;
}

MonotoneReport check_monotone(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                              const ProbabilityMatrix& pi, double tolerance) {
  check_shape(tree, server_at, pi);
  MonotoneReport r;
  for (Vertex c = 0; c < tree.size(); ++c) {
    Vertex b = tree.parent(c);
    if (b == kNoVertex) continue;
    for (int i = 0; i < static_cast<int>(server_at.size()); ++i) {
      bool down = below(tree, server_at, i, c);
      double gap = down ? pi(i, b) - pi(i, c) : pi(i, c) - pi(i, b);
      ++r.checked;
      r.worst_gap = std::max(r.worst_gap, gap);
      if (gap > tolerance) ++r.violations;
    }
  }
  return r;
}

MonotoneReport prices_induce_monotone(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                      const PriceTable& prices) {
  ProbabilityMatrix pi = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(server_at.size()), tree.size());
  for (Vertex v = 0; v < tree.size(); ++v) pi(selfish_choice(tree, server_at, prices, v).server, v) = 1.0;
  return check_monotone(tree, server_at, pi);
}

PostedPriceStep price_step_for_algorithm(const WeightedTree& tree, const std::vector<Vertex>& server_at,
                                         const ProbabilityMatrix& pi, Rng& rng) {
  DistributionBuild built = build_partition_distribution(tree, server_at, pi);
  PostedPriceStep step;
  step.partition = built.distribution.sample(rng);
  step.prices = price_partition(tree, server_at, step.partition);
  return step;
}

Eigen::VectorXd split_vertex_law(const Eigen::VectorXd& vertex_law, const std::vector<Vertex>& server_at) {
  std::vector<int> per_vertex(vertex_law.size(), 0);
  for (Vertex s : server_at) {
    if (s < 0 || s >= vertex_law.size()) throw InputError("server outside the law's vertex range");
    ++per_vertex[s];
  }
  for (Eigen::Index v = 0; v < vertex_law.size(); ++v)
    if (vertex_law[v] > 0.0 && per_vertex[v] == 0)
      throw LogicError("law puts mass on vertex " + std::to_string(v) + " which has no server");
  Eigen::VectorXd out(server_at.size());
  for (std::size_t i = 0; i < server_at.size(); ++i) out[i] = vertex_law[server_at[i]] / per_vertex[server_at[i]];
  return out;
}

std::string format_price(double p) {
  if (std::isinf(p)) return p > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace parkmatch
