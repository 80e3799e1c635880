#include "parkmatch/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>

#include "parkmatch/errors.hpp"

namespace parkmatch {

std::vector<int> prufer_encode(const WeightedTree& tree) {
  const int n = tree.size();
  if (n < 2) throw InputError("prufer code needs at least two vertices");
  std::vector<int> degree(n);
  for (Vertex v = 0; v < n; ++v) degree[v] = static_cast<int>(tree.neighbors(v).size());
  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (Vertex v = 0; v < n; ++v)
    if (degree[v] == 1) leaves.push(v);
  std::vector<char> removed(n, 0);
  std::vector<int> code;
  for (int step = 0; step < n - 2; ++step) {
    int leaf = leaves.top();
    leaves.pop();
    removed[leaf] = 1;
    for (Vertex w : tree.neighbors(leaf)) {
      if (removed[w]) continue;
      code.push_back(w);
      if (--degree[w] == 1) leaves.push(w);
    }
  }
  return code;
}

std::vector<Edge> prufer_decode(const std::vector<int>& code, int n) {
  if (n < 2 || static_cast<int>(code.size()) != n - 2) throw InputError("prufer code length must be n - 2");
  std::vector<int> degree(n, 1);
  for (int c : code) {
    if (c < 0 || c >= n) throw InputError("prufer label out of range");
    ++degree[c];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (int v = 0; v < n; ++v)
    if (degree[v] == 1) leaves.push(v);
  std::vector<Edge> edges;
  for (int c : code) {
    int leaf = leaves.top();
    leaves.pop();
    edges.push_back({leaf, c, 1.0});
    if (--degree[c] == 1) leaves.push(c);
  }
  int a = leaves.top();
  leaves.pop();
  int b = leaves.top();
  edges.push_back({a, b, 1.0});
  return edges;
}

namespace {

std::string rooted_code(const WeightedTree& tree, Vertex v, Vertex from) {
  std::vector<std::string> kids;
  for (Vertex w : tree.neighbors(v))
    if (w != from) kids.push_back(rooted_code(tree, w, v));
  std::sort(kids.begin(), kids.end());
  std::string out = "(";
  for (const auto& k : kids) out += k;
  return out + ")";
}

}  // namespace

std::string canonical_shape(const WeightedTree& tree) {
  const int n = tree.size();
  if (n == 1) return "()";
  // Peel leaves layer by layer; the last one or two are the centers.
  std::vector<int> degree(n);
  std::vector<Vertex> layer;
  for (Vertex v = 0; v < n; ++v) {
    degree[v] = static_cast<int>(tree.neighbors(v).size());
    if (degree[v] <= 1) layer.push_back(v);
  }
  int left = n;
  while (left > 2) {
    left -= static_cast<int>(layer.size());
    std::vector<Vertex> next;
    for (Vertex v : layer)
      for (Vertex w : tree.neighbors(v))
        if (--degree[w] == 1) next.push_back(w);
    layer = std::move(next);
  }
  std::string best;
  for (Vertex c : layer) {
    std::string code = rooted_code(tree, c, kNoVertex);
    if (best.empty() || code < best) best = code;
  }
  return best;
}

std::vector<WeightedTree> enumerate_tree_shapes(int n) {
  if (n < 1) throw InputError("need n >= 1");
  if (n == 1) return {WeightedTree::single_vertex()};
  if (n == 2) return {WeightedTree(2, {{0, 1, 1.0}}, 0)};
  std::set<std::string> seen;
  std::vector<WeightedTree> out;
  std::vector<int> code(n - 2, 0);
  while (true) {
    WeightedTree t(n, prufer_decode(code, n), 0);
    if (seen.insert(canonical_shape(t)).second) out.push_back(std::move(t));
    int i = 0;
    while (i < n - 2 && ++code[i] == n) code[i++] = 0;
    if (i == n - 2) break;
  }
  return out;
}

WeightedTree gen_random_tree(int n, double delta_target, Rng& rng) {
  if (n < 1) throw InputError("need n >= 1");
  if (!(delta_target >= 1.0)) throw InputError("delta target must be at least 1");
  if (n == 1) return WeightedTree::single_vertex();
  // One edge cannot be both the lightest and the target length.
  if (n == 2) return WeightedTree(2, {{0, 1, 1.0}}, 0);
  std::vector<Edge> edges;
  {
    std::vector<int> code(n - 2);
    for (int& c : code) c = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
    edges = prufer_decode(code, n);
  }
  const double log_hi = std::log(delta_target);
  double lightest = std::numeric_limits<double>::infinity();
  for (Edge& e : edges) {
    e.weight = std::exp(rng.uniform(0.0, log_hi));
    lightest = std::min(lightest, e.weight);
  }
  for (Edge& e : edges) e.weight = std::max(e.weight / lightest, 1.0);

  WeightedTree shape(n, edges, 0);
  // Eccentricity under w' = 1 + (w - 1) * lambda is increasing in lambda,
  // and the minimum stays exactly 1.
  auto scaled = [&](double lambda) {
    std::vector<Edge> out = edges;
    for (Edge& e : out) e.weight = 1.0 + (e.weight - 1.0) * lambda;
    return out;
  };
  auto ecc = [&](double lambda) { return WeightedTree(n, scaled(lambda), 0).eccentricity_from_root(); };
  if (ecc(0.0) >= delta_target) return WeightedTree(n, scaled(0.0), 0);
  double lo = 0.0;
  double hi = 1.0;
  while (ecc(hi) < delta_target && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  if (ecc(hi) < delta_target) {
    // Every edge is 1: stretch the edge above the farthest vertex instead.
    WeightedTree flat(n, scaled(hi), 0);
    Vertex far = flat.bfs_order().back();
    for (Vertex v = 0; v < n; ++v)
      if (flat.root_distance(v) > flat.root_distance(far)) far = v;
    std::vector<Edge> out = scaled(hi);
    for (Edge& e : out)
      if ((e.u == far && e.v == flat.parent(far)) || (e.v == far && e.u == flat.parent(far)))
        e.weight += delta_target - flat.root_distance(far);
    return WeightedTree(n, std::move(out), 0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (ecc(mid) < delta_target ? lo : hi) = mid;
  }
  return WeightedTree(n, scaled(hi), 0);
}

SearchInstance gen_search_instance(std::shared_ptr<const WeightedTree> tree, int spot_count, Rng& rng,
                                   bool distinct_start) {
  const int n = tree->size();
  if (spot_count < 1 || spot_count > n) throw InputError("spot count must lie in [1, n]");
  if (distinct_start && n < 2) throw InputError("a distinct start needs two vertices");
  std::vector<Vertex> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  shuffle(all, rng);
  SearchInstance s;
  s.tree = tree;
  s.spots.assign(all.begin(), all.begin() + spot_count);
  std::sort(s.spots.begin(), s.spots.end());
  Vertex survivor = s.spots[rng.below(s.spots.size())];
  for (Vertex v : s.spots)
    if (v != survivor) s.kills.push_back(v);
  shuffle(s.kills, rng);
  do {
    s.start = static_cast<Vertex>(rng.below(static_cast<std::size_t>(n)));
  } while (distinct_start && s.start == survivor);
  return s;
}

MatchInstance gen_match_instance(std::shared_ptr<const WeightedTree> tree, int servers, int requests, Rng& rng) {
  if (servers < 1 || requests < 0 || requests > servers) throw InputError("need 0 <= requests <= servers, servers >= 1");
  const auto n = static_cast<std::size_t>(tree->size());
  MatchInstance m;
  m.tree = tree;
  m.servers.assign(n, 0);
  for (int i = 0; i < servers; ++i) ++m.servers[rng.below(n)];
  for (int i = 0; i < requests; ++i) m.requests.push_back(static_cast<Vertex>(rng.below(n)));
  return m;
}

ProbabilityMatrix random_monotone_pi(const WeightedTree& tree, const std::vector<Vertex>& server_at, Rng& rng,
                                     int components) {
  if (components < 1) throw InputError("need at least one component");
  const int k = static_cast<int>(server_at.size());
  const double scale = tree.size() > 1 ? tree.eccentricity_from_root() : 1.0;
  int used = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(components)));
  Eigen::VectorXd mix(used);
  for (int c = 0; c < used; ++c) mix[c] = -std::log(1.0 - rng.uniform());
  mix /= mix.sum();
  ProbabilityMatrix pi = ProbabilityMatrix::Zero(k, tree.size());
  for (int c = 0; c < used; ++c) {
    PriceTable t{std::vector<double>(k)};
    for (double& p : t.price) p = rng.uniform(0.0, 2.0 * scale);
    for (Vertex v = 0; v < tree.size(); ++v) pi(selfish_choice(tree, server_at, t, v).server, v) += mix[c];
  }
  return pi;
}

}  // namespace parkmatch
