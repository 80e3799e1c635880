#include "parkmatch/assignment.hpp"

#include <limits>

#include "parkmatch/errors.hpp"
#include "parkmatch/pricing.hpp"

namespace parkmatch {

AssignmentSolution solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw InputError("assignment needs rows <= columns");
  AssignmentSolution out;
  out.column_of.assign(n, -1);
  if (n == 0) return out;

  // 1-based arrays; column 0 is the virtual start of each augmenting path.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) out.column_of[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.column_of[i]);
  return out;
}

double opt_matching_cost(const MatchInstance& instance) {
  instance.validate();
  const WeightedTree& tree = *instance.tree;
  std::vector<Vertex> servers = expand_servers(instance.servers);
  if (instance.requests.size() > servers.size()) throw InputError("more requests than servers");
  Eigen::MatrixXd cost(instance.requests.size(), servers.size());
  for (std::size_t r = 0; r < instance.requests.size(); ++r)
    for (std::size_t s = 0; s < servers.size(); ++s) cost(r, s) = tree.distance(instance.requests[r], servers[s]);
  return solve_assignment(cost).cost;
}

double opt_search_cost(const SearchInstance& instance) {
  instance.validate();
  return instance.tree->distance(instance.start, instance.survivor());
}

}  // namespace parkmatch
