#pragma once

#include <vector>

#include <Eigen/Dense>

#include "parkmatch/tree_match.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

struct AssignmentSolution {
  std::vector<int> column_of;  // per row
  double cost = 0.0;
};

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// Hungarian method with potentials, O(rows^2 * cols).
AssignmentSolution solve_assignment(const Eigen::MatrixXd& cost);

// Offline optimum of a matching instance: min total distance over injective
// request to server maps.
double opt_matching_cost(const MatchInstance& instance);

// Offline optimum of a search instance: drive straight to the survivor.
double opt_search_cost(const SearchInstance& instance);

}  // namespace parkmatch
