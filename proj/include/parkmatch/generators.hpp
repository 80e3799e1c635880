#pragma once

#include <string>
#include <vector>

#include "parkmatch/pricing.hpp"
#include "parkmatch/rng.hpp"
#include "parkmatch/tree_match.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

// Prufer codec on labels 0..n-1 (n >= 2); decode returns n-1 edges.
std::vector<int> prufer_encode(const WeightedTree& tree);
std::vector<Edge> prufer_decode(const std::vector<int>& code, int n);

// Unlabeled shape key: the smaller centered nested-parenthesis encoding.
std::string canonical_shape(const WeightedTree& tree);

// One representative of every unlabeled tree shape on n vertices, rooted at
// 0, unit weights. Exhaustive over Prufer codes, so keep n <= 8.
std::vector<WeightedTree> enumerate_tree_shapes(int n);

// Uniform labeled tree from a random Prufer code, rooted at 0. Weights are
// log-uniform in [1, delta_target], the lightest edge is scaled to exactly
// 1, and the spread is tuned so the root eccentricity hits delta_target
// (unless the hop depth alone already exceeds it). Two vertices always
// get a single unit edge.
WeightedTree gen_random_tree(int n, double delta_target, Rng& rng);

// `spot_count` distinct spots, a uniform survivor and a shuffled kill order
// of the rest. With distinct_start the car never starts on the survivor.
SearchInstance gen_search_instance(std::shared_ptr<const WeightedTree> tree, int spot_count, Rng& rng,
                                   bool distinct_start = true);

// k servers and m <= k requests at uniform vertices.
MatchInstance gen_match_instance(std::shared_ptr<const WeightedTree> tree, int servers, int requests, Rng& rng);

// Random monotone, column-stochastic pi: a random mixture of up to
// `components` laws induced by random finite prices.
ProbabilityMatrix random_monotone_pi(const WeightedTree& tree, const std::vector<Vertex>& server_at, Rng& rng,
                                     int components = 3);

}  // namespace parkmatch
