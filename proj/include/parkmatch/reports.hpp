#pragma once

#include <string>
#include <vector>

#include "parkmatch/grove.hpp"
#include "parkmatch/grove_match.hpp"
#include "parkmatch/harness.hpp"
#include "parkmatch/pricing.hpp"
#include "parkmatch/tree_match.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

// Line-oriented key=value reports. Numbers use the shortest round-trip
// form, so equal inputs and seeds give byte-identical text.

std::string report_parameters(const GroveParameters& p, double delta, int n);
std::string report_grove(const Grove& grove);
std::string report_search(const SearchInstance& instance, const SearchTrace& trace, double epsilon);
std::string report_match(const MatchResult& result, double opt);
std::string report_grove_match(const GroveMatchResult& result, double opt);
std::string report_distribution(const DistributionBuild& built, const WeightedTree& tree,
                                const std::vector<Vertex>& server_at);
std::string report_marginals(const MarginalReport& r);
std::string report_q_validity(const QValidityReport& r);
std::string report_occupancy(const OccupancyReport& r, bool cells);
std::string report_jumps(const JumpReport& r);
std::string report_monotonicity(const MonotonicityReport& r);
std::string report_distortion(const DistortionReport& r);
std::string report_ratio(const RatioReport& r);

}  // namespace parkmatch
