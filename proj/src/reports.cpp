#include "parkmatch/reports.hpp"

#include "parkmatch/instance_io.hpp"

namespace parkmatch {

namespace {

std::string num(double x) { return format_number(x); }
std::string num(std::size_t x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value; }

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::string join_vertices(const std::vector<Vertex>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(vs[i]);
  }
  return out;
}

}  // namespace

std::string report_parameters(const GroveParameters& p, double delta, int n) {
  return kv("n", num(n)) + " " + kv("delta", num(delta)) + " " + kv("alpha", num(p.alpha)) + " " +
         kv("epsilon", num(p.epsilon)) + " " + kv("log_alpha_delta", num(p.log_alpha_delta)) + "\n";
}

std::string report_grove(const Grove& grove) {
  std::string out = format_grove(grove);
  std::size_t edges = 0;
  int hops = 0;
  for (const GroveNode& node : grove.nodes()) {
    edges += node.edges.size();
    hops = std::max(hops, node.max_hops());
  }
  out += "summary " + kv("trees", num(grove.nodes().size())) + " " + kv("max_depth", num(grove.max_depth())) + " " +
         kv("canopy_edges", num(edges)) + " " + kv("max_hops", num(hops)) + "\n";
  return out;
}

std::string report_search(const SearchInstance& instance, const SearchTrace& trace, double epsilon) {
  std::string out = "search " + kv("epsilon", num(epsilon)) + " " + kv("experts", num(trace.experts)) + " " +
                    kv("height", num(trace.height)) + "\n";
  out += "init " + kv("car", num(trace.initial.car_after)) + " " + kv("jump", num(trace.initial.jumped ? 1 : 0)) + "\n";
  for (std::size_t t = 0; t < trace.steps.size(); ++t) out += format_trace_line(t, trace.steps[t]) + "\n";
  double opt = instance.tree->distance(instance.start, instance.survivor());
  out += "summary " + kv("final_car", num(trace.final_car)) + " " + kv("prologue_jumps", num(trace.prologue_jumps)) +
         " " + kv("core_jumps", num(trace.core_jumps)) + " " + kv("core_begins_at", num(trace.core_begins_at)) + " " +
         kv("distance", num(trace.total_distance())) + " " + kv("opt", num(opt)) + "\n";
  return out;
}

std::string report_match(const MatchResult& result, double opt) {
  std::string out;
  for (std::size_t i = 0; i < result.assignments.size(); ++i) {
    const Assignment& a = result.assignments[i];
    out += "match " + num(i) + " " + num(a.server) + " " + num(a.cost) + "\n";
  }
  out += "total " + kv("cost", num(result.total_cost)) + " " + kv("opt", num(opt)) + "\n";
  return out;
}

std::string report_grove_match(const GroveMatchResult& result, double opt) {
  std::string out;
  for (std::size_t i = 0; i < result.assignments.size(); ++i) {
    const Assignment& a = result.assignments[i];
    out += "match " + num(i) + " " + num(a.server) + " " + num(a.cost) + " dispatch=";
    for (std::size_t k = 0; k < result.traces[i].size(); ++k) {
      const Dispatch& d = result.traces[i][k];
      if (k) out += ';';
      out += num(d.node) + ":" + num(d.x) + ">" + num(d.y);
    }
    out += "\n";
  }
  for (const DepthCharge& c : result.charges)
    out += "charge " + kv("depth", num(c.depth)) + " " + kv("prologue", num(c.prologue)) + " " +
           kv("core", num(c.core)) + " " + kv("fallback", num(c.fallback)) + " " +
           kv("prologue_grove", num(c.prologue_grove)) + " " + kv("core_grove", num(c.core_grove)) + " " +
           kv("fallback_grove", num(c.fallback_grove)) + "\n";
  out += "total " + kv("cost", num(result.total_cost)) + " " + kv("grove_cost", num(result.total_grove_cost)) + " " +
         kv("opt", num(opt)) + "\n";
  return out;
}

std::string report_distribution(const DistributionBuild& built, const WeightedTree& tree,
                                 const std::vector<Vertex>& server_at) {
  std::string out;
  for (const auto& e : built.distribution.entries) {
    out += "partition p=" + num(e.probability) + "\n";
    for (const auto& part : e.partition.parts())
      out += "  part leader=" + num(part.leader) + " members=" + join_vertices(part.members) + "\n";
    PriceTable prices = price_partition(tree, server_at, e.partition);
    for (std::size_t s = 0; s < prices.price.size(); ++s)
      out += "  price " + num(s) + " " + format_price(prices.price[s]) + "\n";
  }
  double worst_ext = 0.0, worst_class = 0.0;
  for (const auto& l : built.levels) {
    worst_ext = std::max(worst_ext, l.extension_error);
    worst_class = std::max(worst_class, l.class_error);
  }
  out += "summary " + kv("partitions", num(built.distribution.entries.size())) + " " +
         kv("pruned_mass", num(built.pruned_mass)) + " " + kv("extension_error", num(worst_ext)) + " " +
         kv("class_error", num(worst_class)) + "\n";
  return out;
}

std::string report_marginals(const MarginalReport& r) {
  return "marginals " + kv("max_error", num(r.max_error)) + " " + kv("worst_server", num(r.worst_server)) + " " +
         kv("worst_vertex", num(r.worst_vertex)) + " " + kv("result", verdict(r.pass)) + "\n";
}

std::string report_q_validity(const QValidityReport& r) {
  return "qvalidity " + kv("instances", num(r.instances)) + " " + kv("states", num(r.states)) + " " +
         kv("laws", num(r.laws)) + " " + kv("negative", num(r.negative)) + " " + kv("bad_sum", num(r.bad_sum)) +
         " " + kv("worst_sum_error", num(r.worst_sum_error)) + " " + kv("result", verdict(r.pass())) + "\n";
}

std::string report_occupancy(const OccupancyReport& r, bool cells) {
  std::string out;
  if (cells)
    for (const OccupancyCell& c : r.cells)
      out += "cell " + kv("t", num(c.t)) + " " + kv("sigma", num(c.sigma)) + " " + kv("p_hat", num(c.p_hat)) + " " +
             kv("pi_tilde", num(c.pi_tilde)) + " " + kv("z", num(c.z)) + " " + kv("in_band", c.in_band ? "1" : "0") +
             "\n";
  out += "occupancy " + kv("trials", num(r.trials)) + " " + kv("core_begins_at", num(r.core_begins_at)) + " " +
         kv("cells", num(r.cells.size())) + " " + kv("outside_band", num(r.outside_band)) + " " +
         kv("flagged", num(r.flagged)) + " " + kv("rerun", num(r.rerun_cells)) + " " +
         kv("failed", num(r.failed_after_rerun)) + " " + kv("phase_mismatches", num(r.phase_mismatches)) + " " +
         kv("result", verdict(r.pass())) + "\n";
  return out;
}

std::string report_jumps(const JumpReport& r) {
  return "jumps " + kv("trials", num(r.trials)) + " " + kv("epsilon", num(r.epsilon)) + " " +
         kv("height", num(r.height)) + " " + kv("experts", num(r.experts)) + " " +
         kv("max_prologue", num(r.max_prologue)) + " " + kv("prologue_violations", num(r.prologue_violations)) + " " +
         kv("mean_core", num(r.mean_core)) + " " + kv("stderr_core", num(r.stderr_core)) + " " +
         kv("max_core", num(r.max_core)) + " " + kv("bound", num(r.bound)) + " " + kv("result", verdict(r.pass())) +
         "\n";
}

std::string report_monotonicity(const MonotonicityReport& r) {
  std::string out;
  for (const MonotoneViolation& v : r.examples)
    out += "violation " + kv("u", num(v.far)) + " " + kv("v", num(v.near)) + " " + kv("s", num(v.server)) + " " +
           kv("p_u", num(v.p_far)) + " " + kv("p_v", num(v.p_near)) + " " + kv("allowance", num(v.allowance)) + "\n";
  out += "monotone " + kv("matcher", to_string(r.kind)) + " " + kv("conditioned", r.conditioned ? "1" : "0") + " " +
         kv("trials", num(r.trials)) + " " + kv("history", num(r.history)) + " " + kv("checked", num(r.checked)) +
         " " + kv("violations", num(r.violations)) + " " + kv("exact_checked", num(r.exact_checked)) + " " +
         kv("exact_violations", num(r.exact_violations)) + " " + kv("max_exact_gap", num(r.max_exact_gap)) + " " +
         kv("max_estimate_z", num(r.max_estimate_z)) + " " + kv("result", verdict(r.pass())) + "\n";
  return out;
}

std::string report_distortion(const DistortionReport& r) {
  bool ok = r.pass_lower() && r.pass_expected() && r.pass_hops() && r.edge_count_errors == 0;
  return "distortion " + kv("builds", num(r.builds)) + " " + kv("alpha", num(r.alpha)) + " " +
         kv("delta", num(r.delta)) + " " + kv("bound_factor", num(r.bound_factor)) + " " +
         kv("bound_factor_natural", num(r.bound_factor_natural)) + " " + kv("pairs", num(r.pairs)) + " " +
         kv("worst_mean_ratio", num(r.worst_mean_ratio)) + " " + kv("over_bound", num(r.pairs_over_bound)) + " " +
         kv("over_natural", num(r.pairs_over_natural)) + " " + kv("lower_violations", num(r.lower_violations)) + " " +
         kv("max_hops", num(r.max_hops)) + " " + kv("hop_violations", num(r.hop_violations)) + " " +
         kv("max_depth", num(r.max_depth)) + " " + kv("edge_count_errors", num(r.edge_count_errors)) + " " +
         kv("result", verdict(ok)) + "\n";
}

std::string report_ratio(const RatioReport& r) {
  std::string out;
  for (const DepthCharge& c : r.mean_charges)
    out += "charge " + kv("depth", num(c.depth)) + " " + kv("prologue", num(c.prologue)) + " " +
           kv("core", num(c.core)) + " " + kv("fallback", num(c.fallback)) + " " +
           kv("prologue_grove", num(c.prologue_grove)) + " " + kv("core_grove", num(c.core_grove)) + " " +
           kv("fallback_grove", num(c.fallback_grove)) + "\n";
  out += "ratio " + kv("trials", num(r.trials)) + " " + kv("n", num(r.n)) + " " + kv("delta", num(r.delta)) + " " +
         kv("alpha", num(r.alpha)) + " " + kv("epsilon", num(r.epsilon)) + " " + kv("opt", num(r.opt)) + " " +
         kv("alg_mean", num(r.alg_mean)) + " " + kv("alg_std", num(r.alg_std)) + " " + kv("alg_max", num(r.alg_max)) +
         " " + kv("grove_cost_mean", num(r.grove_cost_mean)) + " " + kv("ratio_mean", num(r.ratio_mean)) + " " +
         kv("ratio_std", num(r.ratio_std)) + " " + kv("ratio_max", num(r.ratio_max)) + " " + kv("bound", num(r.bound)) +
         " " + kv("result", verdict(r.pass())) + "\n";
  return out;
}

}  // namespace parkmatch
