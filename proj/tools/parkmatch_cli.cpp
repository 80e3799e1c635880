// parkmatch: command-line front end for the search, matching, grove and
// pricing algorithms and their verifiers. Reports go to stdout; the same
// arguments and seed always print the same bytes.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parkmatch/assignment.hpp"
#include "parkmatch/errors.hpp"
#include "parkmatch/generators.hpp"
#include "parkmatch/grove.hpp"
#include "parkmatch/grove_match.hpp"
#include "parkmatch/harness.hpp"
#include "parkmatch/instance_io.hpp"
#include "parkmatch/pricing.hpp"
#include "parkmatch/reports.hpp"

using namespace parkmatch;

namespace {

struct Common {
  std::string file;
  std::string alpha = "auto";
  std::string epsilon = "auto";
  std::optional<std::uint64_t> seed;
  std::size_t trials = 0;
  int threads = 0;
};

std::optional<double> parse_auto(const std::string& text, const char* name) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    double x = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return x;
  } catch (const std::exception&) {
    throw InputError(std::string("--") + name + " expects 'auto' or a number, got '" + text + "'");
  }
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("PARKMATCH_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && *env) return v;
    throw InputError("PARKMATCH_SEED must be an unsigned integer");
  }
  return 1;
}

double delta_of(const WeightedTree& tree) { return tree.size() > 1 ? tree.eccentricity_from_root() : 0.0; }

GroveParameters params_for(const Common& c, const WeightedTree& tree) {
  return grove_parameters(tree.size(), delta_of(tree), parse_auto(c.alpha, "alpha"), parse_auto(c.epsilon, "epsilon"));
}

std::size_t trials_or(const Common& c, std::size_t fallback) { return c.trials ? c.trials : fallback; }

// A file with spot/car/kill records is a search instance; matching
// commands read it as requests [car] + kills against the spots.
MatchInstance match_from(const InstanceFile& f) {
  if (!f.server_at.empty() || !f.requests.empty()) return f.match_instance();
  return as_match_instance(f.search_instance());
}

void add_common(CLI::App* app, Common& c, bool with_file = true) {
  if (with_file) app->add_option("file", c.file, "instance file")->required();
  app->add_option("--alpha", c.alpha, "grove parameter alpha: auto or a number > 1");
  app->add_option("--epsilon", c.epsilon, "TreeSearch epsilon: auto or a number in (0, 1)");
  app->add_option("--seed", c.seed, "random seed (falls back to PARKMATCH_SEED, then 1)");
  app->add_option("--trials", c.trials, "number of trials");
  app->add_option("--threads", c.threads, "worker threads (0 = automatic); does not change results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online metrical search and matching on trees"};
  app.require_subcommand(1);

  Common grove_opts, search_opts, match_opts, rgrove_opts, price_opts, verify_opts, gen_opts;

  auto* build_grove = app.add_subcommand("build-grove", "build a grove and print its canopy trees");
  add_common(build_grove, grove_opts);

  auto* run_search = app.add_subcommand("run-search", "run TreeSearch and print its trace");
  add_common(run_search, search_opts);

  auto* run_match = app.add_subcommand("run-match", "run TreeMatch on a matching instance");
  add_common(run_match, match_opts);

  auto* run_grove = app.add_subcommand("run-grove", "run GroveMatch; with --trials > 1 on a search instance, report the ratio");
  add_common(run_grove, rgrove_opts);

  auto* price = app.add_subcommand("price", "build the partition distribution for pi and price every partition");
  add_common(price, price_opts);
  std::string law = "file";
  price->add_option("--law", law, "source of pi: 'file' (pi records) or 'treematch' (exact first-request law)")
      ->check(CLI::IsMember({"file", "treematch"}));

  auto* verify = app.add_subcommand("verify", "statistical and exact property checks");
  add_common(verify, verify_opts);
  bool v_occ = false, v_jumps = false, v_mono = false, v_dist = false, v_marg = false, v_cells = false;
  bool v_uncond = false;
  std::string matcher = "tree";
  std::size_t history = 0, pairs = 0;
  verify->add_flag("--occupancy", v_occ, "gamma frequencies vs pi-tilde");
  verify->add_flag("--jumps", v_jumps, "prologue and core jump bounds");
  verify->add_flag("--monotone", v_mono, "monotonicity of the next request");
  verify->add_flag("--distortion", v_dist, "grove distortion and hop bounds");
  verify->add_flag("--marginals", v_marg, "partition distribution marginals");
  verify->add_flag("--cells", v_cells, "print every occupancy cell");
  verify->add_flag("--unconditioned", v_uncond, "monotone: resample the history in every trial");
  verify->add_option("--matcher", matcher, "monotone: tree or grove")->check(CLI::IsMember({"tree", "grove"}));
  verify->add_option("--history", history, "monotone: requests served before the probe");
  verify->add_option("--pairs", pairs, "distortion: sampled pairs (0 = all)");

  auto* gen = app.add_subcommand("gen", "generate a random instance");
  add_common(gen, gen_opts, false);
  std::string kind = "search";
  int gen_n = 10, gen_spots = 4, gen_servers = 4, gen_requests = 4;
  double gen_delta = 16.0;
  gen->add_option("--kind", kind, "tree, search or match")->check(CLI::IsMember({"tree", "search", "match"}));
  gen->add_option("--n", gen_n, "vertex count");
  gen->add_option("--delta", gen_delta, "target root eccentricity");
  gen->add_option("--spots", gen_spots, "search: spot count");
  gen->add_option("--servers", gen_servers, "match: server count");
  gen->add_option("--requests", gen_requests, "match: request count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_grove) {
      InstanceFile f = read_instance_file(grove_opts.file);
      GroveParameters p = params_for(grove_opts, *f.tree);
      Rng rng(resolve_seed(grove_opts), 0);
      Grove grove = grove_build(f.tree, p.alpha, rng);
      std::cout << report_parameters(p, delta_of(*f.tree), f.tree->size()) << report_grove(grove);
    } else if (*run_search) {
      InstanceFile f = read_instance_file(search_opts.file);
      SearchInstance s = f.search_instance();
      GroveParameters p = params_for(search_opts, *f.tree);
      Rng rng(resolve_seed(search_opts), 0);
      SearchTrace trace = run_tree_search(s, p.epsilon, rng);
      std::cout << report_search(s, trace, p.epsilon);
    } else if (*run_match) {
      InstanceFile f = read_instance_file(match_opts.file);
      MatchInstance m = match_from(f);
      GroveParameters p = params_for(match_opts, *f.tree);
      Rng rng(resolve_seed(match_opts), 0);
      MatchResult r = run_tree_match(m, p.epsilon, rng);
      std::cout << report_match(r, opt_matching_cost(m));
    } else if (*run_grove) {
      InstanceFile f = read_instance_file(rgrove_opts.file);
      GroveParameters p = params_for(rgrove_opts, *f.tree);
      const std::uint64_t seed = resolve_seed(rgrove_opts);
      if (rgrove_opts.trials > 1) {
        ExperimentConfig cfg;
        cfg.instance = f.search_instance();
        cfg.trials = rgrove_opts.trials;
        cfg.seed = seed;
        cfg.alpha = p.alpha;
        cfg.epsilon = p.epsilon;
        cfg.workers = rgrove_opts.threads;
        std::cout << report_ratio(run_experiment(cfg));
      } else {
        MatchInstance m = match_from(f);
        Rng rng(seed, 0);
        auto grove = std::make_shared<const Grove>(grove_build(f.tree, p.alpha, rng));
        GroveMatchResult r = run_grove_match(m, grove, p.epsilon, rng);
        std::cout << report_parameters(p, delta_of(*f.tree), f.tree->size()) << report_grove_match(r, opt_matching_cost(m));
      }
    } else if (*price) {
      InstanceFile f = read_instance_file(price_opts.file);
      ProbabilityMatrix pi;
      if (law == "treematch") {
        GroveParameters p = params_for(price_opts, *f.tree);
        TreeMatch tm(f.tree, f.server_counts(), p.epsilon);
        pi = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(f.server_at.size()), f.tree->size());
        for (Vertex v = 0; v < f.tree->size(); ++v) pi.col(v) = split_vertex_law(tm.match_law(v), f.server_at);
      } else {
        if (f.pi.empty()) throw InputError("no pi records; pass --law treematch to derive pi");
        pi = f.pi_matrix();
      }
      DistributionBuild built = build_partition_distribution(*f.tree, f.server_at, pi);
      std::cout << report_distribution(built, *f.tree, f.server_at)
                << report_marginals(verify_marginals(built.distribution, pi));
    } else if (*verify) {
      if (!(v_occ || v_jumps || v_mono || v_dist || v_marg))
        throw InputError("verify needs at least one of --occupancy --jumps --monotone --distortion --marginals");
      InstanceFile f = read_instance_file(verify_opts.file);
      GroveParameters p = params_for(verify_opts, *f.tree);
      const std::uint64_t seed = resolve_seed(verify_opts);
      const int workers = verify_opts.threads;
      std::cout << report_parameters(p, delta_of(*f.tree), f.tree->size());
      if (v_occ)
        std::cout << report_occupancy(
            estimate_occupancy(f.search_instance(), p.epsilon, trials_or(verify_opts, 10000), seed, workers), v_cells);
      if (v_jumps)
        std::cout << report_jumps(
            check_jump_bound(f.search_instance(), p.epsilon, trials_or(verify_opts, 10000), seed, workers));
      if (v_mono)
        std::cout << report_monotonicity(check_monotonicity(
            match_from(f), history, matcher == "tree" ? MatcherKind::kTreeMatch : MatcherKind::kGroveMatch, p.epsilon,
            p.alpha, trials_or(verify_opts, 10000), seed, !v_uncond, workers));
      if (v_dist)
        std::cout << report_distortion(check_distortion(f.tree, p.alpha, trials_or(verify_opts, 1000), seed, pairs, workers));
      if (v_marg) {
        if (f.pi.empty()) throw InputError("--marginals needs pi records");
        ProbabilityMatrix pi = f.pi_matrix();
        DistributionBuild built = build_partition_distribution(*f.tree, f.server_at, pi);
        std::cout << report_marginals(verify_marginals(built.distribution, pi));
      }
    } else if (*gen) {
      Rng rng(resolve_seed(gen_opts), 0);
      auto tree = std::make_shared<const WeightedTree>(gen_random_tree(gen_n, gen_delta, rng));
      if (kind == "tree")
        std::cout << format_tree(*tree);
      else if (kind == "search")
        std::cout << format_search_instance(gen_search_instance(tree, gen_spots, rng));
      else
        std::cout << format_match_instance(gen_match_instance(tree, gen_servers, gen_requests, rng));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
