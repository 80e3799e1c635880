#pragma once

#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parkmatch/pricing.hpp"
#include "parkmatch/tree_match.hpp"
#include "parkmatch/tree_search.hpp"

namespace parkmatch {

// Everything a text instance can hold. Records, one per line:
//   root <id> | edge <u> <v> <w> | spot <v> | car <v> | kill <v>
//   server <v> [count] | request <v> | pi <server> <vertex> <prob>
// Blank lines and text after '#' are ignored. The vertex count is one more
// than the largest id used by root and edge records.
struct InstanceFile {
  std::shared_ptr<const WeightedTree> tree;
  std::vector<Vertex> spots;
  std::optional<Vertex> car;
  std::vector<Vertex> kills;
  std::vector<Vertex> server_at;  // one entry per server, in file order
  std::vector<Vertex> requests;

  struct PiEntry {
    int server;
    Vertex vertex;
    double probability;
  };
  std::vector<PiEntry> pi;

  SearchInstance search_instance() const;
  MatchInstance match_instance() const;
  std::vector<int> server_counts() const;
  // Servers x vertices; absent entries are 0.
  ProbabilityMatrix pi_matrix() const;
};

// Throws InputError with the line number on malformed input.
InstanceFile parse_instance(std::istream& in);
InstanceFile parse_instance(const std::string& text);
InstanceFile read_instance_file(const std::string& path);

// Round-trippable writers (weights printed with 17 significant digits).
std::string format_tree(const WeightedTree& tree);
std::string format_search_instance(const SearchInstance& instance);
std::string format_match_instance(const MatchInstance& instance);

// Shortest round-trippable decimal for a double.
std::string format_number(double x);

}  // namespace parkmatch
