#include "parkmatch/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parkmatch/errors.hpp"

namespace parkmatch {

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineParser {
 public:
  LineParser(std::vector<std::string_view> words, int line) : words_(std::move(words)), line_(line) {}

  void expect_arity(std::size_t lo, std::size_t hi) const {
    if (words_.size() < lo + 1 || words_.size() > hi + 1)
      fail("'" + std::string(words_[0]) + "' takes " + std::to_string(lo) +
           (hi == lo ? "" : "-" + std::to_string(hi)) + " argument(s)");
  }

  long integer(std::size_t k) const {
    long x = 0;
    auto w = words_[k];
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), x);
    if (ec != std::errc() || ptr != w.data() + w.size()) fail("not an integer: '" + std::string(w) + "'");
    return x;
  }

  Vertex vertex(std::size_t k) const {
    long x = integer(k);
    if (x < 0 || x > 100000000) fail("vertex id out of range: " + std::to_string(x));
    return static_cast<Vertex>(x);
  }

  double real(std::size_t k) const {
    double x = 0.0;
    auto w = words_[k];
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), x);
    if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(x))
      fail("not a finite number: '" + std::string(w) + "'");
    return x;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("line " + std::to_string(line_) + ": " + msg);
  }

  std::size_t size() const { return words_.size(); }
  std::string_view word(std::size_t k) const { return words_[k]; }

 private:
  std::vector<std::string_view> words_;
  int line_;
};

}  // namespace

InstanceFile parse_instance(std::istream& in) {
  InstanceFile f;
  std::optional<Vertex> root;
  std::vector<Edge> edges;
  Vertex max_id = -1;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto words = split_words(view);
    if (words.empty()) continue;
    LineParser p(std::move(words), number);
    std::string_view kind = p.word(0);
    if (kind == "root") {
      p.expect_arity(1, 1);
      if (root) p.fail("duplicate root record");
      root = p.vertex(1);
      max_id = std::max(max_id, *root);
    } else if (kind == "edge") {
      p.expect_arity(3, 3);
      Edge e{p.vertex(1), p.vertex(2), p.real(3)};
      if (!(e.weight > 0.0)) p.fail("edge weights must be positive");
      max_id = std::max({max_id, e.u, e.v});
      edges.push_back(e);
    } else if (kind == "spot") {
      p.expect_arity(1, 1);
      f.spots.push_back(p.vertex(1));
    } else if (kind == "car") {
      p.expect_arity(1, 1);
      if (f.car) p.fail("duplicate car record");
      f.car = p.vertex(1);
    } else if (kind == "kill") {
      p.expect_arity(1, 1);
      f.kills.push_back(p.vertex(1));
    } else if (kind == "server") {
      p.expect_arity(1, 2);
      Vertex v = p.vertex(1);
      long count = p.size() == 3 ? p.integer(2) : 1;
      if (count < 1 || count > 1000000) p.fail("server count must be positive");
      f.server_at.insert(f.server_at.end(), static_cast<std::size_t>(count), v);
    } else if (kind == "request") {
      p.expect_arity(1, 1);
      f.requests.push_back(p.vertex(1));
    } else if (kind == "pi") {
      p.expect_arity(3, 3);
      long s = p.integer(1);
      if (s < 0) p.fail("server index must be nonnegative");
      f.pi.push_back({static_cast<int>(s), p.vertex(2), p.real(3)});
    } else {
      p.fail("unknown record '" + std::string(kind) + "'");
    }
  }
  if (!root) throw InputError("missing root record");
  f.tree = std::make_shared<const WeightedTree>(max_id + 1, std::move(edges), *root);
  const WeightedTree& t = *f.tree;
  auto check = [&](Vertex v, const char* what) {
    if (!t.contains(v)) throw InputError(std::string(what) + " at unknown vertex " + std::to_string(v));
  };
  for (Vertex v : f.spots) check(v, "spot");
  if (f.car) check(*f.car, "car");
  for (Vertex v : f.kills) check(v, "kill");
  for (Vertex v : f.server_at) check(v, "server");
  for (Vertex v : f.requests) check(v, "request");
  for (const auto& e : f.pi) {
    check(e.vertex, "pi entry");
    if (e.server >= static_cast<int>(f.server_at.size()))
      throw InputError("pi entry names server " + std::to_string(e.server) + " but only " +
                       std::to_string(f.server_at.size()) + " servers exist");
  }
  return f;
}

InstanceFile parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

InstanceFile read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_instance(in);
}

SearchInstance InstanceFile::search_instance() const {
  if (!car) throw InputError("search instance needs a car record");
  SearchInstance s{tree, spots, *car, kills};
  s.validate();
  return s;
}

std::vector<int> InstanceFile::server_counts() const {
  std::vector<int> counts(tree->size(), 0);
  for (Vertex v : server_at) ++counts[v];
  return counts;
}

MatchInstance InstanceFile::match_instance() const {
  MatchInstance m{tree, server_counts(), requests};
  m.validate();
  return m;
}

ProbabilityMatrix InstanceFile::pi_matrix() const {
  ProbabilityMatrix m = ProbabilityMatrix::Zero(static_cast<Eigen::Index>(server_at.size()), tree->size());
  for (const auto& e : pi) m(e.server, e.vertex) = e.probability;
  return m;
}

std::string format_number(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw LogicError("number formatting failed");
  return std::string(buf, ptr);
}

std::string format_tree(const WeightedTree& tree) {
  std::string out = "root " + std::to_string(tree.root()) + "\n";
  for (const Edge& e : tree.edges())
    out += "edge " + std::to_string(e.u) + " " + std::to_string(e.v) + " " + format_number(e.weight) + "\n";
  return out;
}

std::string format_search_instance(const SearchInstance& instance) {
  std::string out = format_tree(*instance.tree);
  for (Vertex s : instance.spots) out += "spot " + std::to_string(s) + "\n";
  out += "car " + std::to_string(instance.start) + "\n";
  for (Vertex k : instance.kills) out += "kill " + std::to_string(k) + "\n";
  return out;
}

std::string format_match_instance(const MatchInstance& instance) {
  std::string out = format_tree(*instance.tree);
  for (Vertex v = 0; v < static_cast<Vertex>(instance.servers.size()); ++v) {
    if (instance.servers[v] == 1) out += "server " + std::to_string(v) + "\n";
    if (instance.servers[v] > 1) out += "server " + std::to_string(v) + " " + std::to_string(instance.servers[v]) + "\n";
  }
  for (Vertex r : instance.requests) out += "request " + std::to_string(r) + "\n";
  return out;
}

}  // namespace parkmatch
