#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "kronsensus/group.hpp"
#include "kronsensus/matlin.hpp"

namespace kronsensus {

using Arc = std::pair<Index, Index>;

/// Directed graph with self-loops allowed. Arcs are stored sorted and unique.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  DirectedGraph(Index vertex_count, std::vector<Arc> arcs);

  Index vertex_count() const { return vertex_count_; }
  Index arc_count() const { return static_cast<Index>(arcs_.size()); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  std::span<const Index> successors(Index v) const;
  std::span<const Index> predecessors(Index v) const;
  bool has_arc(Index from, Index to) const;

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.vertex_count_ == b.vertex_count_ && a.arcs_ == b.arcs_;
  }

 private:
  Index vertex_count_ = 0;
  std::vector<Arc> arcs_;
  std::vector<Index> out_offsets_, out_targets_;
  std::vector<Index> in_offsets_, in_sources_;
};

struct DegreeProfile {
  std::vector<Index> in_degrees;
  std::vector<Index> out_degrees;
  Index max_in = 0;
  Index max_out = 0;
};

/// Arcs i -> (n*i + j) mod n^k, j = 0..n-1.
DirectedGraph de_bruijn_graph(Index n, int k, const Limits& limits = {});
/// Arcs g -> h whenever h - g lies in the support.
DirectedGraph cayley_graph(const AbelianGroup& group, const std::vector<GroupElement>& support);
/// Arc j -> i iff |m(i, j)| > zero_tol.
DirectedGraph communication_graph(const MatrixXd& m, double zero_tol = tol::kZero);

bool is_strongly_connected(const DirectedGraph& g);
// Every pair joined by a path in at least one direction.
bool is_connected(const DirectedGraph& g);
DegreeProfile degree_profile(const DirectedGraph& g);
bool is_subgraph(const DirectedGraph& sub, const DirectedGraph& super);
std::vector<bool> reachable_from(const DirectedGraph& g, Index source);
// Every arc reversed.
DirectedGraph transpose(const DirectedGraph& g);
// Vertex v renamed to perm[v]; perm must be a permutation.
DirectedGraph relabel(const DirectedGraph& g, std::span<const Index> perm);

void write_edge_list(std::ostream& os, const DirectedGraph& g);
void write_edge_list(const std::filesystem::path& path, const DirectedGraph& g);
DirectedGraph read_edge_list(std::istream& is);
void write_dot(std::ostream& os, const DirectedGraph& g, const std::string& name = "G");

}  // namespace kronsensus
