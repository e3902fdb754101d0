#include "kronsensus/graphs.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace kronsensus {

namespace {

void build_csr(Index n, const std::vector<Arc>& arcs, bool forward, std::vector<Index>& offsets,
               std::vector<Index>& targets) {
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [a, b] : arcs) ++offsets[static_cast<std::size_t>(forward ? a : b) + 1];
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  targets.assign(arcs.size(), 0);
  std::vector<Index> fill(offsets.begin(), offsets.end() - 1);
  for (const auto& [a, b] : arcs) {
    const Index key = forward ? a : b;
    targets[static_cast<std::size_t>(fill[static_cast<std::size_t>(key)]++)] = forward ? b : a;
  }
}

std::vector<bool> bfs(const DirectedGraph& g, Index source, bool forward) {
  std::vector<bool> seen(static_cast<std::size_t>(g.vertex_count()), false);
  std::deque<Index> queue{source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    for (Index w : forward ? g.successors(v) : g.predecessors(v)) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

DirectedGraph::DirectedGraph(Index vertex_count, std::vector<Arc> arcs)
    : vertex_count_(vertex_count), arcs_(std::move(arcs)) {
  if (vertex_count_ < 0) throw DomainError("vertex count must be nonnegative");
  for (const auto& [a, b] : arcs_) {
    if (a < 0 || a >= vertex_count_ || b < 0 || b >= vertex_count_) {
      throw DomainError("arc (" + std::to_string(a) + "," + std::to_string(b) +
                        ") has an endpoint outside [0, " + std::to_string(vertex_count_) + ")");
    }
  }
  std::sort(arcs_.begin(), arcs_.end());
  arcs_.erase(std::unique(arcs_.begin(), arcs_.end()), arcs_.end());
  build_csr(vertex_count_, arcs_, true, out_offsets_, out_targets_);
  build_csr(vertex_count_, arcs_, false, in_offsets_, in_sources_);
}

std::span<const Index> DirectedGraph::successors(Index v) const {
  const auto b = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(out_offsets_[static_cast<std::size_t>(v) + 1]);
  return std::span<const Index>(out_targets_.data() + b, e - b);
}

std::span<const Index> DirectedGraph::predecessors(Index v) const {
  const auto b = static_cast<std::size_t>(in_offsets_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(in_offsets_[static_cast<std::size_t>(v) + 1]);
  return std::span<const Index>(in_sources_.data() + b, e - b);
}

bool DirectedGraph::has_arc(Index from, Index to) const {
  if (from < 0 || from >= vertex_count_) return false;
  const auto s = successors(from);
  return std::binary_search(s.begin(), s.end(), to);
}

DirectedGraph de_bruijn_graph(Index n, int k, const Limits& limits) {
  if (n < 2) throw DomainError("de Bruijn graph needs n >= 2");
  if (k < 1) throw DomainError("de Bruijn graph needs k >= 1");
  const Index size = checked_pow(n, k, limits.max_graph_vertices);
  std::vector<Arc> arcs;
  arcs.reserve(static_cast<std::size_t>(size * n));
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < n; ++j) arcs.emplace_back(i, ((i % (size / n)) * n + j) % size);
  }
  return DirectedGraph(size, std::move(arcs));
}

DirectedGraph cayley_graph(const AbelianGroup& group, const std::vector<GroupElement>& support) {
  std::vector<Index> s;
  for (const auto& e : support) s.push_back(group.index_of(e));
  std::vector<Arc> arcs;
  for (Index g = 0; g < group.order(); ++g) {
    const GroupElement ge = group.element_of(g);
    for (const auto& e : support) {
      GroupElement h = ge;
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += e[i];
      arcs.emplace_back(g, group.index_of(h));
    }
  }
  return DirectedGraph(group.order(), std::move(arcs));
}

DirectedGraph communication_graph(const MatrixXd& m, double zero_tol) {
  if (m.rows() != m.cols()) throw DomainError("communication graph needs a square matrix");
  std::vector<Arc> arcs;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (std::abs(m(i, j)) > zero_tol) arcs.emplace_back(j, i);
    }
  }
  return DirectedGraph(m.rows(), std::move(arcs));
}

std::vector<bool> reachable_from(const DirectedGraph& g, Index source) {
  if (source < 0 || source >= g.vertex_count()) throw DomainError("source vertex out of range");
  return bfs(g, source, true);
}

DirectedGraph transpose(const DirectedGraph& g) {
  std::vector<Arc> arcs;
  arcs.reserve(g.arcs().size());
  for (const auto& [a, b] : g.arcs()) arcs.emplace_back(b, a);
  return DirectedGraph(g.vertex_count(), std::move(arcs));
}

DirectedGraph relabel(const DirectedGraph& g, std::span<const Index> perm) {
  if (static_cast<Index>(perm.size()) != g.vertex_count()) {
    throw DomainError("relabel: permutation size mismatch");
  }
  std::vector<bool> hit(perm.size(), false);
  for (Index v : perm) {
    if (v < 0 || v >= g.vertex_count() || hit[static_cast<std::size_t>(v)]) {
      throw DomainError("relabel: not a permutation");
    }
    hit[static_cast<std::size_t>(v)] = true;
  }
  std::vector<Arc> arcs;
  arcs.reserve(g.arcs().size());
  for (const auto& [a, b] : g.arcs()) {
    arcs.emplace_back(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  }
  return DirectedGraph(g.vertex_count(), std::move(arcs));
}

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.vertex_count() == 0) return true;
  const auto fwd = bfs(g, 0, true);
  const auto bwd = bfs(g, 0, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

bool is_connected(const DirectedGraph& g) {
  const Index n = g.vertex_count();
  std::vector<std::vector<bool>> reach;
  reach.reserve(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) reach.push_back(bfs(g, v, true));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (!reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
          !reach[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
        return false;
      }
    }
  }
  return true;
}

DegreeProfile degree_profile(const DirectedGraph& g) {
  DegreeProfile p;
  p.in_degrees.assign(static_cast<std::size_t>(g.vertex_count()), 0);
  p.out_degrees.assign(static_cast<std::size_t>(g.vertex_count()), 0);
  for (const auto& [a, b] : g.arcs()) {
    ++p.out_degrees[static_cast<std::size_t>(a)];
    ++p.in_degrees[static_cast<std::size_t>(b)];
  }
  if (!p.in_degrees.empty()) {
    p.max_in = *std::max_element(p.in_degrees.begin(), p.in_degrees.end());
    p.max_out = *std::max_element(p.out_degrees.begin(), p.out_degrees.end());
  }
  return p;
}

bool is_subgraph(const DirectedGraph& sub, const DirectedGraph& super) {
  if (sub.vertex_count() != super.vertex_count()) return false;
  return std::includes(super.arcs().begin(), super.arcs().end(), sub.arcs().begin(),
                       sub.arcs().end());
}

void write_edge_list(std::ostream& os, const DirectedGraph& g) {
  os << "vertices " << g.vertex_count() << '\n';
  for (const auto& [a, b] : g.arcs()) os << a << ' ' << b << '\n';
  if (!os) throw IoError("write_edge_list: stream error");
}

void write_edge_list(const std::filesystem::path& path, const DirectedGraph& g) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_edge_list(os, g);
}

DirectedGraph read_edge_list(std::istream& is) {
  std::string word;
  Index n = 0;
  if (!(is >> word >> n) || word != "vertices" || n < 0) {
    throw IoError("read_edge_list: expected header 'vertices N'");
  }
  std::vector<Arc> arcs;
  Index a = 0, b = 0;
  while (is >> a) {
    if (!(is >> b)) throw IoError("read_edge_list: dangling arc endpoint");
    arcs.emplace_back(a, b);
  }
  if (!is.eof()) throw IoError("read_edge_list: malformed arc line");
  try {
    return DirectedGraph(n, std::move(arcs));
  } catch (const DomainError& e) {
    throw IoError(std::string("read_edge_list: ") + e.what());
  }
}

void write_dot(std::ostream& os, const DirectedGraph& g, const std::string& name) {
  os << "digraph " << name << " {\n";
  for (Index v = 0; v < g.vertex_count(); ++v) os << "  " << v << ";\n";
  for (const auto& [a, b] : g.arcs()) os << "  " << a << " -> " << b << ";\n";
  os << "}\n";
}

}  // namespace kronsensus
