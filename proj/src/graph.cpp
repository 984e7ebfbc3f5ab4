#include "ampcg/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "ampcg/error.hpp"
#include "ampcg/undirected.hpp"

namespace ampcg {

namespace {

constexpr char kNone = 0;
constexpr char kForward = 1;   // u -> v
constexpr char kBackward = 2;  // v -> u
constexpr char kUndirected = 3;

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

/// Undirected-connected components, each sorted by label, and a vertex map.
std::pair<std::vector<VertexList>, std::vector<std::size_t>> undirected_components(const MixedGraph& g) {
  UnionFind uf(g.size());
  for (auto [u, v] : g.undirected_edges()) uf.unite(u, v);
  std::vector<std::size_t> root_to_comp(g.size(), g.size());
  std::vector<VertexList> comps;
  std::vector<std::size_t> comp_of(g.size());
  for (Vertex v = 0; v < g.size(); ++v) {
    const std::size_t r = uf.find(v);
    if (root_to_comp[r] == g.size()) {
      root_to_comp[r] = comps.size();
      comps.emplace_back();
    }
    comp_of[v] = root_to_comp[r];
    comps[comp_of[v]].push_back(v);
  }
  for (auto& c : comps) g.sort_by_label(c);
  return {std::move(comps), std::move(comp_of)};
}

/// Shortest undirected path from a to b (inclusive), assuming one exists.
VertexList undirected_path(const MixedGraph& g, Vertex a, Vertex b) {
  std::vector<Vertex> prev(g.size(), g.size());
  std::queue<Vertex> q;
  q.push(a);
  prev[a] = a;
  while (!q.empty()) {
    const Vertex v = q.front();
    q.pop();
    if (v == b) break;
    for (Vertex w : g.neighbors(v)) {
      if (prev[w] == g.size()) {
        prev[w] = v;
        q.push(w);
      }
    }
  }
  VertexList path;
  for (Vertex v = b;; v = prev[v]) {
    path.push_back(v);
    if (v == a) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// Builds the cycle a_0 -> b_0 -- ... -- a_1 -> b_1 -- ... -> b_k = a_0.
SemiDirectedCycle expand_cycle(const MixedGraph& g, const std::vector<std::pair<Vertex, Vertex>>& arcs) {
  SemiDirectedCycle cycle;
  cycle.path.push_back(arcs.front().first);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const auto [from, to] = arcs[i];
    cycle.path.push_back(to);
    cycle.step_directed.push_back(true);
    const Vertex next_tail = arcs[(i + 1) % arcs.size()].first;
    const VertexList link = undirected_path(g, to, next_tail);
    for (std::size_t k = 1; k < link.size(); ++k) {
      cycle.path.push_back(link[k]);
      cycle.step_directed.push_back(false);
    }
  }
  return cycle;
}

}  // namespace

MixedGraph MixedGraph::create(std::vector<std::string> vertices, const std::vector<LabelPair>& directed,
                              const std::vector<LabelPair>& undirected) {
  MixedGraph g;
  g.labels_ = std::move(vertices);
  const std::size_t n = g.labels_.size();
  for (Vertex v = 0; v < n; ++v) {
    if (g.labels_[v].empty()) throw StructuralError("empty vertex label");
    if (!g.index_.emplace(g.labels_[v], v).second) {
      throw StructuralError("duplicate vertex '" + g.labels_[v] + "'");
    }
  }
  g.kind_.assign(n, std::vector<char>(n, kNone));
  g.parents_.assign(n, {});
  g.neighbors_.assign(n, {});

  auto describe = [](const LabelPair& e, const char* arrow) { return e.first + " " + arrow + " " + e.second; };
  auto add = [&](const LabelPair& e, bool is_directed) {
    const char* arrow = is_directed ? "->" : "--";
    const Vertex u = g.index(e.first);
    const Vertex v = g.index(e.second);
    if (u == v) throw StructuralError("self-loop " + describe(e, arrow));
    if (g.kind_[u][v] != kNone) {
      throw StructuralError("edge " + describe(e, arrow) + " conflicts with an existing edge between " +
                            e.first + " and " + e.second);
    }
    if (is_directed) {
      g.kind_[u][v] = kForward;
      g.kind_[v][u] = kBackward;
      g.directed_.emplace_back(u, v);
      g.parents_[v].push_back(u);
    } else {
      g.kind_[u][v] = g.kind_[v][u] = kUndirected;
      g.undirected_.emplace_back(std::min(u, v), std::max(u, v));
      g.neighbors_[u].push_back(v);
      g.neighbors_[v].push_back(u);
    }
  };
  for (const auto& e : directed) add(e, true);
  for (const auto& e : undirected) add(e, false);

  std::sort(g.directed_.begin(), g.directed_.end());
  std::sort(g.undirected_.begin(), g.undirected_.end());
  for (Vertex v = 0; v < n; ++v) {
    g.sort_by_label(g.parents_[v]);
    g.sort_by_label(g.neighbors_[v]);
  }
  return g;
}

std::optional<Vertex> MixedGraph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vertex MixedGraph::index(std::string_view label) const {
  if (auto v = find(label)) return *v;
  throw StructuralError("unknown vertex '" + std::string(label) + "'");
}

bool MixedGraph::has_directed(Vertex from, Vertex to) const { return kind_.at(from).at(to) == kForward; }

bool MixedGraph::has_undirected(Vertex u, Vertex v) const { return kind_.at(u).at(v) == kUndirected; }

void MixedGraph::sort_by_label(VertexList& vs) const {
  std::sort(vs.begin(), vs.end(), [this](Vertex a, Vertex b) { return labels_[a] < labels_[b]; });
}

std::string SemiDirectedCycle::describe(const MixedGraph& g) const {
  std::ostringstream os;
  os << g.label(path.front());
  for (std::size_t i = 0; i < step_directed.size(); ++i) {
    os << (step_directed[i] ? " -> " : " -- ") << g.label(path[i + 1]);
  }
  return os.str();
}

ValidationResult validate_chain_graph(const MixedGraph& g) {
  const auto [comps, comp_of] = undirected_components(g);

  // A directed edge inside an undirected-connected set closes a cycle at once.
  for (auto [u, v] : g.directed_edges()) {
    if (comp_of[u] == comp_of[v]) {
      auto cycle = expand_cycle(g, {{u, v}});
      std::string msg = "semi-directed cycle: " + cycle.describe(g);
      return {std::move(cycle), std::move(msg)};
    }
  }

  // Quotient digraph, keeping one witness arc per component pair.
  const std::size_t k = comps.size();
  std::vector<std::vector<std::pair<std::size_t, std::pair<Vertex, Vertex>>>> out(k);
  for (auto [u, v] : g.directed_edges()) out[comp_of[u]].push_back({comp_of[v], {u, v}});

  enum Color : char { white, gray, black };
  std::vector<Color> color(k, white);
  std::vector<std::pair<Vertex, Vertex>> arc_stack;
  std::vector<std::size_t> comp_stack;
  std::optional<std::vector<std::pair<Vertex, Vertex>>> found;

  std::function<void(std::size_t)> dfs = [&](std::size_t c) {
    color[c] = gray;
    comp_stack.push_back(c);
    for (const auto& [next, arc] : out[c]) {
      if (found) return;
      if (color[next] == gray) {
        // cycle: comp_stack from `next` to c, closed by arc
        auto pos = std::find(comp_stack.begin(), comp_stack.end(), next) - comp_stack.begin();
        std::vector<std::pair<Vertex, Vertex>> arcs(arc_stack.begin() + pos, arc_stack.end());
        arcs.push_back(arc);
        found = std::move(arcs);
        return;
      }
      if (color[next] == white) {
        arc_stack.push_back(arc);
        dfs(next);
        arc_stack.pop_back();
      }
    }
    comp_stack.pop_back();
    color[c] = black;
  };
  for (std::size_t c = 0; c < k && !found; ++c) {
    if (color[c] == white) dfs(c);
  }
  if (found) {
    auto cycle = expand_cycle(g, *found);
    std::string msg = "semi-directed cycle: " + cycle.describe(g);
    return {std::move(cycle), std::move(msg)};
  }
  return {std::nullopt, "ok"};
}

ChainDecomposition chain_components(const MixedGraph& g) {
  if (auto res = validate_chain_graph(g); !res.ok()) throw ChainGraphError(res.message);

  auto [comps, comp_of] = undirected_components(g);
  const std::size_t k = comps.size();
  std::vector<std::set<std::size_t>> succ(k);
  std::vector<std::size_t> indegree(k, 0);
  for (auto [u, v] : g.directed_edges()) {
    if (succ[comp_of[u]].insert(comp_of[v]).second) ++indegree[comp_of[v]];
  }

  // Kahn's algorithm; ready components ordered by their smallest label.
  auto later = [&](std::size_t a, std::size_t b) { return g.label(comps[a].front()) > g.label(comps[b].front()); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t c = 0; c < k; ++c) {
    if (indegree[c] == 0) ready.push(c);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t c = ready.top();
    ready.pop();
    order.push_back(c);
    for (std::size_t d : succ[c]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }

  ChainDecomposition dec;
  dec.component_of.assign(g.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const VertexList& members = comps[order[pos]];
    std::set<Vertex> parents;
    for (Vertex v : members) {
      dec.component_of[v] = pos;
      parents.insert(g.parents(v).begin(), g.parents(v).end());
    }
    VertexList pa(parents.begin(), parents.end());
    g.sort_by_label(pa);
    dec.components.push_back(members);
    dec.parent_sets.push_back(std::move(pa));
  }
  return dec;
}

ChainGraph::ChainGraph(MixedGraph g) : graph_(std::move(g)), decomposition_(chain_components(graph_)) {}

std::size_t ChainGraph::component_index(const VertexList& tau) const {
  VertexList sorted = tau;
  graph_.sort_by_label(sorted);
  for (std::size_t i = 0; i < decomposition_.components.size(); ++i) {
    if (decomposition_.components[i] == sorted) return i;
  }
  throw StructuralError("vertex set is not a chain component");
}

namespace {

Adjacency induced_adjacency(const MixedGraph& g, const VertexList& tau) {
  Adjacency adj = empty_adjacency(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    for (std::size_t j = 0; j < tau.size(); ++j) {
      if (i != j && g.has_undirected(tau[i], tau[j])) adj[i][j] = true;
    }
  }
  return adj;
}

}  // namespace

std::vector<VertexList> maximal_cliques(const ChainGraph& g, const VertexList& tau) {
  const VertexList& members = g.component(g.component_index(tau));
  std::vector<VertexList> cliques;
  for (const auto& local : maximal_cliques(induced_adjacency(g.graph(), members))) {
    VertexList c;
    for (std::size_t i : local) c.push_back(members[i]);
    cliques.push_back(std::move(c));
  }
  // members are label-sorted, so local index order is label order already
  std::sort(cliques.begin(), cliques.end(), [&](const VertexList& a, const VertexList& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&](Vertex x, Vertex y) {
      return g.graph().label(x) < g.graph().label(y);
    });
  });
  return cliques;
}

bool is_decomposable(const ChainGraph& g, const VertexList& tau) {
  const VertexList& members = g.component(g.component_index(tau));
  return is_chordal(induced_adjacency(g.graph(), members));
}

}  // namespace ampcg
