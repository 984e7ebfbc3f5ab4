#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ampcg {

/// Vertex index into the fixed vertex order of a MixedGraph.
using Vertex = std::size_t;
using VertexList = std::vector<Vertex>;
using LabelPair = std::pair<std::string, std::string>;

/// A graph with directed (u -> v) and undirected (u -- v) edges over labelled
/// vertices. The vertex order given at construction fixes the row/column order
/// of every matrix indexed by V. Immutable once created.
class MixedGraph {
 public:
  /// Throws StructuralError on unknown or duplicate vertices, self-loops, and
  /// duplicate or conflicting edges between the same pair.
  static MixedGraph create(std::vector<std::string> vertices,
                           const std::vector<LabelPair>& directed,
                           const std::vector<LabelPair>& undirected);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(Vertex v) const { return labels_.at(v); }
  std::optional<Vertex> find(std::string_view label) const;
  /// Throws StructuralError for an unknown label.
  Vertex index(std::string_view label) const;

  /// Directed edges (from, to), sorted by vertex index.
  const std::vector<std::pair<Vertex, Vertex>>& directed_edges() const { return directed_; }
  /// Undirected edges (u, v) with u < v, sorted by vertex index.
  const std::vector<std::pair<Vertex, Vertex>>& undirected_edges() const { return undirected_; }

  bool has_directed(Vertex from, Vertex to) const;
  bool has_undirected(Vertex u, Vertex v) const;

  /// pa(v), sorted by label.
  const VertexList& parents(Vertex v) const { return parents_.at(v); }
  /// Undirected neighbours of v, sorted by label.
  const VertexList& neighbors(Vertex v) const { return neighbors_.at(v); }

  /// Sorts vertices by label (the parameter ordering convention).
  void sort_by_label(VertexList& vs) const;

 private:
  MixedGraph() = default;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, Vertex> index_;
  std::vector<std::pair<Vertex, Vertex>> directed_;
  std::vector<std::pair<Vertex, Vertex>> undirected_;
  std::vector<VertexList> parents_;
  std::vector<VertexList> neighbors_;
  std::vector<std::vector<char>> kind_;  // 0 none, 1 u->v, 2 v->u, 3 undirected
};

/// One semi-directed cycle: path[0] -> ... -> path.back() == path[0].
/// step_directed[i] tells whether the step path[i] to path[i+1] is directed.
struct SemiDirectedCycle {
  VertexList path;
  std::vector<bool> step_directed;

  std::string describe(const MixedGraph& g) const;
};

struct ValidationResult {
  std::optional<SemiDirectedCycle> cycle;
  std::string message;

  bool ok() const { return !cycle.has_value(); }
};

/// Checks the chain-graph property (no semi-directed cycle) by contracting
/// undirected-connected components and cycle-checking the quotient digraph.
ValidationResult validate_chain_graph(const MixedGraph& g);

/// Chain components in a topological order, ties broken by smallest member
/// label. Members and parent sets are sorted by label.
struct ChainDecomposition {
  std::vector<VertexList> components;
  std::vector<VertexList> parent_sets;
  std::vector<std::size_t> component_of;  // per vertex
};

/// Throws ChainGraphError if g has a semi-directed cycle.
ChainDecomposition chain_components(const MixedGraph& g);

/// A mixed graph that has passed validation, together with its decomposition.
class ChainGraph {
 public:
  explicit ChainGraph(MixedGraph g);

  const MixedGraph& graph() const { return graph_; }
  const ChainDecomposition& decomposition() const { return decomposition_; }
  std::size_t size() const { return graph_.size(); }
  std::size_t component_count() const { return decomposition_.components.size(); }
  const VertexList& component(std::size_t i) const { return decomposition_.components.at(i); }
  const VertexList& parents_of_component(std::size_t i) const { return decomposition_.parent_sets.at(i); }

  /// Index of the component equal to tau (as a set); throws StructuralError otherwise.
  std::size_t component_index(const VertexList& tau) const;

 private:
  MixedGraph graph_;
  ChainDecomposition decomposition_;
};

/// Maximal cliques of the undirected subgraph induced by the component tau.
/// Each clique sorted by label; cliques ordered lexicographically by labels.
std::vector<VertexList> maximal_cliques(const ChainGraph& g, const VertexList& tau);

/// True iff the undirected subgraph induced by tau is chordal.
bool is_decomposable(const ChainGraph& g, const VertexList& tau);

}  // namespace ampcg
