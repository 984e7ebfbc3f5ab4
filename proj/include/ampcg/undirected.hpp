#pragma once

#include <cstddef>
#include <vector>

namespace ampcg {

/// Dense symmetric adjacency over vertices 0..n-1 (no self-loops).
using Adjacency = std::vector<std::vector<bool>>;

Adjacency empty_adjacency(std::size_t n);

/// Maximal cliques (Bron-Kerbosch with pivoting). Each clique is sorted
/// ascending; the list is sorted lexicographically.
std::vector<std::vector<std::size_t>> maximal_cliques(const Adjacency& adj);

/// Maximum cardinality search order (first visited first).
std::vector<std::size_t> maximum_cardinality_search(const Adjacency& adj);

/// Chordality test: the reverse MCS order must be a perfect elimination order.
bool is_chordal(const Adjacency& adj);

/// Adjacency implied by a list of cliques over n vertices.
Adjacency adjacency_from_cliques(std::size_t n,
                                 const std::vector<std::vector<std::size_t>>& cliques);

}  // namespace ampcg
