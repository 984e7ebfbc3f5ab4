#include "ampcg/undirected.hpp"

#include <algorithm>

namespace ampcg {

Adjacency empty_adjacency(std::size_t n) {
  return Adjacency(n, std::vector<bool>(n, false));
}

namespace {

using Set = std::vector<std::size_t>;

void bron_kerbosch(const Adjacency& adj, Set& r, Set p, Set x, std::vector<Set>& out) {
  if (p.empty() && x.empty()) {
    Set clique = r;
    std::sort(clique.begin(), clique.end());
    out.push_back(std::move(clique));
    return;
  }
  // pivot: vertex of P u X with most neighbours in P
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const Set* s : {&p, &x}) {
    for (std::size_t u : *s) {
      std::size_t count = std::count_if(p.begin(), p.end(), [&](std::size_t w) { return adj[u][w]; });
      if (count >= best) {
        best = count;
        pivot = u;
      }
    }
  }
  Set candidates;
  for (std::size_t v : p) {
    if (!adj[pivot][v]) candidates.push_back(v);
  }
  for (std::size_t v : candidates) {
    Set p_next, x_next;
    for (std::size_t w : p) {
      if (adj[v][w]) p_next.push_back(w);
    }
    for (std::size_t w : x) {
      if (adj[v][w]) x_next.push_back(w);
    }
    r.push_back(v);
    bron_kerbosch(adj, r, std::move(p_next), std::move(x_next), out);
    r.pop_back();
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> maximal_cliques(const Adjacency& adj) {
  std::vector<Set> out;
  if (adj.empty()) return out;
  Set r;
  Set p(adj.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
  bron_kerbosch(adj, r, std::move(p), {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> maximum_cardinality_search(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> weight(n, 0);
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!visited[v] && (pick == n || weight[v] > weight[pick])) pick = v;
    }
    visited[pick] = true;
    order.push_back(pick);
    for (std::size_t w = 0; w < n; ++w) {
      if (adj[pick][w] && !visited[w]) ++weight[w];
    }
  }
  return order;
}

bool is_chordal(const Adjacency& adj) {
  // In MCS order, the already-visited neighbours of every vertex must form a clique.
  const auto order = maximum_cardinality_search(adj);
  std::vector<std::size_t> position(adj.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t v = order[i];
    std::vector<std::size_t> earlier;
    for (std::size_t w = 0; w < adj.size(); ++w) {
      if (adj[v][w] && position[w] < i) earlier.push_back(w);
    }
    for (std::size_t a = 0; a < earlier.size(); ++a) {
      for (std::size_t b = a + 1; b < earlier.size(); ++b) {
        if (!adj[earlier[a]][earlier[b]]) return false;
      }
    }
  }
  return true;
}

Adjacency adjacency_from_cliques(std::size_t n, const std::vector<std::vector<std::size_t>>& cliques) {
  Adjacency adj = empty_adjacency(n);
  for (const auto& c : cliques) {
    for (std::size_t a : c) {
      for (std::size_t b : c) {
        if (a != b) adj[a][b] = true;
      }
    }
  }
  return adj;
}

}  // namespace ampcg
