#include "ampcg/ipf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ampcg/error.hpp"
#include "ampcg/undirected.hpp"

namespace ampcg {

using Eigen::MatrixXd;

namespace {

using Index = std::vector<Eigen::Index>;

Index to_index(const std::vector<std::size_t>& v) { return Index(v.begin(), v.end()); }

Index complement(std::size_t n, const Clique& c) {
  std::vector<bool> in(n, false);
  for (std::size_t v : c) in[v] = true;
  Index r;
  for (std::size_t v = 0; v < n; ++v) {
    if (!in[v]) r.push_back(static_cast<Eigen::Index>(v));
  }
  return r;
}

MatrixXd inverse_spd(const MatrixXd& m) {
  const Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

void check_cliques(std::size_t n, const std::vector<Clique>& cliques) {
  std::vector<bool> covered(n, false);
  for (const auto& c : cliques) {
    if (c.empty()) throw DomainError("empty clique");
    for (std::size_t v : c) {
      if (v >= n) throw DomainError("clique refers to a vertex outside the target");
      covered[v] = true;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw DomainError("cliques do not cover every vertex");
  }
}

// Rounding floor of the gap: with large variances an absolute tolerance of
// 1e-10 can sit below what double precision resolves.
double precision_floor(const MatrixXd& target) {
  return 64.0 * std::numeric_limits<double>::epsilon() * target.diagonal().maxCoeff();
}

}  // namespace

double gaussian_loglik(const MatrixXd& concentration, const MatrixXd& target) {
  const Eigen::LLT<MatrixXd> llt(concentration);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * log_det - 0.5 * concentration.cwiseProduct(target).sum();
}

double ipf_gap(const MatrixXd& concentration, const MatrixXd& target, const std::vector<Clique>& cliques) {
  const MatrixXd sigma = inverse_spd(concentration);
  double gap = 0.0;
  for (const auto& c : cliques) {
    for (std::size_t a : c) {
      for (std::size_t b : c) gap = std::max(gap, std::abs(sigma(a, b) - target(a, b)));
    }
  }
  return gap;
}

IpfResult ipf_fit(const MatrixXd& target, const std::vector<Clique>& cliques, const IpfConfig& cfg,
                  const std::optional<MatrixXd>& start) {
  if (cfg.tolerance <= 0.0 || cfg.max_iterations < 1) throw DomainError("invalid IPF configuration");
  const auto n = static_cast<std::size_t>(target.rows());
  if (target.rows() != target.cols()) throw DomainError("IPF target is not square");
  if (target.llt().info() != Eigen::Success) throw DomainError("IPF target is not positive definite");
  check_cliques(n, cliques);

  // Per-clique constants: index sets and (target_cc)^{-1}.
  std::vector<Index> c_idx, r_idx;
  std::vector<MatrixXd> marginal_inverse;
  for (const auto& c : cliques) {
    c_idx.push_back(to_index(c));
    r_idx.push_back(complement(n, c));
    marginal_inverse.push_back(inverse_spd(target(c_idx.back(), c_idx.back())));
  }

  IpfResult res;
  if (start) {
    res.concentration = *start;
  } else {
    res.concentration = target.diagonal().cwiseInverse().asDiagonal();
  }
  MatrixXd& k = res.concentration;

  for (res.iterations = 1; res.iterations <= cfg.max_iterations; ++res.iterations) {
    for (std::size_t i = 0; i < cliques.size(); ++i) {
      const Index& c = c_idx[i];
      const Index& r = r_idx[i];
      if (r.empty()) {
        k(c, c) = marginal_inverse[i];
        continue;
      }
      const MatrixXd k_cr = k(c, r);
      const MatrixXd k_rr = k(r, r);
      MatrixXd update = marginal_inverse[i] + k_cr * k_rr.llt().solve(k_cr.transpose());
      k(c, c) = 0.5 * (update + update.transpose());
    }
    res.final_gap = ipf_gap(k, target, cliques);
    if (res.final_gap <= std::max(cfg.tolerance, precision_floor(target))) {
      res.converged = true;
      return res;
    }
  }
  res.iterations = cfg.max_iterations;
  return res;
}

std::optional<MatrixXd> ipf_closed_form_check(const MatrixXd& target, const std::vector<Clique>& cliques) {
  const auto n = static_cast<std::size_t>(target.rows());
  check_cliques(n, cliques);
  const Adjacency adj = adjacency_from_cliques(n, cliques);
  if (!is_chordal(adj)) return std::nullopt;

  // The given cliques need not be maximal; the formula needs the maximal ones.
  const auto maxc = maximal_cliques(adj);
  const std::size_t m = maxc.size();
  if (m == 0) return MatrixXd::Zero(n, n);

  auto intersection = [&](std::size_t a, std::size_t b) {
    Clique out;
    std::set_intersection(maxc[a].begin(), maxc[a].end(), maxc[b].begin(), maxc[b].end(), std::back_inserter(out));
    return out;
  };

  MatrixXd k = MatrixXd::Zero(n, n);
  auto add_block = [&](const Clique& c, double sign) {
    const Index idx = to_index(c);
    k(idx, idx) += sign * inverse_spd(target(idx, idx));
  };
  for (const auto& c : maxc) add_block(c, 1.0);

  // Junction tree = maximum-weight spanning tree of the clique graph (Prim).
  std::vector<bool> in_tree(m, false);
  std::vector<long> best(m, -1);
  std::vector<std::size_t> link(m, 0);
  in_tree[0] = true;
  for (std::size_t j = 1; j < m; ++j) {
    best[j] = static_cast<long>(intersection(0, j).size());
    link[j] = 0;
  }
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t pick = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_tree[j] && (pick == m || best[j] > best[pick])) pick = j;
    }
    in_tree[pick] = true;
    const Clique sep = intersection(pick, link[pick]);
    if (!sep.empty()) add_block(sep, -1.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (in_tree[j]) continue;
      const auto w = static_cast<long>(intersection(pick, j).size());
      if (w > best[j]) {
        best[j] = w;
        link[j] = pick;
      }
    }
  }
  return k;
}

}  // namespace ampcg
