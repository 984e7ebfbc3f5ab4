// Test-side helpers: random instances and oracles that do not share code paths
// with the library's estimators.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ampcg/fit.hpp"
#include "ampcg/graph.hpp"
#include "ampcg/ipf.hpp"
#include "ampcg/likelihood.hpp"
#include "ampcg/param.hpp"
#include "ampcg/sim.hpp"
#include "ampcg/undirected.hpp"

namespace testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// Random chain graph on `size` vertices. Vertices are split into consecutive
/// blocks, each block gets a random spanning tree plus extra edges, and
/// directed edges only run from earlier to later blocks. Labels are shuffled
/// against the block order so label sorting is exercised.
inline ampcg::ChainGraph random_chain_graph(Rng& rng, std::size_t size, double extra_edge = 0.4,
                                            double arrow = 0.5) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < size; ++i) labels.push_back("x" + std::to_string(i));
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<std::size_t> block(size);
  std::size_t b = 0;
  for (std::size_t i = 0; i < size; ++i) {
    if (i > 0 && coin(rng, 0.45)) ++b;
    block[i] = b;
  }

  std::vector<ampcg::LabelPair> directed, undirected;
  for (std::size_t i = 1; i < size; ++i) {
    std::vector<std::size_t> same;
    for (std::size_t j = 0; j < i; ++j)
      if (block[j] == block[i]) same.push_back(j);
    if (!same.empty()) {
      const std::size_t tree = same[std::uniform_int_distribution<std::size_t>(0, same.size() - 1)(rng)];
      for (std::size_t j : same) {
        if (j == tree || coin(rng, extra_edge)) undirected.emplace_back(labels[j], labels[i]);
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (block[j] < block[i] && coin(rng, arrow)) directed.emplace_back(labels[j], labels[i]);
    }
  }
  return ampcg::ChainGraph(ampcg::MixedGraph::create(labels, directed, undirected));
}

/// Random theta in the parameter space: uniform regression coefficients and a
/// strictly diagonally dominant Omega on the component's edge pattern.
inline ampcg::ModelParameter random_theta(Rng& rng, const ampcg::ChainGraph& g, double beta_scale = 1.0) {
  ampcg::ModelParameter theta;
  for (const auto& maps : ampcg::build_indicator_maps(g)) {
    ampcg::BlockParameter blk;
    blk.component = maps.component;
    blk.beta.resize(static_cast<Eigen::Index>(maps.p()));
    for (Eigen::Index k = 0; k < blk.beta.size(); ++k) blk.beta(k) = uniform(rng, -beta_scale, beta_scale);

    MatrixXd om = MatrixXd::Zero(maps.tau_size(), maps.tau_size());
    for (auto [i, j] : maps.omega_entries) {
      if (i != j) om(i, j) = om(j, i) = uniform(rng, -0.6, 0.6);
    }
    for (std::size_t i = 0; i < maps.tau_size(); ++i) om(i, i) = om.row(i).cwiseAbs().sum() + uniform(rng, 0.3, 1.5);
    blk.omega.resize(static_cast<Eigen::Index>(maps.q()));
    for (std::size_t k = 0; k < maps.q(); ++k) {
      blk.omega(static_cast<Eigen::Index>(k)) = om(maps.omega_entries[k].first, maps.omega_entries[k].second);
    }
    theta.blocks.push_back(std::move(blk));
  }
  return theta;
}

/// Wishart-type random covariance X X' / m with m >= d.
inline MatrixXd random_covariance(Rng& rng, std::size_t d, std::size_t m) {
  std::normal_distribution<double> normal;
  MatrixXd x(d, m);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = normal(rng);
  MatrixXd mix = MatrixXd::Identity(d, d);
  for (Eigen::Index i = 0; i < mix.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) mix(i, j) = uniform(rng, -0.8, 0.8);
  x = mix * x;
  return x * x.transpose() / static_cast<double>(m);
}

inline MatrixXd gaussian_data(Rng& rng, const MatrixXd& sigma, std::size_t n) {
  std::normal_distribution<double> normal;
  const MatrixXd l = sigma.llt().matrixL();
  MatrixXd z(sigma.rows(), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  return l * z;
}

// ---------------------------------------------------------------------------
// finite differences

using ScalarFn = std::function<double(const VectorXd&)>;

inline VectorXd fd_gradient(const ScalarFn& f, const VectorXd& x, double h = 1e-5) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

inline MatrixXd fd_hessian(const ScalarFn& f, const VectorXd& x, double h = 1e-4) {
  const Eigen::Index d = x.size();
  MatrixXd hs(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      auto at = [&](double si, double sj) {
        VectorXd y = x;
        y(i) += si * h;
        y(j) += sj * h;
        return f(y);
      };
      hs(i, j) = hs(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
    }
  }
  return hs;
}

/// max |a - b| / max(1, max |b|)
inline double rel_err(const MatrixXd& a, const MatrixXd& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------------------
// block log-likelihood straight from its definition on raw observations

/// 1/2 log|Omega| - 1/(2n) sum_i r_i' Omega r_i with r_i = x_tau,i - B x_pa,i.
inline double raw_block_loglik(const MatrixXd& x, const ampcg::IndicatorMap& maps, const MatrixXd& b,
                               const MatrixXd& omega) {
  double quad = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    VectorXd r(maps.tau_size());
    for (std::size_t u = 0; u < maps.tau_size(); ++u) r(u) = x(maps.vertices[u], i);
    for (std::size_t u = 0; u < maps.tau_size(); ++u)
      for (std::size_t v = 0; v < maps.parent_size(); ++v) r(u) -= b(u, v) * x(maps.parents[v], i);
    quad += r.dot(omega * r);
  }
  double logdet = 0.0;
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(omega);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) logdet += std::log(es.eigenvalues()(k));
  return 0.5 * logdet - 0.5 * quad / static_cast<double>(x.cols());
}

/// Sum of multivariate normal log densities of the columns of x under Sigma.
inline double gaussian_log_density(const MatrixXd& x, const MatrixXd& sigma) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
  double logdet = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) logdet += std::log(es.eigenvalues()(k));
  const MatrixXd inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  double total = 0.0;
  const double d = static_cast<double>(sigma.rows());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    total += -0.5 * (d * std::log(2 * M_PI) + logdet + x.col(i).dot(inv * x.col(i)));
  }
  return total;
}

// ---------------------------------------------------------------------------
// GLS by whitened least squares on raw observations

/// argmin_beta sum_i |Omega^{1/2}(x_tau,i - B(beta) x_pa,i)|^2, solved by QR on
/// the stacked design (no normal equations).
inline VectorXd gls_least_squares(const MatrixXd& x, const ampcg::IndicatorMap& maps, const MatrixXd& omega) {
  const auto t = static_cast<Eigen::Index>(maps.tau_size());
  const MatrixXd w = omega.llt().matrixU();  // Omega = W' W
  const Eigen::Index n = x.cols();
  MatrixXd design = MatrixXd::Zero(n * t, static_cast<Eigen::Index>(maps.p()));
  VectorXd response(n * t);
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd y(t);
    for (Eigen::Index u = 0; u < t; ++u) y(u) = x(maps.vertices[u], i);
    MatrixXd local = MatrixXd::Zero(t, static_cast<Eigen::Index>(maps.p()));
    for (std::size_t k = 0; k < maps.p(); ++k) {
      auto [u, v] = maps.beta_entries[k];
      local(u, k) = x(maps.parents[v], i);
    }
    design.middleRows(i * t, t) = w * local;
    response.segment(i * t, t) = w * y;
  }
  return design.colPivHouseholderQr().solve(response);
}

// ---------------------------------------------------------------------------
// constrained Gaussian MLE by Newton's method over the free entries of K

struct FreeEntry {
  std::size_t u, v;
};

inline std::vector<FreeEntry> free_entries(std::size_t d, const std::vector<ampcg::Clique>& cliques) {
  std::vector<std::vector<bool>> on(d, std::vector<bool>(d, false));
  for (const auto& c : cliques)
    for (auto a : c)
      for (auto b : c) on[a][b] = true;
  std::vector<FreeEntry> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back({i, i});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (on[i][j]) out.push_back({i, j});
  return out;
}

/// Damped Newton ascent on 1/2 log|K| - 1/2 tr(K T) with K restricted to the
/// clique pattern, starting from diag(1/T_vv). Gradient entries are
/// (Sigma - T)_uv for off-diagonal and (Sigma - T)_uu / 2 for diagonal
/// coordinates; the Hessian is -1/2 tr(Sigma E_e Sigma E_f).
inline MatrixXd newton_constrained_mle(const MatrixXd& target, const std::vector<ampcg::Clique>& cliques,
                                       int max_iter = 200) {
  const auto d = static_cast<std::size_t>(target.rows());
  const auto entries = free_entries(d, cliques);
  const auto m = static_cast<Eigen::Index>(entries.size());
  auto objective = [&](const MatrixXd& k) {
    Eigen::LLT<MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < k.rows(); ++i) logdet += 2 * std::log(llt.matrixL()(i, i));
    return 0.5 * logdet - 0.5 * (k * target).trace();
  };
  auto basis = [&](const FreeEntry& e) {
    MatrixXd eb = MatrixXd::Zero(d, d);
    eb(e.u, e.v) = 1.0;
    eb(e.v, e.u) = 1.0;
    return eb;
  };

  MatrixXd k = target.diagonal().cwiseInverse().asDiagonal();
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd sigma = k.inverse();
    VectorXd grad(m);
    MatrixXd hess(m, m);
    std::vector<MatrixXd> se(entries.size());
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto& e = entries[a];
      grad(a) = e.u == e.v ? 0.5 * (sigma(e.u, e.u) - target(e.u, e.u)) : sigma(e.u, e.v) - target(e.u, e.v);
      se[a] = sigma * basis(e);
    }
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) hess(a, b) = -0.5 * (se[a] * se[b]).trace();
    if (grad.cwiseAbs().maxCoeff() < 1e-14) break;
    const VectorXd step = (-hess).llt().solve(grad);
    const double f0 = objective(k);
    double t = 1.0;
    for (; t > 1e-12; t *= 0.5) {
      MatrixXd trial = k;
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto& e = entries[a];
        trial(e.u, e.v) += t * step(a);
        if (e.u != e.v) trial(e.v, e.u) += t * step(a);
      }
      if (objective(trial) >= f0) {
        k = trial;
        break;
      }
    }
    if (t <= 1e-12) break;
  }
  return k;
}

/// Random symmetric pattern over d vertices as its maximal cliques.
inline std::vector<ampcg::Clique> random_pattern(Rng& rng, std::size_t d, double p) {
  ampcg::Adjacency adj = ampcg::empty_adjacency(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (coin(rng, p)) adj[i][j] = adj[j][i] = true;
  return ampcg::maximal_cliques(adj);
}

// ---------------------------------------------------------------------------
// the eight-variable university example

inline ampcg::ChainGraph university_graph() {
  return ampcg::ChainGraph(ampcg::MixedGraph::create(
      {"spend", "strat", "salar", "top10", "tstsc", "rejr", "pacc", "apgra"},
      {{"spend", "top10"},
       {"spend", "tstsc"},
       {"spend", "rejr"},
       {"salar", "tstsc"},
       {"salar", "rejr"},
       {"salar", "pacc"},
       {"salar", "apgra"},
       {"strat", "top10"},
       {"tstsc", "apgra"},
       {"pacc", "apgra"}},
      {{"spend", "salar"},
       {"spend", "strat"},
       {"salar", "strat"},
       {"top10", "tstsc"},
       {"tstsc", "rejr"},
       {"rejr", "pacc"},
       {"top10", "pacc"}}));
}

/// Simulation truth for the university graph: the published MLE for the
/// four-vertex component, chosen values elsewhere.
inline ampcg::ModelParameter university_theta() {
  ampcg::ModelParameter theta;
  // {salar, spend, strat}, complete: diagonals then (salar,spend), (salar,strat), (spend,strat)
  theta.blocks.push_back({0, VectorXd(0), (VectorXd(6) << 2.2, 2.6, 1.8, -0.9, -0.4, -0.8).finished()});
  // {pacc, rejr, top10, tstsc} on parents {salar, spend, strat}
  theta.blocks.push_back({1,
                          (VectorXd(7) << -0.53, 0.26, 0.30, 0.98, 0.44, 0.26, 0.49).finished(),
                          (VectorXd(8) << 1.46, 1.64, 2.99, 3.39, -0.33, -0.16, -0.65, -1.76).finished()});
  // {apgra} on parents {pacc, salar, tstsc}
  theta.blocks.push_back({2, (VectorXd(3) << 0.25, 0.30, 0.20).finished(), (VectorXd(1) << 1.8).finished()});
  return theta;
}

}  // namespace testing
