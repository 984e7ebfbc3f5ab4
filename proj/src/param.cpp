#include "ampcg/param.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ampcg/error.hpp"

namespace ampcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

IndicatorMap build_indicator_maps(const ChainGraph& g, std::size_t component) {
  const MixedGraph& mg = g.graph();
  IndicatorMap m;
  m.component = component;
  m.vertices = g.component(component);
  m.parents = g.parents_of_component(component);
  const std::size_t t = m.vertices.size();
  const std::size_t pa = m.parents.size();

  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < pa; ++j) {
      if (mg.has_directed(m.parents[j], m.vertices[i])) m.beta_entries.emplace_back(i, j);
    }
  }
  for (std::size_t i = 0; i < t; ++i) m.omega_entries.emplace_back(i, i);
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = i + 1; j < t; ++j) {
      if (mg.has_undirected(m.vertices[i], m.vertices[j])) m.omega_entries.emplace_back(i, j);
    }
  }

  m.p_map = MatrixXd::Zero(t * pa, m.p());
  for (std::size_t k = 0; k < m.p(); ++k) {
    const auto [i, j] = m.beta_entries[k];
    m.p_map(i + t * j, k) = 1.0;
  }
  m.q_map = MatrixXd::Zero(t * t, m.q());
  for (std::size_t k = 0; k < m.q(); ++k) {
    const auto [i, j] = m.omega_entries[k];
    m.q_map(i + t * j, k) = 1.0;
    m.q_map(j + t * i, k) = 1.0;
  }
  return m;
}

IndicatorMap build_indicator_maps(const ChainGraph& g, const VertexList& tau) {
  return build_indicator_maps(g, g.component_index(tau));
}

std::vector<IndicatorMap> build_indicator_maps(const ChainGraph& g) {
  std::vector<IndicatorMap> maps;
  maps.reserve(g.component_count());
  for (std::size_t c = 0; c < g.component_count(); ++c) maps.push_back(build_indicator_maps(g, c));
  return maps;
}

BlockMatrices assemble(const BlockParameter& block, const IndicatorMap& maps) {
  if (static_cast<std::size_t>(block.beta.size()) != maps.p() ||
      static_cast<std::size_t>(block.omega.size()) != maps.q()) {
    throw DomainError("parameter lengths do not match the component's edge structure");
  }
  BlockMatrices out;
  out.b = MatrixXd::Zero(maps.tau_size(), maps.parent_size());
  for (std::size_t k = 0; k < maps.p(); ++k) {
    const auto [i, j] = maps.beta_entries[k];
    out.b(i, j) = block.beta(k);
  }
  out.omega = MatrixXd::Zero(maps.tau_size(), maps.tau_size());
  for (std::size_t k = 0; k < maps.q(); ++k) {
    const auto [i, j] = maps.omega_entries[k];
    out.omega(i, j) = block.omega(k);
    out.omega(j, i) = block.omega(k);
  }
  out.positive_definite = out.omega.llt().info() == Eigen::Success;
  return out;
}

VectorXd beta_from_matrix(const MatrixXd& b, const IndicatorMap& maps) {
  VectorXd beta(maps.p());
  for (std::size_t k = 0; k < maps.p(); ++k) beta(k) = b(maps.beta_entries[k].first, maps.beta_entries[k].second);
  return beta;
}

VectorXd omega_from_matrix(const MatrixXd& omega, const IndicatorMap& maps) {
  VectorXd w(maps.q());
  for (std::size_t k = 0; k < maps.q(); ++k) w(k) = omega(maps.omega_entries[k].first, maps.omega_entries[k].second);
  return w;
}

void require_in_parameter_space(const BlockParameter& block, const IndicatorMap& maps) {
  if (!assemble(block, maps).positive_definite) {
    throw DomainError("concentration matrix of component " + std::to_string(maps.component) +
                      " is not positive definite");
  }
}

std::pair<MatrixXd, MatrixXd> full_matrices(const ChainGraph& g, const ModelParameter& theta) {
  if (theta.blocks.size() != g.component_count()) {
    throw DomainError("parameter has " + std::to_string(theta.blocks.size()) + " blocks, graph has " +
                      std::to_string(g.component_count()) + " components");
  }
  const std::size_t n = g.size();
  MatrixXd b = MatrixXd::Zero(n, n);
  MatrixXd omega = MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    const BlockMatrices m = assemble(theta.blocks[c], maps);
    if (!m.positive_definite) {
      throw DomainError("concentration matrix of component " + std::to_string(c) + " is not positive definite");
    }
    for (std::size_t i = 0; i < maps.tau_size(); ++i) {
      for (std::size_t j = 0; j < maps.parent_size(); ++j) b(maps.vertices[i], maps.parents[j]) = m.b(i, j);
      for (std::size_t j = 0; j < maps.tau_size(); ++j) omega(maps.vertices[i], maps.vertices[j]) = m.omega(i, j);
    }
  }
  return {std::move(b), std::move(omega)};
}

MatrixXd sigma_from_params(const ChainGraph& g, const ModelParameter& theta) {
  const auto [b, omega] = full_matrices(g, theta);
  const std::size_t n = g.size();
  const MatrixXd i_minus_b = MatrixXd::Identity(n, n) - b;
  // (I - B) is invertible because the chain graph has no directed cycle.
  const MatrixXd a = i_minus_b.partialPivLu().solve(MatrixXd::Identity(n, n));
  const MatrixXd omega_inv = omega.llt().solve(MatrixXd::Identity(n, n));
  MatrixXd sigma = a * omega_inv * a.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

MatrixXd precision_from_params(const ChainGraph& g, const ModelParameter& theta) {
  const auto [b, omega] = full_matrices(g, theta);
  const MatrixXd i_minus_b = MatrixXd::Identity(g.size(), g.size()) - b;
  return i_minus_b.transpose() * omega * i_minus_b;
}

namespace {

MatrixXd submatrix(const MatrixXd& m, const VertexList& rows, const VertexList& cols) {
  MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

}  // namespace

ModelParameter identify_params(const MatrixXd& sigma, const ChainGraph& g, double tolerance) {
  const MixedGraph& mg = g.graph();
  const std::size_t n = g.size();
  if (static_cast<std::size_t>(sigma.rows()) != n || static_cast<std::size_t>(sigma.cols()) != n) {
    throw DomainError("covariance dimension does not match the graph");
  }
  if (n == 0) return {};
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > tolerance * scale) {
    throw DomainError("covariance matrix is not symmetric");
  }
  if (sigma.llt().info() != Eigen::Success) throw DomainError("covariance matrix is not positive definite");

  MatrixXd b = MatrixXd::Zero(n, n);
  for (Vertex v = 0; v < n; ++v) {
    const VertexList& pa = mg.parents(v);
    if (pa.empty()) continue;
    const MatrixXd s_pp = submatrix(sigma, pa, pa);
    const Eigen::LLT<MatrixXd> llt(s_pp);
    if (llt.info() != Eigen::Success) {
      throw RankError("covariance of the parents of '" + mg.label(v) + "' is singular");
    }
    const Eigen::VectorXd row = llt.solve(submatrix(sigma, pa, {v}).col(0));
    for (std::size_t j = 0; j < pa.size(); ++j) b(v, pa[j]) = row(j);
  }

  const MatrixXd i_minus_b = MatrixXd::Identity(n, n) - b;
  const MatrixXd resid = i_minus_b * sigma * i_minus_b.transpose();

  ModelParameter theta;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    const MatrixXd r_tt = submatrix(resid, maps.vertices, maps.vertices);
    const MatrixXd omega = r_tt.llt().solve(MatrixXd::Identity(maps.tau_size(), maps.tau_size()));
    BlockParameter block;
    block.component = c;
    block.beta = beta_from_matrix(submatrix(b, maps.vertices, maps.parents), maps);
    block.omega = omega_from_matrix(omega, maps);
    theta.blocks.push_back(std::move(block));
  }

  // Membership: theta must reproduce sigma. This catches zero-pattern
  // violations in Omega as well as in the cross-component covariances.
  const MatrixXd rebuilt = sigma_from_params(g, theta);
  std::ostringstream bad;
  std::size_t count = 0;
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u; v < n; ++v) {
      const double diff = std::abs(rebuilt(u, v) - sigma(u, v));
      if (diff > tolerance * scale) {
        if (count < 10) bad << " (" << mg.label(u) << "," << mg.label(v) << "): " << diff << ";";
        ++count;
      }
    }
  }
  if (count > 0) {
    throw DomainError("covariance is not in the model; " + std::to_string(count) +
                      " entries deviate from the reconstruction:" + bad.str());
  }
  return theta;
}

ModelDimension model_dimension(const ChainGraph& g) {
  ModelDimension d;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    d.per_component.emplace_back(maps.p(), maps.q());
    d.total += maps.p() + maps.q();
  }
  const long long v = static_cast<long long>(g.size());
  d.df = v * (v + 1) / 2 - static_cast<long long>(d.total);
  return d;
}

}  // namespace ampcg
