#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "ampcg/graph.hpp"

namespace ampcg {

/// Index bookkeeping for one chain component tau.
///
/// beta lists B_uv for each directed edge v -> u with u in tau, row-major over
/// (u, v) with tau and pa(tau) sorted by label. omega lists the
/// diagonal Omega_uu in label order, then Omega_uv for each undirected edge
/// u -- v inside tau (u < v by label), sorted. p_map and q_map are the 0/1
/// matrices with vec(B_tau) = p_map * beta and vec(Omega_tau) = q_map * omega
/// (vec stacks columns).
struct IndicatorMap {
  std::size_t component = 0;
  VertexList vertices;  // tau
  VertexList parents;   // pa(tau)
  std::vector<std::pair<std::size_t, std::size_t>> beta_entries;   // (row in tau, column in pa)
  std::vector<std::pair<std::size_t, std::size_t>> omega_entries;  // (i, j) in tau, i <= j
  Eigen::MatrixXd p_map;
  Eigen::MatrixXd q_map;

  std::size_t p() const { return beta_entries.size(); }
  std::size_t q() const { return omega_entries.size(); }
  std::size_t tau_size() const { return vertices.size(); }
  std::size_t parent_size() const { return parents.size(); }
};

IndicatorMap build_indicator_maps(const ChainGraph& g, std::size_t component);
IndicatorMap build_indicator_maps(const ChainGraph& g, const VertexList& tau);
/// One map per component, in component order.
std::vector<IndicatorMap> build_indicator_maps(const ChainGraph& g);

/// (beta_tau, omega_tau) for one chain component.
struct BlockParameter {
  std::size_t component = 0;
  Eigen::VectorXd beta;
  Eigen::VectorXd omega;
};

/// theta = (beta_tau, omega_tau) over all components, in component order.
struct ModelParameter {
  std::vector<BlockParameter> blocks;
};

struct BlockMatrices {
  Eigen::MatrixXd b;      // |tau| x |pa(tau)|
  Eigen::MatrixXd omega;  // |tau| x |tau|, symmetric
  bool positive_definite = false;
};

/// Fills B_tau and Omega_tau; zeros at non-edges are exact. Does not throw on
/// an indefinite Omega_tau; check positive_definite.
BlockMatrices assemble(const BlockParameter& block, const IndicatorMap& maps);

/// Inverse of assemble: reads the free entries out of full matrices.
Eigen::VectorXd beta_from_matrix(const Eigen::MatrixXd& b, const IndicatorMap& maps);
Eigen::VectorXd omega_from_matrix(const Eigen::MatrixXd& omega, const IndicatorMap& maps);

/// Throws DomainError unless Omega_tau(omega) is positive definite.
void require_in_parameter_space(const BlockParameter& block, const IndicatorMap& maps);

/// Full V x V matrices B and Omega (block diagonal) from theta.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> full_matrices(const ChainGraph& g, const ModelParameter& theta);

/// Sigma = (I - B)^{-1} Omega^{-1} (I - B')^{-1}. Throws DomainError if a block
/// is outside the parameter space.
Eigen::MatrixXd sigma_from_params(const ChainGraph& g, const ModelParameter& theta);

/// Sigma^{-1} = (I - B') Omega (I - B).
Eigen::MatrixXd precision_from_params(const ChainGraph& g, const ModelParameter& theta);

/// Recovers theta from a covariance in the model:
/// B_{v,pa(v)} = Sigma_{v,pa(v)} Sigma_{pa(v),pa(v)}^{-1} and
/// Omega_tau = [((I - B) Sigma (I - B'))_{tau,tau}]^{-1}.
/// Throws RankError for singular parent blocks and DomainError, listing the
/// offending entries, when sigma violates the model beyond
/// tolerance * max|sigma|.
ModelParameter identify_params(const Eigen::MatrixXd& sigma, const ChainGraph& g, double tolerance = 1e-8);

struct ModelDimension {
  std::vector<std::pair<std::size_t, std::size_t>> per_component;  // (p_tau, q_tau)
  std::size_t total = 0;
  long long df = 0;  // |V|(|V|+1)/2 - total
};

ModelDimension model_dimension(const ChainGraph& g);

}  // namespace ampcg
