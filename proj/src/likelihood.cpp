#include "ampcg/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/KroneckerProduct>

#include "ampcg/error.hpp"

namespace ampcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SampleMoments SampleMoments::from_covariance(MatrixXd s, std::size_t n, std::vector<std::string> labels) {
  if (s.rows() != s.cols()) throw InputError("covariance matrix is not square");
  if (static_cast<std::size_t>(s.rows()) != labels.size()) {
    throw InputError("covariance matrix has " + std::to_string(s.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (n == 0) throw InputError("sample size must be positive");
  if (s.size() == 0) throw InputError("covariance matrix is empty");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("covariance matrix is not symmetric");
  }
  if ((s.diagonal().array() < 0.0).any()) throw InputError("covariance matrix has a negative variance");
  s = 0.5 * (s + s.transpose());
  return SampleMoments(std::move(s), n, std::move(labels));
}

SampleMoments SampleMoments::from_data(const MatrixXd& x, std::vector<std::string> labels, bool center) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InputError("data rows do not match labels");
  if (x.cols() == 0) throw InputError("no observations");
  const auto n = static_cast<double>(x.cols());
  MatrixXd s;
  if (center) {
    const MatrixXd xc = x.colwise() - x.rowwise().mean();
    s = xc * xc.transpose() / n;
  } else {
    s = x * x.transpose() / n;
  }
  return SampleMoments(0.5 * (s + s.transpose()), static_cast<std::size_t>(x.cols()), std::move(labels));
}

SampleMoments SampleMoments::reordered(const std::vector<std::string>& order) const {
  if (order.size() != labels_.size()) throw InputError("variable count does not match");
  std::vector<std::size_t> idx;
  for (const auto& l : order) {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) throw InputError("no variable named '" + l + "' in the data");
    idx.push_back(static_cast<std::size_t>(it - labels_.begin()));
  }
  MatrixXd s(order.size(), order.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) s(i, j) = s_(idx[i], idx[j]);
  }
  return SampleMoments(std::move(s), n_, order);
}

namespace {

MatrixXd submatrix(const MatrixXd& m, const VertexList& rows, const VertexList& cols) {
  MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

VectorXd vec(const MatrixXd& m) { return Eigen::Map<const VectorXd>(m.data(), m.size()); }

/// Omega and its log-determinant; throws when Omega is not positive definite.
struct Concentration {
  MatrixXd omega;
  MatrixXd inverse;
  double log_det = 0.0;
};

Concentration concentration(const BlockMatrices& m, const IndicatorMap& maps) {
  const Eigen::LLT<MatrixXd> llt(m.omega);
  if (llt.info() != Eigen::Success) {
    throw DomainError("concentration matrix of component " + std::to_string(maps.component) +
                      " is not positive definite");
  }
  Concentration c;
  c.omega = m.omega;
  c.inverse = llt.solve(MatrixXd::Identity(m.omega.rows(), m.omega.cols()));
  c.log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return c;
}

MatrixXd residual_cov(const BlockMoments& bm, const MatrixXd& b) {
  MatrixXd r = bm.tt - b * bm.tp.transpose() - bm.tp * b.transpose() + b * bm.pp * b.transpose();
  return 0.5 * (r + r.transpose());
}

}  // namespace

BlockMoments block_moments(const MatrixXd& s, const IndicatorMap& maps) {
  return {submatrix(s, maps.vertices, maps.vertices), submatrix(s, maps.vertices, maps.parents),
          submatrix(s, maps.parents, maps.parents)};
}

void check_rank_condition(const SampleMoments& s, const IndicatorMap& maps, const MixedGraph& g) {
  const std::size_t need = maps.tau_size() + maps.parent_size();
  if (s.n() < need) {
    std::string members;
    for (Vertex v : maps.vertices) members += (members.empty() ? "" : ",") + g.label(v);
    throw RankError("component {" + members + "} needs n >= |tau| + |pa(tau)| = " + std::to_string(need) +
                    ", got n = " + std::to_string(s.n()));
  }
}

MatrixXd residual_cov(const SampleMoments& s, const IndicatorMap& maps, const VectorXd& beta) {
  BlockParameter probe{maps.component, beta, VectorXd::Zero(maps.q())};
  return residual_cov(block_moments(s.s(), maps), assemble(probe, maps).b);
}

double block_loglik(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block) {
  const BlockMatrices m = assemble(block, maps);
  const Concentration c = concentration(m, maps);
  const MatrixXd r = residual_cov(block_moments(s.s(), maps), m.b);
  return 0.5 * c.log_det - 0.5 * (c.omega.cwiseProduct(r)).sum();
}

double BlockScore::max_abs() const {
  double m = 0.0;
  if (d_beta.size() > 0) m = std::max(m, d_beta.cwiseAbs().maxCoeff());
  if (d_omega.size() > 0) m = std::max(m, d_omega.cwiseAbs().maxCoeff());
  return m;
}

BlockScore score(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block) {
  const BlockMatrices m = assemble(block, maps);
  const Concentration c = concentration(m, maps);
  const BlockMoments bm = block_moments(s.s(), maps);
  BlockScore out;
  // vec(Omega S_tp) - (S_pp (x) Omega) vec(B) = vec(Omega (S_tp - B S_pp))
  out.d_beta = maps.p_map.transpose() * vec(c.omega * (bm.tp - m.b * bm.pp));
  out.d_omega = 0.5 * maps.q_map.transpose() * vec(c.inverse - residual_cov(bm, m.b));
  return out;
}

MatrixXd HessianBlocks::full() const {
  const Eigen::Index p = beta_beta.rows();
  const Eigen::Index q = omega_omega.rows();
  MatrixXd h(p + q, p + q);
  h.topLeftCorner(p, p) = beta_beta;
  h.topRightCorner(p, q) = beta_omega;
  h.bottomLeftCorner(q, p) = beta_omega.transpose();
  h.bottomRightCorner(q, q) = omega_omega;
  return h;
}

HessianBlocks hessian_blocks(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block) {
  const BlockMatrices m = assemble(block, maps);
  const Concentration c = concentration(m, maps);
  const BlockMoments bm = block_moments(s.s(), maps);
  const MatrixXd& p = maps.p_map;
  const MatrixXd& q = maps.q_map;
  const MatrixXd id = MatrixXd::Identity(maps.tau_size(), maps.tau_size());
  HessianBlocks h;
  h.beta_beta = -p.transpose() * Eigen::kroneckerProduct(bm.pp, c.omega).eval() * p;
  h.omega_omega = -0.5 * q.transpose() * Eigen::kroneckerProduct(c.inverse, c.inverse).eval() * q;
  const MatrixXd cross = bm.tp.transpose() - bm.pp * m.b.transpose();
  h.beta_omega = p.transpose() * Eigen::kroneckerProduct(cross, id).eval() * q;
  return h;
}

MatrixXd fisher_info_block(const IndicatorMap& maps, const BlockParameter& block, const MatrixXd& parent_cov) {
  const BlockMatrices m = assemble(block, maps);
  const Concentration c = concentration(m, maps);
  const std::size_t p = maps.p();
  const std::size_t q = maps.q();
  MatrixXd info = MatrixXd::Zero(p + q, p + q);
  if (p > 0) {
    info.topLeftCorner(p, p) =
        maps.p_map.transpose() * Eigen::kroneckerProduct(parent_cov, c.omega).eval() * maps.p_map;
  }
  info.bottomRightCorner(q, q) =
      0.5 * maps.q_map.transpose() * Eigen::kroneckerProduct(c.inverse, c.inverse).eval() * maps.q_map;
  return info;
}

MatrixXd fisher_info_block(const ChainGraph& g, const ModelParameter& theta, const IndicatorMap& maps) {
  const MatrixXd sigma = sigma_from_params(g, theta);
  return fisher_info_block(maps, theta.blocks.at(maps.component), submatrix(sigma, maps.parents, maps.parents));
}

Deviance deviance(const ChainGraph& g, const ModelParameter& theta_hat, const SampleMoments& s) {
  const Eigen::LLT<MatrixXd> s_llt(s.s());
  if (s_llt.info() != Eigen::Success) throw RankError("sample covariance is singular");
  const MatrixXd sigma = sigma_from_params(g, theta_hat);
  const Eigen::LLT<MatrixXd> llt(sigma);
  const double log_det_sigma = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det_s = 2.0 * s_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace = llt.solve(s.s()).trace();
  const auto v = static_cast<double>(g.size());
  return {static_cast<double>(s.n()) * (log_det_sigma - log_det_s + trace - v), model_dimension(g).df};
}

double model_loglik(const ChainGraph& g, const ModelParameter& theta, const SampleMoments& s) {
  double sum = 0.0;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    sum += block_loglik(s, build_indicator_maps(g, c), theta.blocks.at(c));
  }
  const auto n = static_cast<double>(s.n());
  return n * sum - n * static_cast<double>(g.size()) / 2.0 * std::log(2.0 * std::numbers::pi);
}

}  // namespace ampcg
