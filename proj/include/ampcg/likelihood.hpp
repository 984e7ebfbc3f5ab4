#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "ampcg/graph.hpp"
#include "ampcg/param.hpp"

namespace ampcg {

/// Sample covariance S = X X' / n of centered data, with its sample size and
/// the variable labels indexing its rows/columns.
class SampleMoments {
 public:
  /// Throws InputError if s is not square, not symmetric, has a negative
  /// diagonal entry, mismatches the labels, or n == 0.
  static SampleMoments from_covariance(Eigen::MatrixXd s, std::size_t n, std::vector<std::string> labels);

  /// x is |V| x n (one column per observation). When center is set the row
  /// means are subtracted first.
  static SampleMoments from_data(const Eigen::MatrixXd& x, std::vector<std::string> labels, bool center);

  const Eigen::MatrixXd& s() const { return s_; }
  std::size_t n() const { return n_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Same moments with rows/columns permuted to `order` (a permutation of the
  /// labels). Throws InputError on a missing label.
  SampleMoments reordered(const std::vector<std::string>& order) const;

 private:
  SampleMoments(Eigen::MatrixXd s, std::size_t n, std::vector<std::string> labels)
      : s_(std::move(s)), n_(n), labels_(std::move(labels)) {}

  Eigen::MatrixXd s_;
  std::size_t n_ = 0;
  std::vector<std::string> labels_;
};

/// The three blocks of S a block-regression needs.
struct BlockMoments {
  Eigen::MatrixXd tt;  // S_{tau,tau}
  Eigen::MatrixXd tp;  // S_{tau,pa}
  Eigen::MatrixXd pp;  // S_{pa,pa}
};

BlockMoments block_moments(const Eigen::MatrixXd& s, const IndicatorMap& maps);

/// Throws RankError when n < |tau| + |pa(tau)|.
void check_rank_condition(const SampleMoments& s, const IndicatorMap& maps, const MixedGraph& g);

/// S(beta) = S_tt - B S_pt - S_tp B' + B S_pp B'.
Eigen::MatrixXd residual_cov(const SampleMoments& s, const IndicatorMap& maps, const Eigen::VectorXd& beta);

/// Per-observation block log-likelihood 1/2 log|Omega| - 1/2 tr[Omega S(beta)]
/// (additive -|V|/2 log 2 pi dropped). Throws DomainError if Omega is not
/// positive definite.
double block_loglik(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block);

/// Gradient of block_loglik.
struct BlockScore {
  Eigen::VectorXd d_beta;   // P'[vec(Omega S_tp) - (S_pp (x) Omega) P beta]
  Eigen::VectorXd d_omega;  // 1/2 Q' vec[Omega^{-1} - S(beta)]

  double max_abs() const;
};

BlockScore score(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block);

/// Second derivatives of block_loglik.
struct HessianBlocks {
  Eigen::MatrixXd beta_beta;    // -P'[S_pp (x) Omega]P
  Eigen::MatrixXd omega_omega;  // -1/2 Q'[Omega^{-1} (x) Omega^{-1}]Q
  Eigen::MatrixXd beta_omega;   // P'[(S_pt - S_pp B') (x) I]Q

  /// Assembled (p+q) x (p+q) symmetric Hessian.
  Eigen::MatrixXd full() const;
};

HessianBlocks hessian_blocks(const SampleMoments& s, const IndicatorMap& maps, const BlockParameter& block);

/// Per-observation Fisher information of one block given the covariance of the
/// parents: diag(P'(parent_cov (x) Omega)P, 1/2 Q'(Omega^{-1} (x) Omega^{-1})Q).
Eigen::MatrixXd fisher_info_block(const IndicatorMap& maps, const BlockParameter& block,
                                  const Eigen::MatrixXd& parent_cov);

/// Fisher information with Sigma_{pa,pa} taken from Sigma(theta).
Eigen::MatrixXd fisher_info_block(const ChainGraph& g, const ModelParameter& theta, const IndicatorMap& maps);

struct Deviance {
  double value = 0.0;
  long long df = 0;
};

/// n [log|Sigma_hat| - log|S| + tr(Sigma_hat^{-1} S) - |V|], Sigma_hat = Sigma(theta).
/// Throws RankError if S is singular.
Deviance deviance(const ChainGraph& g, const ModelParameter& theta_hat, const SampleMoments& s);

/// Total log-likelihood n * sum_tau block_loglik - n |V|/2 log(2 pi).
double model_loglik(const ChainGraph& g, const ModelParameter& theta, const SampleMoments& s);

}  // namespace ampcg
