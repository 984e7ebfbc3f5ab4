#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace ampcg {

struct IpfConfig {
  double tolerance = 1e-10;
  int max_iterations = 5000;
};

struct IpfResult {
  Eigen::MatrixXd concentration;
  int iterations = 0;  // full sweeps over the cliques
  bool converged = false;
  /// max |Sigma_hat_uv - target_uv| over the diagonal and the clique entries.
  double final_gap = 0.0;
};

using Clique = std::vector<std::size_t>;

/// Maximum likelihood concentration matrix K of an undirected Gaussian
/// graphical model whose edges are the pairs covered by `cliques`, fitted to
/// `target` by iterative proportional fitting. Each clique update replaces
///   K_cc <- (target_cc)^{-1} + K_cr (K_rr)^{-1} K_rc,
/// cliques are swept in the given order, and iteration stops once the
/// moment-matching gap is <= tolerance (or at the rounding floor
/// 64 eps max_v target_vv, for targets on a very large scale). Starts from diag(1/target_vv) unless
/// `start` is given (it must be positive definite with the right zero
/// pattern). Throws DomainError if target is not positive definite or the
/// cliques do not cover every vertex.
IpfResult ipf_fit(const Eigen::MatrixXd& target, const std::vector<Clique>& cliques, const IpfConfig& cfg = {},
                  const std::optional<Eigen::MatrixXd>& start = std::nullopt);

/// Moment-matching gap of K against target (see IpfResult::final_gap).
double ipf_gap(const Eigen::MatrixXd& concentration, const Eigen::MatrixXd& target,
               const std::vector<Clique>& cliques);

/// Closed-form MLE when the edge pattern of `cliques` is chordal:
/// sum of padded clique-block inverses minus padded separator-block inverses
/// along a junction tree. Returns nullopt for non-chordal patterns.
std::optional<Eigen::MatrixXd> ipf_closed_form_check(const Eigen::MatrixXd& target,
                                                     const std::vector<Clique>& cliques);

/// 1/2 log|K| - 1/2 tr(K target).
double gaussian_loglik(const Eigen::MatrixXd& concentration, const Eigen::MatrixXd& target);

}  // namespace ampcg
