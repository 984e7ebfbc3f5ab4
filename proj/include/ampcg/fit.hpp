#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ampcg/graph.hpp"
#include "ampcg/ipf.hpp"
#include "ampcg/likelihood.hpp"
#include "ampcg/param.hpp"

namespace ampcg {

enum class OmegaInit {
  identity,  // Omega = I
  diagonal,  // Omega = diag(1 / S_vv)
  user,      // FitConfig::user_omega[component]
};

/// Where Sigma_{pa,pa} in the Fisher information comes from.
enum class InformationSource {
  model,   // fitted Sigma(theta_hat)
  sample,  // sample covariance S
};

struct FitConfig {
  double outer_tolerance = 1e-8;
  int max_outer_iterations = 5000;
  OmegaInit omega_init = OmegaInit::identity;
  std::map<std::size_t, Eigen::VectorXd> user_omega;
  IpfConfig ipf;
  InformationSource information = InformationSource::model;
};

struct IterationRecord {
  double loglik = 0.0;        // per-observation block log-likelihood
  double score_norm = 0.0;    // max-norm of (d_beta, d_omega)
  double param_change = 0.0;  // max |theta_k - theta_{k-1}|
};

using IterationTrace = std::vector<IterationRecord>;

enum class FitStatus {
  converged,
  max_iterations,       // best (last) iterate returned
  likelihood_decrease,  // a half-step lowered the likelihood; aborted
  failed,               // e.g. rank condition; see diagnostic
};

const char* to_string(FitStatus s);

struct BlockStandardErrors {
  Eigen::VectorXd beta;
  Eigen::VectorXd omega;
};

struct BlockFit {
  BlockParameter params;
  std::optional<BlockStandardErrors> standard_errors;  // filled by fit_model
  IterationTrace trace;
  FitStatus status = FitStatus::failed;
  std::string diagnostic;
  /// Likelihood decrease allowed between iterations before aborting.
  double slack = 0.0;

  bool converged() const { return status == FitStatus::converged; }
  int iterations() const { return static_cast<int>(trace.size()); }
};

struct ModelFit {
  std::vector<BlockFit> blocks;
  /// Present when every component produced an estimate.
  std::optional<ModelParameter> theta;
  std::optional<Eigen::MatrixXd> sigma_hat;
  std::optional<double> loglik;
  std::optional<double> deviance;
  long long df = 0;

  bool converged() const;
};

/// Generalized least squares step at fixed Omega:
/// beta = {P'[S_pp (x) Omega]P}^{-1} P' vec(Omega S_tp).
/// Throws RankError when the normal-equation matrix is singular.
Eigen::VectorXd gls_step(const SampleMoments& s, const IndicatorMap& maps, const Eigen::VectorXd& omega);

/// Per-vertex least squares on each vertex's own parents, then IPF of the
/// residual covariance over the cliques of G_tau.
BlockParameter two_step_estimate(const SampleMoments& s, const ChainGraph& g, std::size_t component,
                                 const IpfConfig& ipf = {});

/// Two-step estimates for every component.
ModelParameter two_step_model(const SampleMoments& s, const ChainGraph& g, const IpfConfig& ipf = {});

/// Alternates gls_step and IPF until the score max-norm drops to
/// cfg.outer_tolerance. Throws RankError for rank-condition failures.
BlockFit fit_component(const SampleMoments& s, const ChainGraph& g, std::size_t component,
                       const FitConfig& cfg = {});

/// Fits every component, then assembles Sigma_hat, log-likelihood, deviance
/// and standard errors. Per-component failures are recorded in the block
/// status; the remaining components are still fitted. `s` is reordered to the
/// graph's vertex order by label.
ModelFit fit_model(const SampleMoments& s, const ChainGraph& g, const FitConfig& cfg = {});

/// sqrt(diag([n I(theta)_{tau,tau}]^{-1})) per block. With
/// InformationSource::sample, `sample` supplies Sigma_{pa,pa}.
/// Throws RankError when an information block is singular.
std::vector<BlockStandardErrors> standard_errors(const ChainGraph& g, const ModelParameter& theta_hat, std::size_t n,
                                                 InformationSource source = InformationSource::model,
                                                 const SampleMoments* sample = nullptr);

struct ConvergenceDiagnostics {
  std::vector<std::size_t> monotonicity_violations;  // iteration indices k with l_k < l_{k-1} - slack
  double final_score_norm = 0.0;
  int iterations = 0;
  /// Successive parameter changes are non-increasing over the second half
  /// of the trace (changes below 1e-14 ignored).
  bool cauchy_decreasing = true;
};

ConvergenceDiagnostics convergence_report(const IterationTrace& trace, double slack = 1e-12);

}  // namespace ampcg
