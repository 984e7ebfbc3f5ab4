#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ampcg/fit.hpp"
#include "ampcg/graph.hpp"
#include "ampcg/likelihood.hpp"
#include "ampcg/param.hpp"

namespace ampcg {

struct SimSpec {
  ModelParameter theta;
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

struct SimulatedData {
  Eigen::MatrixXd x;  // |V| x n, one column per observation
  SampleMoments moments;
};

/// Draws n observations block by block in component order:
/// X_tau = B_tau X_pa(tau) + L_tau Z with L_tau L_tau' = Omega_tau^{-1}.
/// Uses std::mt19937_64 seeded with spec.seed and std::normal_distribution;
/// Z is filled component by component, observation-major. Moments are
/// X X' / n (the model is centered; no mean is removed).
/// Throws DomainError for a block outside the parameter space or n == 0.
SimulatedData sample(const ChainGraph& g, const SimSpec& spec);

struct CoverageReport {
  std::vector<std::string> parameter_names;  // e.g. "beta[pacc<-salar]", "omega[pacc,rejr]"
  std::vector<double> true_values;
  std::vector<double> coverage;         // share of converged replications covering the truth
  std::vector<double> mean_error;       // mean of (estimate - truth)
  std::vector<double> error_sd;         // standard deviation of (estimate - truth)
  std::size_t replications = 0;
  std::size_t converged = 0;
  std::size_t excluded = 0;             // non-converged or failed replications
};

/// For each replication r the data are drawn with seed derived from
/// (seed, r); the model is fitted and every parameter is checked against its
/// Wald interval estimate +- z * SE. Non-converged fits are excluded.
CoverageReport coverage_experiment(const ModelParameter& theta0, const ChainGraph& g, std::size_t n,
                                   std::size_t replications, std::uint64_t seed, const FitConfig& cfg = {},
                                   double z = 1.959963984540054);

/// Labels for the flattened parameter vector, block by block, beta before omega.
std::vector<std::string> parameter_names(const ChainGraph& g);

/// Flattened parameter vector in the order of parameter_names.
Eigen::VectorXd flatten(const ModelParameter& theta);

}  // namespace ampcg
