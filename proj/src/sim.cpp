#include "ampcg/sim.hpp"

#include <cmath>
#include <random>

#include "ampcg/error.hpp"

namespace ampcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// splitmix64 finalizer, used to derive independent per-replication seeds
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SimulatedData sample(const ChainGraph& g, const SimSpec& spec) {
  if (spec.n == 0) throw DomainError("sample size must be positive");
  if (spec.theta.blocks.size() != g.component_count()) throw DomainError("parameter does not match the graph");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(spec.n);
  MatrixXd x = MatrixXd::Zero(static_cast<Eigen::Index>(g.size()), n);

  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    const BlockMatrices m = assemble(spec.theta.blocks[c], maps);
    if (!m.positive_definite) {
      throw DomainError("concentration matrix of component " + std::to_string(c) + " is not positive definite");
    }
    const auto t = static_cast<Eigen::Index>(maps.tau_size());
    const MatrixXd cov = m.omega.llt().solve(MatrixXd::Identity(t, t));
    const MatrixXd chol = cov.llt().matrixL();

    MatrixXd z(t, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < t; ++i) z(i, j) = normal(rng);
    }
    MatrixXd block = chol * z;
    if (maps.parent_size() > 0) {
      MatrixXd x_pa(static_cast<Eigen::Index>(maps.parent_size()), n);
      for (std::size_t i = 0; i < maps.parent_size(); ++i) x_pa.row(static_cast<Eigen::Index>(i)) = x.row(maps.parents[i]);
      block += m.b * x_pa;
    }
    for (std::size_t i = 0; i < maps.tau_size(); ++i) x.row(maps.vertices[i]) = block.row(static_cast<Eigen::Index>(i));
  }

  SampleMoments moments = SampleMoments::from_data(x, g.graph().labels(), false);
  return {std::move(x), std::move(moments)};
}

std::vector<std::string> parameter_names(const ChainGraph& g) {
  const MixedGraph& mg = g.graph();
  std::vector<std::string> names;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    for (auto [i, j] : maps.beta_entries) {
      names.push_back("beta[" + mg.label(maps.vertices[i]) + "<-" + mg.label(maps.parents[j]) + "]");
    }
    for (auto [i, j] : maps.omega_entries) {
      names.push_back(i == j ? "omega[" + mg.label(maps.vertices[i]) + "]"
                             : "omega[" + mg.label(maps.vertices[i]) + "," + mg.label(maps.vertices[j]) + "]");
    }
  }
  return names;
}

VectorXd flatten(const ModelParameter& theta) {
  Eigen::Index size = 0;
  for (const auto& b : theta.blocks) size += b.beta.size() + b.omega.size();
  VectorXd out(size);
  Eigen::Index pos = 0;
  for (const auto& b : theta.blocks) {
    out.segment(pos, b.beta.size()) = b.beta;
    pos += b.beta.size();
    out.segment(pos, b.omega.size()) = b.omega;
    pos += b.omega.size();
  }
  return out;
}

CoverageReport coverage_experiment(const ModelParameter& theta0, const ChainGraph& g, std::size_t n,
                                   std::size_t replications, std::uint64_t seed, const FitConfig& cfg, double z) {
  CoverageReport report;
  report.parameter_names = parameter_names(g);
  const VectorXd truth = flatten(theta0);
  report.true_values.assign(truth.data(), truth.data() + truth.size());
  report.replications = replications;
  const auto d = static_cast<std::size_t>(truth.size());
  std::vector<double> hits(d, 0.0), sum(d, 0.0), sum_sq(d, 0.0);

  for (std::size_t r = 0; r < replications; ++r) {
    const SimulatedData data = sample(g, {theta0, n, mix(seed ^ mix(r))});
    const ModelFit fit = fit_model(data.moments, g, cfg);
    if (!fit.converged() || !fit.theta || !fit.blocks.front().standard_errors) {
      ++report.excluded;
      continue;
    }
    ++report.converged;
    const VectorXd est = flatten(*fit.theta);
    std::vector<double> se;
    for (const auto& b : fit.blocks) {
      se.insert(se.end(), b.standard_errors->beta.data(), b.standard_errors->beta.data() + b.standard_errors->beta.size());
      se.insert(se.end(), b.standard_errors->omega.data(),
                b.standard_errors->omega.data() + b.standard_errors->omega.size());
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double err = est(static_cast<Eigen::Index>(k)) - truth(static_cast<Eigen::Index>(k));
      if (std::abs(err) <= z * se[k]) hits[k] += 1.0;
      sum[k] += err;
      sum_sq[k] += err * err;
    }
  }

  const auto m = static_cast<double>(report.converged);
  for (std::size_t k = 0; k < d; ++k) {
    if (report.converged == 0) {
      report.coverage.push_back(0.0);
      report.mean_error.push_back(0.0);
      report.error_sd.push_back(0.0);
      continue;
    }
    const double mean = sum[k] / m;
    report.coverage.push_back(hits[k] / m);
    report.mean_error.push_back(mean);
    report.error_sd.push_back(m > 1 ? std::sqrt(std::max(0.0, (sum_sq[k] - m * mean * mean) / (m - 1))) : 0.0);
  }
  if (replications == 0) {
    report.coverage.clear();
    report.mean_error.clear();
    report.error_sd.clear();
  }
  return report;
}

}  // namespace ampcg
