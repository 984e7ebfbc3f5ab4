#include "ampcg/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "ampcg/error.hpp"

namespace ampcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max-iterations";
    case FitStatus::likelihood_decrease: return "likelihood-decrease";
    case FitStatus::failed: return "failed";
  }
  return "unknown";
}

bool ModelFit::converged() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const BlockFit& b) { return b.converged(); });
}

namespace {

VectorXd vec(const MatrixXd& m) { return Eigen::Map<const VectorXd>(m.data(), m.size()); }

double max_abs_diff(const VectorXd& a, const VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

/// Cliques of G_tau as positions within maps.vertices.
std::vector<Clique> local_cliques(const ChainGraph& g, const IndicatorMap& maps) {
  std::vector<Clique> out;
  for (const VertexList& c : maximal_cliques(g, maps.vertices)) {
    Clique local;
    for (Vertex v : c) {
      local.push_back(static_cast<std::size_t>(std::find(maps.vertices.begin(), maps.vertices.end(), v) -
                                               maps.vertices.begin()));
    }
    std::sort(local.begin(), local.end());
    out.push_back(std::move(local));
  }
  return out;
}

VectorXd initial_omega(const SampleMoments& s, const IndicatorMap& maps, const FitConfig& cfg) {
  VectorXd omega = VectorXd::Zero(maps.q());
  switch (cfg.omega_init) {
    case OmegaInit::identity:
      omega.head(maps.tau_size()).setOnes();
      break;
    case OmegaInit::diagonal:
      for (std::size_t i = 0; i < maps.tau_size(); ++i) {
        const double var = s.s()(maps.vertices[i], maps.vertices[i]);
        if (!(var > 0.0)) throw RankError("zero sample variance in component " + std::to_string(maps.component));
        omega(i) = 1.0 / var;
      }
      break;
    case OmegaInit::user: {
      auto it = cfg.user_omega.find(maps.component);
      if (it == cfg.user_omega.end()) {
        throw DomainError("no user-supplied starting omega for component " + std::to_string(maps.component));
      }
      omega = it->second;
      require_in_parameter_space({maps.component, VectorXd::Zero(maps.p()), omega}, maps);
      break;
    }
  }
  return omega;
}

}  // namespace

VectorXd gls_step(const SampleMoments& s, const IndicatorMap& maps, const VectorXd& omega) {
  if (maps.p() == 0) return VectorXd(0);
  const BlockMoments bm = block_moments(s.s(), maps);
  const BlockMatrices m = assemble({maps.component, VectorXd::Zero(maps.p()), omega}, maps);
  if (!m.positive_definite) throw DomainError("GLS step needs a positive definite concentration matrix");
  const MatrixXd normal = maps.p_map.transpose() * Eigen::kroneckerProduct(bm.pp, m.omega).eval() * maps.p_map;
  const VectorXd rhs = maps.p_map.transpose() * vec(m.omega * bm.tp);
  const Eigen::LLT<MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw RankError("GLS normal equations are singular for component " + std::to_string(maps.component) +
                    "; the rank condition n >= |tau| + |pa(tau)| may be violated");
  }
  return llt.solve(rhs);
}

BlockParameter two_step_estimate(const SampleMoments& s, const ChainGraph& g, std::size_t component,
                                 const IpfConfig& ipf) {
  const IndicatorMap maps = build_indicator_maps(g, component);
  check_rank_condition(s, maps, g.graph());
  const MixedGraph& mg = g.graph();

  MatrixXd b = MatrixXd::Zero(maps.tau_size(), maps.parent_size());
  for (std::size_t i = 0; i < maps.tau_size(); ++i) {
    const VertexList& pa = mg.parents(maps.vertices[i]);
    if (pa.empty()) continue;
    MatrixXd s_pp(pa.size(), pa.size());
    VectorXd s_pv(pa.size());
    for (std::size_t a = 0; a < pa.size(); ++a) {
      s_pv(a) = s.s()(pa[a], maps.vertices[i]);
      for (std::size_t c = 0; c < pa.size(); ++c) s_pp(a, c) = s.s()(pa[a], pa[c]);
    }
    const Eigen::LLT<MatrixXd> llt(s_pp);
    if (llt.info() != Eigen::Success) {
      throw RankError("sample covariance of the parents of '" + mg.label(maps.vertices[i]) + "' is singular");
    }
    const VectorXd row = llt.solve(s_pv);
    for (std::size_t a = 0; a < pa.size(); ++a) {
      const auto col = std::find(maps.parents.begin(), maps.parents.end(), pa[a]) - maps.parents.begin();
      b(i, col) = row(a);
    }
  }

  BlockParameter out;
  out.component = component;
  out.beta = beta_from_matrix(b, maps);
  const IpfResult fitted = ipf_fit(residual_cov(s, maps, out.beta), local_cliques(g, maps), ipf);
  out.omega = omega_from_matrix(fitted.concentration, maps);
  return out;
}

ModelParameter two_step_model(const SampleMoments& s, const ChainGraph& g, const IpfConfig& ipf) {
  ModelParameter theta;
  for (std::size_t c = 0; c < g.component_count(); ++c) theta.blocks.push_back(two_step_estimate(s, g, c, ipf));
  return theta;
}

BlockFit fit_component(const SampleMoments& s, const ChainGraph& g, std::size_t component, const FitConfig& cfg) {
  if (cfg.outer_tolerance <= 0.0 || cfg.max_outer_iterations < 1) throw DomainError("invalid fit configuration");
  const IndicatorMap maps = build_indicator_maps(g, component);
  check_rank_condition(s, maps, g.graph());
  const std::vector<Clique> cliques = local_cliques(g, maps);

  BlockFit fit;
  fit.slack = 1e-12 + cfg.ipf.tolerance;
  fit.status = FitStatus::max_iterations;
  BlockParameter& cur = fit.params;
  cur.component = component;
  cur.omega = initial_omega(s, maps, cfg);
  cur.beta = VectorXd::Zero(maps.p());

  std::ostringstream notes;
  double prev_loglik = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cfg.max_outer_iterations; ++k) {
    const BlockParameter before = cur;

    // beta-step: exact maximizer at fixed omega
    cur.beta = gls_step(s, maps, cur.omega);
    const double after_beta = block_loglik(s, maps, cur);

    // omega-step: IPF on the residual covariance, warm-started at the current omega
    const IpfResult ipf =
        ipf_fit(residual_cov(s, maps, cur.beta), cliques, cfg.ipf, assemble(cur, maps).omega);
    if (!ipf.converged) notes << "IPF did not converge at iteration " << k << " (gap " << ipf.final_gap << "); ";
    cur.omega = omega_from_matrix(ipf.concentration, maps);
    const double after_omega = block_loglik(s, maps, cur);

    IterationRecord rec;
    rec.loglik = after_omega;
    rec.score_norm = score(s, maps, cur).max_abs();
    rec.param_change = std::max(max_abs_diff(cur.beta, before.beta), max_abs_diff(cur.omega, before.omega));
    fit.trace.push_back(rec);

    if (after_beta < prev_loglik - fit.slack || after_omega < after_beta - fit.slack) {
      fit.status = FitStatus::likelihood_decrease;
      notes << "log-likelihood decreased at iteration " << k << " (" << prev_loglik << " -> " << after_beta
            << " -> " << after_omega << ")";
      break;
    }
    prev_loglik = after_omega;
    if (rec.score_norm <= cfg.outer_tolerance) {
      fit.status = FitStatus::converged;
      break;
    }
  }
  fit.diagnostic = notes.str();
  return fit;
}

std::vector<BlockStandardErrors> standard_errors(const ChainGraph& g, const ModelParameter& theta_hat, std::size_t n,
                                                 InformationSource source, const SampleMoments* sample) {
  if (source == InformationSource::sample && sample == nullptr) {
    throw DomainError("sample-based information needs the sample moments");
  }
  const MatrixXd cov = source == InformationSource::model ? sigma_from_params(g, theta_hat) : sample->s();
  std::vector<BlockStandardErrors> out;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    MatrixXd parent_cov(maps.parent_size(), maps.parent_size());
    for (std::size_t i = 0; i < maps.parent_size(); ++i) {
      for (std::size_t j = 0; j < maps.parent_size(); ++j) parent_cov(i, j) = cov(maps.parents[i], maps.parents[j]);
    }
    const MatrixXd info = static_cast<double>(n) * fisher_info_block(maps, theta_hat.blocks.at(c), parent_cov);
    const Eigen::LLT<MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      throw RankError("Fisher information of component " + std::to_string(c) + " is singular");
    }
    const VectorXd var = llt.solve(MatrixXd::Identity(info.rows(), info.cols())).diagonal();
    const VectorXd se = var.cwiseSqrt();
    out.push_back({se.head(maps.p()), se.tail(maps.q())});
  }
  return out;
}

ModelFit fit_model(const SampleMoments& s_in, const ChainGraph& g, const FitConfig& cfg) {
  const SampleMoments s = s_in.reordered(g.graph().labels());
  ModelFit out;
  out.df = model_dimension(g).df;

  bool complete = true;
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    try {
      out.blocks.push_back(fit_component(s, g, c, cfg));
    } catch (const Error& e) {
      BlockFit failed;
      failed.params.component = c;
      failed.status = FitStatus::failed;
      failed.diagnostic = e.what();
      out.blocks.push_back(std::move(failed));
    }
    if (out.blocks.back().status == FitStatus::failed) complete = false;
  }
  if (!complete) return out;

  ModelParameter theta;
  for (const auto& b : out.blocks) theta.blocks.push_back(b.params);
  out.sigma_hat = sigma_from_params(g, theta);
  out.loglik = model_loglik(g, theta, s);
  try {
    out.deviance = deviance(g, theta, s).value;
  } catch (const RankError&) {
    // singular S: deviance undefined
  }
  try {
    const auto se = standard_errors(g, theta, s.n(), cfg.information, &s);
    for (std::size_t c = 0; c < se.size(); ++c) out.blocks[c].standard_errors = se[c];
  } catch (const RankError& e) {
    for (auto& b : out.blocks) b.diagnostic += std::string(b.diagnostic.empty() ? "" : "; ") + e.what();
  }
  out.theta = std::move(theta);
  return out;
}

ConvergenceDiagnostics convergence_report(const IterationTrace& trace, double slack) {
  ConvergenceDiagnostics d;
  d.iterations = static_cast<int>(trace.size());
  if (trace.empty()) return d;
  d.final_score_norm = trace.back().score_norm;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].loglik < trace[k - 1].loglik - slack) d.monotonicity_violations.push_back(k);
  }
  for (std::size_t k = std::max<std::size_t>(1, trace.size() / 2); k < trace.size(); ++k) {
    const double prev = trace[k - 1].param_change;
    const double now = trace[k].param_change;
    if (now > 1e-14 && now > prev * (1.0 + 1e-9)) d.cauchy_decreasing = false;
  }
  return d;
}

}  // namespace ampcg
