#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ampcg/error.hpp"
#include "ampcg/fit.hpp"
#include "ampcg/sim.hpp"
#include "support.hpp"

using namespace ampcg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Data {
  ChainGraph g;
  ModelParameter theta;
  SimulatedData sim;
};

Data simulated(testing::Rng& rng, std::size_t size, std::size_t n) {
  ChainGraph g = testing::random_chain_graph(rng, size);
  ModelParameter theta = testing::random_theta(rng, g);
  SimulatedData sim = sample(g, {theta, n, rng()});
  return {std::move(g), std::move(theta), std::move(sim)};
}

double max_diff(const VectorXd& a, const VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("GLS step equals whitened least squares on the raw data") {
  testing::Rng rng(61);
  for (int rep = 0; rep < 40; ++rep) {
    const Data d = simulated(rng, 3 + rep % 6, 30);
    for (const auto& maps : build_indicator_maps(d.g)) {
      if (maps.p() == 0) continue;
      const VectorXd omega = testing::random_theta(rng, d.g).blocks[maps.component].omega;
      const VectorXd gls = gls_step(d.sim.moments, maps, omega);
      const VectorXd oracle = testing::gls_least_squares(d.sim.x, maps, assemble({0, gls, omega}, maps).omega);
      CHECK(testing::rel_err(gls, oracle) < 1e-10);
      // half-step optimality: the beta score vanishes
      CHECK(score(d.sim.moments, maps, {maps.component, gls, omega}).d_beta.cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("fit: monotone ascent and stationarity on random problems") {
  testing::Rng rng(62);
  int fits = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const Data d = simulated(rng, 2 + rep % 7, 50 + 10 * (rep % 5));
    for (std::size_t c = 0; c < d.g.component_count(); ++c) {
      const BlockFit fit = fit_component(d.sim.moments, d.g, c);
      REQUIRE(fit.status == FitStatus::converged);
      const ConvergenceDiagnostics diag = convergence_report(fit.trace, fit.slack);
      CHECK(diag.monotonicity_violations.empty());
      const IndicatorMap maps = build_indicator_maps(d.g, c);
      const BlockScore sc = score(d.sim.moments, maps, fit.params);
      CHECK(sc.max_abs() <= 1e-8);
      CHECK(diag.final_score_norm == doctest::Approx(sc.max_abs()));
      ++fits;
    }
  }
  CHECK(fits > 50);
}

TEST_CASE("two-step equivalence after the first pair of half-steps") {
  testing::Rng rng(63);
  for (int rep = 0; rep < 40; ++rep) {
    const Data d = simulated(rng, 2 + rep % 7, 40);
    for (std::size_t c = 0; c < d.g.component_count(); ++c) {
      const BlockParameter two = two_step_estimate(d.sim.moments, d.g, c);
      for (OmegaInit init : {OmegaInit::diagonal, OmegaInit::identity}) {
        FitConfig cfg;
        cfg.omega_init = init;
        cfg.max_outer_iterations = 1;
        const BlockFit first = fit_component(d.sim.moments, d.g, c, cfg);
        CHECK(first.iterations() == 1);
        CHECK(max_diff(first.params.beta, two.beta) < 1e-10);
        CHECK(max_diff(first.params.omega, two.omega) < 1e-10);
      }
    }
  }
}

TEST_CASE("complete parents and complete component: MLE, two-step and analytic solution coincide") {
  testing::Rng rng(64);
  const ChainGraph g(MixedGraph::create({"p", "q", "a", "b", "c"},
                                        {{"p", "a"}, {"p", "b"}, {"p", "c"}, {"q", "a"}, {"q", "b"}, {"q", "c"}},
                                        {{"a", "b"}, {"a", "c"}, {"b", "c"}, {"p", "q"}}));
  for (int rep = 0; rep < 10; ++rep) {
    const MatrixXd cov = testing::random_covariance(rng, 5, 40);
    const SampleMoments s = SampleMoments::from_covariance(cov, 40, g.graph().labels());
    const std::size_t c = g.component_index({g.graph().index("a"), g.graph().index("b"), g.graph().index("c")});
    const IndicatorMap maps = build_indicator_maps(g, c);
    const BlockMoments bm = block_moments(s.s(), maps);
    const MatrixXd b = bm.tp * bm.pp.inverse();
    const MatrixXd omega = (bm.tt - b * bm.tp.transpose()).inverse();
    const BlockFit fit = fit_component(s, g, c);
    const BlockParameter two = two_step_estimate(s, g, c);
    CHECK(fit.converged());
    CHECK(fit.iterations() == 1);
    CHECK(max_diff(fit.params.beta, beta_from_matrix(b, maps)) < 1e-10);
    CHECK(max_diff(fit.params.omega, omega_from_matrix(omega, maps)) < 1e-10);
    CHECK(max_diff(two.beta, fit.params.beta) < 1e-10);
    CHECK(max_diff(two.omega, fit.params.omega) < 1e-10);
  }
}

TEST_CASE("complete parents with an incomplete component: one outer iteration") {
  testing::Rng rng(68);
  const ChainGraph g(MixedGraph::create({"p", "q", "a", "b", "c"},
                                        {{"p", "a"}, {"p", "b"}, {"p", "c"}, {"q", "a"}, {"q", "b"}, {"q", "c"}},
                                        {{"a", "b"}, {"b", "c"}}));
  const MatrixXd cov = testing::random_covariance(rng, 5, 40);
  const SampleMoments s = SampleMoments::from_covariance(cov, 40, g.graph().labels());
  const std::size_t c = g.component_index({g.graph().index("a"), g.graph().index("b"), g.graph().index("c")});
  const BlockFit fit = fit_component(s, g, c);
  CHECK(fit.converged());
  CHECK(fit.iterations() == 1);
  const BlockParameter two = two_step_estimate(s, g, c);
  CHECK(max_diff(two.beta, fit.params.beta) < 1e-10);
  CHECK(max_diff(two.omega, fit.params.omega) < 1e-10);
}

TEST_CASE("components without parents") {
  testing::Rng rng(69);
  const ChainGraph g(MixedGraph::create({"a", "b", "c", "d"}, {}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"a", "d"}}));
  const MatrixXd cov = testing::random_covariance(rng, 4, 30);
  const SampleMoments s = SampleMoments::from_covariance(cov, 30, g.graph().labels());
  const IndicatorMap maps = build_indicator_maps(g, 0);
  CHECK(gls_step(s, maps, testing::random_theta(rng, g).blocks[0].omega).size() == 0);
  std::vector<Clique> cliques;
  for (const VertexList& cl : maximal_cliques(g, g.component(0))) {
    Clique local;
    for (Vertex v : cl) local.push_back(std::find(maps.vertices.begin(), maps.vertices.end(), v) - maps.vertices.begin());
    std::sort(local.begin(), local.end());
    cliques.push_back(local);
  }
  const IpfResult direct = ipf_fit(block_moments(s.s(), maps).tt, cliques);
  const BlockParameter two = two_step_estimate(s, g, 0);
  CHECK(two.beta.size() == 0);
  CHECK(max_diff(two.omega, omega_from_matrix(direct.concentration, maps)) < 1e-12);
  const BlockFit fit = fit_component(s, g, 0);
  CHECK(fit.converged());
  CHECK(max_diff(fit.params.omega, two.omega) < 1e-8);
}

TEST_CASE("saturated graph: fitted covariance is the sample covariance") {
  testing::Rng rng(70);
  const ChainGraph g(MixedGraph::create({"a", "b", "c", "d"}, {{"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}},
                                        {{"a", "b"}, {"c", "d"}}));
  const MatrixXd cov = testing::random_covariance(rng, 4, 30);
  const ModelFit fit = fit_model(SampleMoments::from_covariance(cov, 30, g.graph().labels()), g);
  REQUIRE(fit.converged());
  CHECK(testing::rel_err(*fit.sigma_hat, cov) < 1e-9);
  CHECK(std::abs(*fit.deviance) < 1e-7);
  CHECK(fit.df == 0);
}

TEST_CASE("large-sample estimates lie within four standard errors of the truth") {
  testing::Rng rng(71);
  for (int rep = 0; rep < 5; ++rep) {
    const ChainGraph g = testing::random_chain_graph(rng, 4 + rep);
    const ModelParameter theta = testing::random_theta(rng, g);
    const SimulatedData d = sample(g, {theta, 100000, 500 + static_cast<std::uint64_t>(rep)});
    const ModelFit fit = fit_model(d.moments, g);
    REQUIRE(fit.converged());
    const VectorXd est = flatten(*fit.theta), truth = flatten(theta);
    std::vector<double> se;
    for (const auto& b : fit.blocks) {
      for (Eigen::Index k = 0; k < b.standard_errors->beta.size(); ++k) se.push_back(b.standard_errors->beta(k));
      for (Eigen::Index k = 0; k < b.standard_errors->omega.size(); ++k) se.push_back(b.standard_errors->omega(k));
    }
    for (Eigen::Index k = 0; k < est.size(); ++k) CHECK(std::abs(est(k) - truth(k)) <= 4 * se[k]);
  }
}

TEST_CASE("university graph, four-vertex component from the identity start") {
  const ChainGraph g = testing::university_graph();
  const SimulatedData d = sample(g, {testing::university_theta(), 159, 20061016});
  const BlockFit fit = fit_component(d.moments, g, 1);
  CHECK(fit.converged());
  CHECK(fit.trace.back().score_norm <= 1e-8);
  CHECK(convergence_report(fit.trace, fit.slack).monotonicity_violations.empty());
  MESSAGE("iterations to convergence: " << fit.iterations());
}

TEST_CASE("multistart disclosure") {
  // Report the converged log-likelihood from ten random feasible starts; the
  // likelihood equations may have several roots, so equality is not asserted.
  const ChainGraph g = testing::university_graph();
  const SimulatedData d = sample(g, {testing::university_theta(), 159, 7});
  testing::Rng rng(65);
  std::ostringstream values;
  for (int start = 0; start < 10; ++start) {
    FitConfig cfg;
    cfg.omega_init = OmegaInit::user;
    cfg.user_omega[1] = testing::random_theta(rng, g).blocks[1].omega;
    const BlockFit fit = fit_component(d.moments, g, 1, cfg);
    CHECK(fit.status != FitStatus::likelihood_decrease);
    values << ' ' << std::setprecision(12) << fit.trace.back().loglik << (fit.converged() ? "" : "(nc)");
  }
  MESSAGE("converged log-likelihoods:" << values.str());
}

TEST_CASE("fit_model assembles the model-level report") {
  testing::Rng rng(66);
  for (int rep = 0; rep < 15; ++rep) {
    const Data d = simulated(rng, 3 + rep % 6, 80);
    const ModelFit fit = fit_model(d.sim.moments, d.g);
    REQUIRE(fit.converged());
    REQUIRE(fit.theta.has_value());
    double total = 0.0;
    for (const auto& maps : build_indicator_maps(d.g))
      total += block_loglik(d.sim.moments, maps, fit.theta->blocks[maps.component]);
    const double n = static_cast<double>(d.sim.moments.n());
    CHECK(*fit.loglik ==
          doctest::Approx(n * total - n * static_cast<double>(d.g.size()) / 2 * std::log(2 * M_PI)).epsilon(1e-12));
    CHECK(*fit.deviance == doctest::Approx(deviance(d.g, *fit.theta, d.sim.moments).value));
    CHECK(fit.df == model_dimension(d.g).df);
    CHECK(testing::rel_err(*fit.sigma_hat, sigma_from_params(d.g, *fit.theta)) == 0.0);
    for (const auto& b : fit.blocks) CHECK(b.standard_errors.has_value());
  }
}

TEST_CASE("fit_model accepts moments in any label order") {
  testing::Rng rng(67);
  const Data d = simulated(rng, 5, 60);
  std::vector<std::string> shuffled = d.g.graph().labels();
  std::reverse(shuffled.begin(), shuffled.end());
  const ModelFit a = fit_model(d.sim.moments, d.g);
  const ModelFit b = fit_model(d.sim.moments.reordered(shuffled), d.g);
  CHECK(flatten(*a.theta) == flatten(*b.theta));
}

TEST_CASE("standard errors: scalar case and agreement of information sources") {
  const ChainGraph single(MixedGraph::create({"v"}, {}, {}));
  const SampleMoments s = SampleMoments::from_covariance(MatrixXd::Constant(1, 1, 0.5), 100, {"v"});
  const ModelFit fit = fit_model(s, single);
  REQUIRE(fit.converged());
  const double w = fit.theta->blocks[0].omega(0);
  CHECK(w == doctest::Approx(2.0));
  CHECK(fit.blocks[0].standard_errors->omega(0) == doctest::Approx(std::sqrt(2 * w * w / 100)).epsilon(1e-12));

  // When the parents of a component form a saturated block, Sigma_hat equals
  // S on the parent block and both information sources agree.
  const ChainGraph g = testing::university_graph();
  const SimulatedData d = sample(g, {testing::university_theta(), 159, 3});
  const ModelFit uf = fit_model(d.moments, g);
  REQUIRE(uf.converged());
  const auto model = standard_errors(g, *uf.theta, 159, InformationSource::model);
  const auto sample_based = standard_errors(g, *uf.theta, 159, InformationSource::sample, &d.moments);
  CHECK(max_diff(model[1].beta, sample_based[1].beta) < 1e-10);
  CHECK(max_diff(model[1].omega, sample_based[1].omega) < 1e-10);
  CHECK_THROWS_AS(standard_errors(g, *uf.theta, 159, InformationSource::sample), DomainError);
}

TEST_CASE("rank-condition failures") {
  const ChainGraph g = testing::university_graph();
  const SimulatedData d = sample(g, {testing::university_theta(), 6, 5});
  CHECK_THROWS_AS(fit_component(d.moments, g, 1), RankError);
  const ModelFit fit = fit_model(d.moments, g);
  CHECK_FALSE(fit.converged());
  CHECK(fit.blocks[1].status == FitStatus::failed);
  CHECK(fit.blocks[1].diagnostic.find("n >= |tau| + |pa(tau)|") != std::string::npos);
  CHECK(fit.blocks[0].converged());
  CHECK_FALSE(fit.theta.has_value());
}

TEST_CASE("iteration cap is reported") {
  const ChainGraph g = testing::university_graph();
  const SimulatedData d = sample(g, {testing::university_theta(), 159, 9});
  FitConfig cfg;
  cfg.max_outer_iterations = 2;
  const BlockFit fit = fit_component(d.moments, g, 1, cfg);
  CHECK(fit.status == FitStatus::max_iterations);
  CHECK(fit.iterations() == 2);
  CHECK(std::string(to_string(fit.status)) == "max-iterations");
}

TEST_CASE("convergence report on constructed traces") {
  IterationTrace t = {{-3.0, 1.0, 1.0}, {-2.0, 0.1, 0.5}, {-2.5, 0.01, 0.25}, {-2.4, 0.001, 0.3}};
  const ConvergenceDiagnostics d = convergence_report(t, 1e-12);
  CHECK(d.iterations == 4);
  CHECK(d.monotonicity_violations == std::vector<std::size_t>{2});
  CHECK(d.final_score_norm == 0.001);
  CHECK_FALSE(d.cauchy_decreasing);
  CHECK(convergence_report({}).iterations == 0);
}
