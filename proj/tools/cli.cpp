#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "ampcg/error.hpp"
#include "ampcg/fit.hpp"
#include "ampcg/io.hpp"
#include "ampcg/sim.hpp"

namespace ampcg::cli {

namespace {

struct Options {
  std::string graph;
  std::string data;
  std::string cov;
  std::size_t n = 0;
  std::string out;
  std::string format = "text";
  double tol = 1e-8;
  int max_iter = 5000;
  std::string init = "identity";
  std::string info = "model";
  std::uint64_t seed = 1;
  bool no_center = false;
  std::string params;
  double identify_tol = 1e-8;
};

/// Writes to --out when given, otherwise to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

ChainGraph load_graph(const std::string& path) { return ChainGraph(io::read_graph_file(path)); }

int cmd_fit(const Options& o, std::ostream& out) {
  const ChainGraph g = load_graph(o.graph);
  if (o.data.empty() == o.cov.empty()) throw InputError("fit needs exactly one of --data or --cov");

  std::optional<SampleMoments> moments;
  if (!o.data.empty()) {
    io::DataTable t = io::read_data_csv(o.data);
    moments = SampleMoments::from_data(t.x, t.labels, !o.no_center);
  } else {
    if (o.n == 0) throw InputError("--cov requires --n");
    io::CovarianceTable t = io::read_covariance_csv(o.cov);
    moments = SampleMoments::from_covariance(t.s, o.n, t.labels);
  }
  const SampleMoments s = moments->reordered(g.graph().labels());

  FitConfig cfg;
  cfg.outer_tolerance = o.tol;
  cfg.max_outer_iterations = o.max_iter;
  cfg.omega_init = o.init == "diagonal" ? OmegaInit::diagonal : OmegaInit::identity;
  cfg.information = o.info == "sample" ? InformationSource::sample : InformationSource::model;

  io::FitReport report;
  report.graph = &g;
  report.n = s.n();
  report.fit = fit_model(s, g, cfg);
  for (const auto& b : report.fit.blocks) {
    if (b.status == FitStatus::failed && b.diagnostic.find("n >=") != std::string::npos) {
      throw RankError(b.diagnostic);
    }
  }
  try {
    report.two_step = two_step_model(s, g, cfg.ipf);
    report.two_step_deviance = deviance(g, *report.two_step, s).value;
  } catch (const Error&) {
    // reported as unavailable
  }

  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.stream() << std::setprecision(17) << io::report_to_json(report).dump(2) << '\n';
  } else {
    io::write_text_report(sink.stream(), report);
  }
  return report.fit.converged() ? kSuccess : kNotConverged;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ChainGraph g = load_graph(o.graph);
  if (o.n == 0) throw InputError("simulate requires --n > 0");
  std::ifstream in(o.params);
  if (!in) throw InputError("cannot open '" + o.params + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON in '") + o.params + "': " + e.what());
  }
  const ModelParameter theta = io::params_from_json(g, j);
  const SimulatedData data = sample(g, {theta, o.n, o.seed});
  Sink sink(o.out, out);
  io::write_data_csv(sink.stream(), g.graph().labels(), data.x);
  return kSuccess;
}

int cmd_identify(const Options& o, std::ostream& out) {
  const ChainGraph g = load_graph(o.graph);
  io::CovarianceTable t = io::read_covariance_csv(o.cov);
  const SampleMoments s = SampleMoments::from_covariance(t.s, o.n == 0 ? 1 : o.n, t.labels);
  const ModelParameter theta = identify_params(s.reordered(g.graph().labels()).s(), g, o.identify_tol);
  Sink sink(o.out, out);
  if (o.format == "json") {
    sink.stream() << std::setprecision(17) << io::params_to_json(g, theta).dump(2) << '\n';
  } else {
    const auto names = parameter_names(g);
    const Eigen::VectorXd flat = flatten(theta);
    for (std::size_t k = 0; k < names.size(); ++k) {
      sink.stream() << std::left << std::setw(28) << names[k] << std::right << std::fixed << std::setprecision(2)
                    << std::setw(9) << flat(static_cast<Eigen::Index>(k)) << '\n';
    }
  }
  return kSuccess;
}

int cmd_check_graph(const Options& o, std::ostream& out, std::ostream& err) {
  const MixedGraph mg = io::read_graph_file(o.graph);
  const ValidationResult res = validate_chain_graph(mg);
  if (!res.ok()) {
    err << "not a chain graph: " << res.message << '\n';
    return kInputError;
  }
  const ChainGraph g(mg);
  const ModelDimension dim = model_dimension(g);
  auto join = [&](const VertexList& vs) {
    std::string s;
    for (Vertex v : vs) s += (s.empty() ? "" : ", ") + mg.label(v);
    return "{" + s + "}";
  };
  out << "chain graph: " << mg.size() << " vertices, " << mg.directed_edges().size() << " directed and "
      << mg.undirected_edges().size() << " undirected edges\n";
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    out << "component " << c + 1 << ": " << join(g.component(c)) << "  parents " << join(g.parents_of_component(c))
        << "  p = " << dim.per_component[c].first << ", q = " << dim.per_component[c].second
        << (is_decomposable(g, g.component(c)) ? ", decomposable" : ", not decomposable") << '\n';
    out << "  cliques:";
    for (const auto& cl : maximal_cliques(g, g.component(c))) out << ' ' << join(cl);
    out << '\n';
  }
  out << "parameters " << dim.total << ", df " << dim.df << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum likelihood estimation in Gaussian AMP chain graph models"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "fit a chain graph model to data or a covariance matrix");
  fit->add_option("--graph", o.graph, "graph file")->required();
  fit->add_option("--data", o.data, "data CSV (header of labels, one row per observation)");
  fit->add_option("--cov", o.cov, "covariance or correlation CSV");
  fit->add_option("--n", o.n, "sample size for --cov");
  fit->add_option("--out", o.out, "output file (default stdout)");
  fit->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  fit->add_option("--tol", o.tol, "score tolerance")->check(CLI::PositiveNumber);
  fit->add_option("--max-iter", o.max_iter, "maximum outer iterations")->check(CLI::PositiveNumber);
  fit->add_option("--init", o.init, "starting concentration matrix")->check(CLI::IsMember({"identity", "diagonal"}));
  fit->add_option("--info", o.info, "Sigma for the Fisher information")->check(CLI::IsMember({"model", "sample"}));
  fit->add_option("--seed", o.seed, "unused by fit; accepted for symmetry with simulate");
  fit->add_flag("--no-center", o.no_center, "do not center data columns");

  auto* sim = app.add_subcommand("simulate", "draw data from a parameterized model");
  sim->add_option("--graph", o.graph, "graph file")->required();
  sim->add_option("--params", o.params, "parameter JSON")->required();
  sim->add_option("--n", o.n, "number of observations")->required();
  sim->add_option("--seed", o.seed, "random seed");
  sim->add_option("--out", o.out, "output CSV (default stdout)");

  auto* ident = app.add_subcommand("identify", "map a covariance matrix in the model to its parameters");
  ident->add_option("--graph", o.graph, "graph file")->required();
  ident->add_option("--cov", o.cov, "covariance CSV")->required();
  ident->add_option("--n", o.n, "sample size (unused)");
  ident->add_option("--tol", o.identify_tol, "relative tolerance for model membership");
  ident->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  ident->add_option("--out", o.out, "output file (default stdout)");

  auto* check = app.add_subcommand("check-graph", "validate a graph and list its chain components");
  check->add_option("--graph", o.graph, "graph file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*fit) return cmd_fit(o, out);
    if (*sim) return cmd_simulate(o, out);
    if (*ident) return cmd_identify(o, out);
    return cmd_check_graph(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace ampcg::cli
