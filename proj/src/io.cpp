#include "ampcg/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ampcg/error.hpp"
#include "ampcg/sim.hpp"

namespace ampcg::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& cell, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE) {
    throw InputError("line " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
  return v;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

bool blank_or_comment(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

MixedGraph parse_graph(std::istream& in) {
  std::vector<std::string> nodes;
  std::vector<LabelPair> directed, undirected;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() == 2 && tok[0] == "node") {
      nodes.push_back(tok[1]);
    } else if (tok.size() == 3 && tok[1] == "->") {
      directed.emplace_back(tok[0], tok[2]);
    } else if (tok.size() == 3 && tok[1] == "--") {
      undirected.emplace_back(tok[0], tok[2]);
    } else {
      throw InputError("graph line " + std::to_string(lineno) + ": expected 'node <label>', '<u> -> <v>' or '<u> -- <v>'");
    }
  }
  // endpoints not declared with `node` are appended in order of appearance
  auto declare = [&](const std::string& l) {
    if (std::find(nodes.begin(), nodes.end(), l) == nodes.end()) nodes.push_back(l);
  };
  for (const auto& [u, v] : directed) declare(u), declare(v);
  for (const auto& [u, v] : undirected) declare(u), declare(v);
  return MixedGraph::create(std::move(nodes), directed, undirected);
}

MixedGraph read_graph_file(const std::string& path) {
  auto in = open(path);
  return parse_graph(in);
}

std::string format_graph(const MixedGraph& g) {
  std::ostringstream os;
  for (const auto& l : g.labels()) os << "node " << l << '\n';
  for (auto [u, v] : g.directed_edges()) os << g.label(u) << " -> " << g.label(v) << '\n';
  for (auto [u, v] : g.undirected_edges()) os << g.label(u) << " -- " << g.label(v) << '\n';
  return os.str();
}

DataTable parse_data_csv(std::istream& in) {
  DataTable t;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    auto cells = split_csv(line);
    if (t.labels.empty()) {
      t.labels = std::move(cells);
      continue;
    }
    if (cells.size() != t.labels.size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.labels.size()) +
                       " values, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, lineno));
    rows.push_back(std::move(row));
  }
  if (t.labels.empty()) throw InputError("data file has no header");
  t.x.resize(static_cast<Eigen::Index>(t.labels.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < t.labels.size(); ++i) t.x(i, j) = rows[j][i];
  }
  return t;
}

DataTable read_data_csv(const std::string& path) {
  auto in = open(path);
  return parse_data_csv(in);
}

void write_data_csv(std::ostream& out, const std::vector<std::string>& labels, const MatrixXd& x) {
  for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out << (i ? "," : "") << x(i, j);
    out << '\n';
  }
}

CovarianceTable parse_covariance_csv(std::istream& in) {
  CovarianceTable t;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    auto cells = split_csv(line);
    if (t.labels.empty()) {
      if (cells.size() < 2) throw InputError("covariance header needs a corner cell and at least one label");
      t.labels.assign(cells.begin() + 1, cells.end());
      continue;
    }
    if (cells.size() != t.labels.size() + 1) {
      throw InputError("line " + std::to_string(lineno) + ": expected a label and " +
                       std::to_string(t.labels.size()) + " values");
    }
    if (rows.size() >= t.labels.size()) throw InputError("line " + std::to_string(lineno) + ": too many rows");
    if (cells[0] != t.labels[rows.size()]) {
      throw InputError("line " + std::to_string(lineno) + ": row label '" + cells[0] + "' does not match column '" +
                       t.labels[rows.size()] + "'");
    }
    std::vector<double> row;
    for (std::size_t k = 1; k < cells.size(); ++k) row.push_back(parse_number(cells[k], lineno));
    rows.push_back(std::move(row));
  }
  if (t.labels.empty() || rows.size() != t.labels.size()) throw InputError("covariance matrix is not square");
  const auto p = static_cast<Eigen::Index>(t.labels.size());
  t.s.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) t.s(i, j) = rows[i][j];
  }
  return t;
}

CovarianceTable read_covariance_csv(const std::string& path) {
  auto in = open(path);
  return parse_covariance_csv(in);
}

void write_covariance_csv(std::ostream& out, const std::vector<std::string>& labels, const MatrixXd& s) {
  out << std::setprecision(17);
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    out << labels[i];
    for (Eigen::Index j = 0; j < s.cols(); ++j) out << ',' << s(i, j);
    out << '\n';
  }
}

json block_to_json(const ChainGraph& g, const IndicatorMap& maps, const VectorXd& beta, const VectorXd& omega) {
  const MixedGraph& mg = g.graph();
  json b = json::array();
  for (std::size_t k = 0; k < maps.p(); ++k) {
    const auto [i, j] = maps.beta_entries[k];
    b.push_back({{"from", mg.label(maps.parents[j])}, {"to", mg.label(maps.vertices[i])}, {"value", beta(k)}});
  }
  json w = json::array();
  for (std::size_t k = 0; k < maps.q(); ++k) {
    const auto [i, j] = maps.omega_entries[k];
    w.push_back({{"u", mg.label(maps.vertices[i])}, {"v", mg.label(maps.vertices[j])}, {"value", omega(k)}});
  }
  return {{"beta", std::move(b)}, {"omega", std::move(w)}};
}

namespace {

json labels_of(const MixedGraph& g, const VertexList& vs) {
  json a = json::array();
  for (Vertex v : vs) a.push_back(g.label(v));
  return a;
}

}  // namespace

json params_to_json(const ChainGraph& g, const ModelParameter& theta) {
  json comps = json::array();
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    json entry = block_to_json(g, maps, theta.blocks.at(c).beta, theta.blocks.at(c).omega);
    entry["vertices"] = labels_of(g.graph(), maps.vertices);
    comps.push_back(std::move(entry));
  }
  return {{"components", std::move(comps)}};
}

ModelParameter params_from_json(const ChainGraph& g, const json& j) {
  const MixedGraph& mg = g.graph();
  if (!j.is_object() || !j.contains("components") || !j["components"].is_array()) {
    throw InputError("parameter file needs a 'components' array");
  }
  const std::vector<IndicatorMap> maps = build_indicator_maps(g);
  ModelParameter theta;
  std::vector<std::vector<bool>> seen_b, seen_w;
  for (const auto& m : maps) {
    theta.blocks.push_back({m.component, VectorXd::Zero(m.p()), VectorXd::Zero(m.q())});
    seen_b.emplace_back(m.p(), false);
    seen_w.emplace_back(m.q(), false);
  }
  auto position = [](Vertex v, const VertexList& list) {
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), v) - list.begin());
  };

  try {
    for (const auto& comp : j["components"]) {
      const json& src = comp.contains("params") ? comp["params"] : comp;
      for (const auto& e : src.value("beta", json::array())) {
        const Vertex from = mg.index(e.at("from").get<std::string>());
        const Vertex to = mg.index(e.at("to").get<std::string>());
        if (!mg.has_directed(from, to)) {
          throw InputError("beta entry " + mg.label(from) + " -> " + mg.label(to) + " is not an edge");
        }
        const std::size_t c = g.decomposition().component_of[to];
        const IndicatorMap& m = maps[c];
        const std::pair<std::size_t, std::size_t> key{position(to, m.vertices), position(from, m.parents)};
        const auto k = static_cast<std::size_t>(std::find(m.beta_entries.begin(), m.beta_entries.end(), key) -
                                                m.beta_entries.begin());
        theta.blocks[c].beta(k) = e.at("value").get<double>();
        seen_b[c][k] = true;
      }
      for (const auto& e : src.value("omega", json::array())) {
        Vertex u = mg.index(e.at("u").get<std::string>());
        Vertex v = mg.index(e.at("v").get<std::string>());
        if (u != v && !mg.has_undirected(u, v)) {
          throw InputError("omega entry " + mg.label(u) + " -- " + mg.label(v) + " is not an edge");
        }
        const std::size_t c = g.decomposition().component_of[u];
        const IndicatorMap& m = maps[c];
        std::size_t i = position(u, m.vertices);
        std::size_t jj = position(v, m.vertices);
        if (i > jj) std::swap(i, jj);
        const auto k = static_cast<std::size_t>(
            std::find(m.omega_entries.begin(), m.omega_entries.end(), std::make_pair(i, jj)) - m.omega_entries.begin());
        theta.blocks[c].omega(k) = e.at("value").get<double>();
        seen_w[c][k] = true;
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed parameter entry: ") + e.what());
  } catch (const StructuralError& e) {
    throw InputError(e.what());
  }

  for (std::size_t c = 0; c < maps.size(); ++c) {
    for (std::size_t k = 0; k < maps[c].p(); ++k) {
      if (!seen_b[c][k]) {
        const auto [i, jj] = maps[c].beta_entries[k];
        throw InputError("missing beta entry " + mg.label(maps[c].parents[jj]) + " -> " + mg.label(maps[c].vertices[i]));
      }
    }
    for (std::size_t k = 0; k < maps[c].q(); ++k) {
      if (!seen_w[c][k]) {
        const auto [i, jj] = maps[c].omega_entries[k];
        throw InputError("missing omega entry (" + mg.label(maps[c].vertices[i]) + ", " +
                         mg.label(maps[c].vertices[jj]) + ")");
      }
    }
  }
  return theta;
}

json report_to_json(const FitReport& r) {
  const ChainGraph& g = *r.graph;
  const MixedGraph& mg = g.graph();
  json graph{{"vertices", mg.labels()}, {"directed", json::array()}, {"undirected", json::array()}};
  for (auto [u, v] : mg.directed_edges()) graph["directed"].push_back({mg.label(u), mg.label(v)});
  for (auto [u, v] : mg.undirected_edges()) graph["undirected"].push_back({mg.label(u), mg.label(v)});

  json comps = json::array();
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    const BlockFit& b = r.fit.blocks.at(c);
    const ConvergenceDiagnostics diag = convergence_report(b.trace, b.slack);
    json entry{{"vertices", labels_of(mg, maps.vertices)},
               {"parents", labels_of(mg, maps.parents)},
               {"p", maps.p()},
               {"q", maps.q()},
               {"iterations", b.iterations()},
               {"converged", b.converged()},
               {"status", to_string(b.status)},
               {"final_score_norm", diag.final_score_norm},
               {"monotonicity_violations", diag.monotonicity_violations.size()},
               {"cauchy_decreasing", diag.cauchy_decreasing}};
    if (b.status != FitStatus::failed) entry["params"] = block_to_json(g, maps, b.params.beta, b.params.omega);
    if (b.standard_errors) {
      entry["standard_errors"] = block_to_json(g, maps, b.standard_errors->beta, b.standard_errors->omega);
    }
    if (r.two_step) {
      entry["two_step"] = block_to_json(g, maps, r.two_step->blocks.at(c).beta, r.two_step->blocks.at(c).omega);
    }
    if (!b.diagnostic.empty()) entry["diagnostic"] = b.diagnostic;
    comps.push_back(std::move(entry));
  }

  json out{{"graph", std::move(graph)}, {"n", r.n}, {"components", std::move(comps)}, {"df", r.fit.df}};
  out["loglik"] = r.fit.loglik ? json(*r.fit.loglik) : json(nullptr);
  out["deviance"] = r.fit.deviance ? json(*r.fit.deviance) : json(nullptr);
  if (r.two_step_deviance) out["two_step_deviance"] = *r.two_step_deviance;
  if (r.fit.sigma_hat) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.fit.sigma_hat->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < r.fit.sigma_hat->cols(); ++j) row.push_back((*r.fit.sigma_hat)(i, j));
      rows.push_back(std::move(row));
    }
    out["sigma_hat"] = {{"labels", mg.labels()}, {"matrix", std::move(rows)}};
  }
  return out;
}

void write_text_report(std::ostream& out, const FitReport& r) {
  const ChainGraph& g = *r.graph;
  const MixedGraph& mg = g.graph();
  auto join = [&](const VertexList& vs) {
    std::string s;
    for (Vertex v : vs) s += (s.empty() ? "" : ", ") + mg.label(v);
    return "{" + s + "}";
  };
  const std::vector<std::string> names = parameter_names(g);
  std::size_t name_pos = 0;
  auto cell = [](std::ostream& os, const std::optional<double>& v) {
    if (v) {
      os << std::setw(9) << std::fixed << std::setprecision(2) << *v;
    } else {
      os << std::setw(9) << "-";
    }
  };

  out << "n = " << r.n << "\n";
  for (std::size_t c = 0; c < g.component_count(); ++c) {
    const IndicatorMap maps = build_indicator_maps(g, c);
    const BlockFit& b = r.fit.blocks.at(c);
    const ConvergenceDiagnostics diag = convergence_report(b.trace, b.slack);
    out << "\ncomponent " << c + 1 << ": " << join(maps.vertices) << "  parents " << join(maps.parents) << "\n";
    out << "  p = " << maps.p() << ", q = " << maps.q() << ", iterations = " << b.iterations() << ", "
        << to_string(b.status) << std::scientific << std::setprecision(1) << ", score = " << diag.final_score_norm
        << ", monotonicity violations = " << diag.monotonicity_violations.size() << "\n";
    if (!b.diagnostic.empty()) out << "  note: " << b.diagnostic << "\n";
    out << "  " << std::left << std::setw(28) << "parameter" << std::right << std::setw(9) << "MLE" << std::setw(9)
        << "SE" << std::setw(9) << "2-step" << "\n";
    const std::size_t d = maps.p() + maps.q();
    for (std::size_t k = 0; k < d; ++k) {
      const bool is_beta = k < maps.p();
      const std::size_t idx = is_beta ? k : k - maps.p();
      auto pick = [&](const VectorXd& bv, const VectorXd& wv) -> std::optional<double> {
        const VectorXd& v = is_beta ? bv : wv;
        if (static_cast<std::size_t>(v.size()) <= idx) return std::nullopt;
        return v(static_cast<Eigen::Index>(idx));
      };
      out << "  " << std::left << std::setw(28) << names[name_pos + k] << std::right;
      cell(out, b.status == FitStatus::failed ? std::nullopt : pick(b.params.beta, b.params.omega));
      cell(out, b.standard_errors ? pick(b.standard_errors->beta, b.standard_errors->omega) : std::nullopt);
      cell(out, r.two_step ? pick(r.two_step->blocks[c].beta, r.two_step->blocks[c].omega) : std::nullopt);
      out << "\n";
    }
    name_pos += d;
  }
  out << std::fixed << std::setprecision(2) << "\n";
  if (r.fit.loglik) out << "log-likelihood " << *r.fit.loglik << "\n";
  if (r.fit.deviance) {
    out << "deviance " << *r.fit.deviance << " on " << r.fit.df << " df";
    if (r.two_step_deviance) out << " (two-step " << *r.two_step_deviance << ")";
    out << "\n";
  } else {
    out << "deviance unavailable; df " << r.fit.df << "\n";
  }
}

}  // namespace ampcg::io
