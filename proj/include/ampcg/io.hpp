#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "ampcg/fit.hpp"
#include "ampcg/graph.hpp"
#include "ampcg/likelihood.hpp"
#include "ampcg/param.hpp"

namespace ampcg::io {

/// Graph file: one declaration per line, `node <label>`, `<u> -> <v>` or
/// `<u> -- <v>`; `#` starts a comment. Node lines fix the vertex order;
/// undeclared edge endpoints follow in order of first appearance.
/// Throws InputError (with line number) on syntax errors and StructuralError
/// for malformed graphs.
MixedGraph parse_graph(std::istream& in);
MixedGraph read_graph_file(const std::string& path);
std::string format_graph(const MixedGraph& g);

/// Data CSV: header of variable labels, one row per observation.
/// Returns labels and the |V| x n matrix.
struct DataTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd x;  // |V| x n
};
DataTable parse_data_csv(std::istream& in);
DataTable read_data_csv(const std::string& path);
void write_data_csv(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& x);

/// Square covariance CSV with a header row and a label column; the row
/// labels must repeat the header labels in order.
struct CovarianceTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd s;
};
CovarianceTable parse_covariance_csv(std::istream& in);
CovarianceTable read_covariance_csv(const std::string& path);
void write_covariance_csv(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& s);

/// Parameter tree: {"components": [{"vertices": [...], "beta": [{from, to,
/// value}], "omega": [{u, v, value}]}]}. Diagonal omega entries have u == v.
nlohmann::json params_to_json(const ChainGraph& g, const ModelParameter& theta);
nlohmann::json block_to_json(const ChainGraph& g, const IndicatorMap& maps, const Eigen::VectorXd& beta,
                             const Eigen::VectorXd& omega);
/// Accepts the tree above or a fit report (components carrying "params").
/// Throws InputError on unknown or missing entries.
ModelParameter params_from_json(const ChainGraph& g, const nlohmann::json& j);

/// Everything a fit report shows.
struct FitReport {
  const ChainGraph* graph = nullptr;
  std::size_t n = 0;
  ModelFit fit;
  std::optional<ModelParameter> two_step;
  std::optional<double> two_step_deviance;
};

nlohmann::json report_to_json(const FitReport& r);
/// Per-component estimate / SE / two-step tables with two decimals.
void write_text_report(std::ostream& out, const FitReport& r);

}  // namespace ampcg::io
