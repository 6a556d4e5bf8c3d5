#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "bap/graph.hpp"

namespace bap {

struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd X;        // n rows, d columns
  std::string provenance;   // file path or simulation tag
  bool standardized = false;
};

// CSV with a header row; every cell must be numeric. Parse errors name the
// offending row and column.
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
               const std::vector<std::string>& columns);

// Sample covariance with divisor n-1.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x);

// Zero mean, unit variance per column.
Dataset standardize(const Dataset& data);

// Graph file format: optional `#` comment lines, a `d=<k>` header, then one
// edge per line as `i -> j` or `i <-> j`.
MixedGraph parse_graph(const std::string& text);
std::string format_graph(const MixedGraph& g);
MixedGraph read_graph(const std::filesystem::path& path);
void write_graph(const std::filesystem::path& path, const MixedGraph& g);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bap
