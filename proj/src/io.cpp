#include "bap/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bap {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int parse_vertex(const std::string& tok, int d, int line_no) {
  std::size_t used = 0;
  int v;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || v < 0 || v >= d)
    throw std::runtime_error("line " + std::to_string(line_no) +
                             ": bad vertex '" + tok + "'");
  return v;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  Dataset data;
  data.provenance = path.string();
  data.columns = split_commas(trim(line));
  const int d = static_cast<int>(data.columns.size());
  if (d == 0) fail(path, "header row has no columns");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::vector<std::string> cells = split_commas(t);
    if (static_cast<int>(cells.size()) != d)
      fail(path, "row " + std::to_string(line_no) + ": expected " +
                     std::to_string(d) + " cells, got " +
                     std::to_string(cells.size()));
    std::vector<double> row(d);
    for (int j = 0; j < d; ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[j].size() || !std::isfinite(v))
        fail(path, "row " + std::to_string(line_no) + ", column " +
                       std::to_string(j + 1) + " (" + data.columns[j] +
                       "): not numeric: '" + cells[j] + "'");
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  data.X.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j) data.X(static_cast<int>(i), j) = rows[i][j];
  return data;
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
               const std::vector<std::string>& columns) {
  if (static_cast<int>(columns.size()) != m.cols())
    throw std::invalid_argument("column name count does not match the matrix");
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ',';
    out << columns[j];
  }
  out << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  write_text(path, out.str());
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) throw std::invalid_argument("need at least two rows for a covariance");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return (centered.transpose() * centered) / double(n - 1);
}

Dataset standardize(const Dataset& data) {
  Dataset out = data;
  const int n = static_cast<int>(data.X.rows());
  if (n < 2) throw std::invalid_argument("need at least two rows to standardize");
  const Eigen::RowVectorXd mean = data.X.colwise().mean();
  out.X = data.X.rowwise() - mean;
  for (int j = 0; j < out.X.cols(); ++j) {
    const double sd = std::sqrt(out.X.col(j).squaredNorm() / double(n - 1));
    if (sd <= 0.0)
      throw std::invalid_argument("column " + std::to_string(j + 1) + " (" +
                                  data.columns[j] + ") is constant");
    out.X.col(j) /= sd;
  }
  out.standardized = true;
  return out;
}

MixedGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int d = -1;
  MixedGraph g;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    const auto hash = t.find('#');
    if (hash != std::string::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (d < 0) {
      if (t.rfind("d=", 0) != 0)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected 'd=<k>' header, got '" + t + "'");
      std::size_t used = 0;
      try {
        d = std::stoi(t.substr(2), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != t.size() - 2 || d < 0)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": bad vertex count in '" + t + "'");
      g = MixedGraph(d);
      continue;
    }
    std::istringstream es(t);
    std::string a, arrow, b, extra;
    es >> a >> arrow >> b;
    if (es >> extra || a.empty() || b.empty() || (arrow != "->" && arrow != "<->"))
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected 'i -> j' or 'i <-> j', got '" + t + "'");
    const int i = parse_vertex(a, d, line_no);
    const int j = parse_vertex(b, d, line_no);
    if (i == j || g.adjacent(i, j))
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": duplicate or self edge '" + t + "'");
    if (arrow == "->")
      g.add_directed(i, j);
    else
      g.add_bidirected(i, j);
  }
  if (d < 0) throw std::runtime_error("missing 'd=<k>' header");
  return g;
}

std::string format_graph(const MixedGraph& g) {
  std::ostringstream out;
  out << "d=" << g.num_vertices() << '\n';
  for (auto [i, j] : g.directed_edges()) out << i << " -> " << j << '\n';
  for (auto [i, j] : g.bidirected_edges()) out << i << " <-> " << j << '\n';
  return out.str();
}

MixedGraph read_graph(const std::filesystem::path& path) {
  try {
    return parse_graph(read_file(path));
  } catch (const std::runtime_error& e) {
    fail(path, e.what());
  }
}

void write_graph(const std::filesystem::path& path, const MixedGraph& g) {
  write_text(path, format_graph(g));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << text;
  if (!out) fail(path, "write failed");
}

}  // namespace bap
