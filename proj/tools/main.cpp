#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bap/equivalence.hpp"
#include "bap/io.hpp"
#include "bap/pipeline.hpp"
#include "bap/search.hpp"

namespace {

using nlohmann::json;

void emit_json(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    bap::write_text(out_path, text);
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    bap::write_text(out_path, text);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  json j;
  in >> j;
  return j;
}

std::optional<int> cap_option(int value) {
  if (value < 0) return std::nullopt;
  return value;
}

bap::GraphClass parse_class(const std::string& name) {
  if (name == "dag") return bap::GraphClass::DAG;
  if (name == "bap") return bap::GraphClass::BAP;
  if (name == "apd") return bap::GraphClass::APD;
  throw CLI::ValidationError("--class must be one of dag, bap, apd");
}

// Dataset -> covariance scoring context, optionally standardized.
bap::ScoringContext make_context(const bap::Dataset& raw, bool standardized,
                                 double penalty, bap::ScoreCache* cache) {
  const bap::Dataset data = standardized ? bap::standardize(raw) : raw;
  bap::ScoringContext ctx;
  ctx.S = bap::covariance(data.X);
  ctx.n = static_cast<int>(data.X.rows());
  ctx.dataset_id = data.provenance + (standardized ? "|std" : "");
  ctx.penalty_multiplier = penalty;
  ctx.cache = cache;
  return ctx;
}

std::string one_line(const bap::MixedGraph& g) {
  std::ostringstream out;
  bool first = true;
  for (auto [i, j] : g.directed_edges()) {
    if (!first) out << ';';
    out << i << "->" << j;
    first = false;
  }
  for (auto [i, j] : g.bidirected_edges()) {
    if (!first) out << ';';
    out << i << "<->" << j;
    first = false;
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure learning for bow-free acyclic path diagrams"};
  app.require_subcommand(1);

  std::string data_path, graph_path, out_path, class_path, config_path, out_dir;
  std::string class_name = "bap";
  std::uint64_t seed = 0;
  int threads = 0;
  int restarts = 100;
  int max_in_degree = -1;
  int count = 1;
  int d = 3;
  long burn_in = -1;
  int neighbor_subset = -1;
  double penalty = 1.0;
  double epsilon = 1e-10;
  double min_improvement = 1e-12;
  double tol = 1e-8;
  int max_iter = 10;
  bool standardize_flag = false;
  bool no_standardize = false;
  bool forward_only = false;
  bool naive = false;
  bool serial = false;
  std::string roc_out;

  auto* fit = app.add_subcommand("fit", "Fit a given graph to a dataset via RICF");
  fit->add_option("--graph", graph_path, "Graph file")->required();
  fit->add_option("--data", data_path, "CSV dataset")->required();
  fit->add_flag("--standardize", standardize_flag, "Standardize columns first");
  fit->add_option("--penalty", penalty, "Penalty multiplier");
  fit->add_option("--max-iter", max_iter, "RICF sweep cap");
  fit->add_option("--tol", tol, "RICF convergence tolerance");
  fit->add_option("--out", out_path, "Output JSON path (default stdout)");

  auto* search = app.add_subcommand("search", "Greedy score search with restarts");
  search->add_option("--data", data_path, "CSV dataset")->required();
  search->add_option("--restarts", restarts, "Number of random restarts");
  search->add_option("--max-in-degree", max_in_degree, "Arrowhead cap (-1 = none)");
  search->add_option("--class", class_name, "Graph class: dag, bap, apd");
  search->add_option("--neighbor-subset", neighbor_subset,
                     "Neighbors explored per step (-1 = all)");
  search->add_option("--seed", seed, "RNG seed");
  search->add_option("--threads", threads, "Thread cap (0 = default)");
  search->add_flag("--forward-only", forward_only, "Additions only, from empty");
  search->add_option("--min-improvement", min_improvement, "Minimal score gain");
  search->add_option("--burn-in", burn_in, "MCMC burn-in (-1 = d^4)");
  search->add_option("--penalty", penalty, "Penalty multiplier");
  search->add_flag("--no-standardize", no_standardize, "Skip standardization");
  search->add_flag("--serial", serial, "Use the serial reference implementation");
  search->add_option("--out", out_path, "Output JSON path (default stdout)");

  auto* sample = app.add_subcommand("sample-bap", "Sample graphs uniformly");
  sample->add_option("--d", d, "Vertex count")->required();
  sample->add_option("--alpha", max_in_degree, "Arrowhead cap (-1 = none)");
  sample->add_option("--count", count, "Number of samples");
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--burn-in", burn_in, "MCMC burn-in (-1 = d^4)");
  sample->add_flag("--naive", naive, "Use the non-uniform control sampler");
  sample->add_option("--out-dir", out_dir, "Write graph files here (default stdout)");

  auto* equiv = app.add_subcommand("equiv-class", "Empirical equivalence class");
  equiv->add_option("--graph", graph_path, "Reference graph file")->required();
  equiv->add_option("--data", data_path, "CSV dataset")->required();
  equiv->add_option("--epsilon", epsilon, "Score tolerance");
  equiv->add_option("--penalty", penalty, "Penalty multiplier");
  equiv->add_flag("--standardize", standardize_flag, "Standardize columns first");
  equiv->add_option("--out", out_path, "Output JSON path (default stdout)");

  auto* effects = app.add_subcommand("effects", "Minimal absolute effects of a class");
  effects->add_option("--class", class_path, "Class JSON from equiv-class")->required();
  effects->add_option("--data", data_path, "CSV dataset")->required();
  effects->add_flag("--standardize", standardize_flag, "Standardize columns first");
  effects->add_option("--out", out_path, "Output CSV path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Run the simulation study");
  simulate->add_option("--config", config_path, "Simulation config JSON")->required();
  auto* sim_seed = simulate->add_option("--seed", seed, "Override config seed");
  auto* sim_threads = simulate->add_option("--threads", threads, "Override thread cap");
  simulate->add_option("--out", out_path, "Report JSON path (default stdout)");
  simulate->add_option("--roc-out", roc_out, "ROC CSV path");

  auto* enumerate = app.add_subcommand("enumerate", "List all BAPs on d vertices");
  enumerate->add_option("--d", d, "Vertex count (<= 4)")->required();
  enumerate->add_option("--max-in-degree", max_in_degree, "Arrowhead cap (-1 = none)");
  enumerate->add_option("--out", out_path, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      const bap::MixedGraph g = bap::read_graph(graph_path);
      bap::ScoringContext ctx = make_context(bap::read_csv(data_path),
                                             standardize_flag, penalty, nullptr);
      bap::RicfOptions opts;
      opts.max_iter = max_iter;
      opts.tol = tol;
      bap::FitResult res = bap::ricf(g, ctx.S, ctx.n, opts);
      res.score = bap::score(g, ctx);
      emit_json(bap::to_json(res), out_path);
    } else if (*search) {
      bap::ScoreCache cache;
      const bap::ScoringContext ctx = make_context(
          bap::read_csv(data_path), !no_standardize, penalty, &cache);
      bap::SearchConfig cfg;
      cfg.restarts = restarts;
      cfg.max_in_degree = cap_option(max_in_degree);
      cfg.graph_class = parse_class(class_name);
      cfg.neighbor_subset = neighbor_subset < 0 ? std::nullopt
                                                : std::optional<int>(neighbor_subset);
      cfg.seed = seed;
      cfg.forward_only = forward_only;
      cfg.min_improvement = min_improvement;
      if (burn_in >= 0) cfg.mcmc_burn_in = burn_in;
      cfg.threads = threads;
      const bap::SearchResult res =
          serial ? bap::greedy_search_serial(ctx, cfg) : bap::greedy_search(ctx, cfg);
      emit_json(bap::to_json(res), out_path);
    } else if (*sample) {
      bap::Rng rng(seed);
      std::ostringstream all;
      for (int k = 0; k < count; ++k) {
        bap::Rng stream = rng.stream(static_cast<std::uint64_t>(k));
        const bap::MixedGraph g =
            naive ? bap::sample_bap_naive(d, stream)
                  : bap::sample_uniform_bap(
                        d, stream, cap_option(max_in_degree),
                        burn_in >= 0 ? std::optional<long>(burn_in) : std::nullopt);
        if (out_dir.empty()) {
          all << "# sample " << k << "\n" << bap::format_graph(g) << "\n";
        } else {
          std::ostringstream name;
          name << "bap_" << std::setfill('0') << std::setw(4) << k << ".graph";
          bap::write_graph(std::filesystem::path(out_dir) / name.str(), g);
        }
      }
      if (out_dir.empty()) std::cout << all.str();
    } else if (*equiv) {
      const bap::MixedGraph g = bap::read_graph(graph_path);
      bap::ScoreCache cache;
      const bap::ScoringContext ctx = make_context(bap::read_csv(data_path),
                                                   standardize_flag, penalty, &cache);
      const bap::EquivalenceClass ec = bap::greedy_equivalence_class(g, ctx, epsilon);
      emit_json(bap::to_json(ec), out_path);
    } else if (*effects) {
      const bap::EquivalenceClass ec =
          bap::equivalence_class_from_json(read_json_file(class_path));
      bap::ScoreCache cache;
      const bap::Dataset raw = bap::read_csv(data_path);
      const bap::ScoringContext ctx =
          make_context(raw, standardize_flag, penalty, &cache);
      const bap::EffectBounds bounds = bap::min_abs_effects(ec, ctx);
      if (bounds.failed_members > 0)
        std::cerr << "warning: " << bounds.failed_members
                  << " class member(s) failed to fit and were excluded\n";
      std::ostringstream csv;
      csv.precision(17);
      for (std::size_t j = 0; j < raw.columns.size(); ++j)
        csv << (j ? "," : "") << raw.columns[j];
      csv << '\n';
      for (int i = 0; i < bounds.min_abs.rows(); ++i) {
        for (int j = 0; j < bounds.min_abs.cols(); ++j)
          csv << (j ? "," : "") << bounds.min_abs(i, j);
        csv << '\n';
      }
      emit_text(csv.str(), out_path);
    } else if (*simulate) {
      bap::SimulationConfig cfg =
          bap::simulation_config_from_json(read_json_file(config_path));
      if (!sim_seed->empty()) cfg.seed = seed;
      if (!sim_threads->empty()) cfg.threads = threads;
      const bap::SimulationReport report = bap::run_simulation(cfg);
      emit_json(bap::to_json(report), out_path);
      if (!roc_out.empty()) bap::write_text(roc_out, bap::roc_csv(report));
      if (report.mean_auc)
        std::cerr << "mean AUC: " << *report.mean_auc << "\n";
    } else if (*enumerate) {
      if (d > 4) throw std::runtime_error("enumerate supports d <= 4");
      std::ostringstream out;
      const auto graphs = bap::enumerate_baps(d, cap_option(max_in_degree));
      for (const bap::MixedGraph& g : graphs) out << one_line(g) << '\n';
      emit_text(out.str(), out_path);
      std::cerr << graphs.size() << " graphs\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
