#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bap/equivalence.hpp"
#include "bap/io.hpp"
#include "bap/search.hpp"

namespace bap {

struct EffectBounds {
  Eigen::MatrixXd min_abs;   // entrywise minimum of |(I-B)^{-1}| over members
  int failed_members = 0;    // class members that did not fit, excluded
};

// Refits every class member on the data and takes the entrywise minimum of
// the absolute total-effect matrices. When reference_theta is given, the
// reference member uses those parameters instead of a refit.
EffectBounds min_abs_effects(const EquivalenceClass& ec, const ScoringContext& ctx,
                             const Parameters* reference_theta = nullptr);

struct RocResult {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), monotone in fpr
  std::optional<double> auc;                      // empty when no targets exist
};

// Targets are ordered pairs with a positive truth bound; negatives are pairs
// whose truth bound is zero in both directions (the two orientations of an
// edge exclude each other, so the remaining pairs are dropped). Pairs are
// ranked by the estimated bound; ties contribute averaged diagonal steps.
RocResult roc_auc(const EffectBounds& truth_bounds, const EffectBounds& est_bounds);

struct SimulationConfig {
  int replicates = 20;                   // N
  int d = 8;
  std::optional<int> max_in_degree = 2;  // alpha, applied to truth and search
  int n = 1000;
  int restarts = 30;                     // R, plus one forward search
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  int threads = 0;
  double penalty_multiplier = 1.0;
  bool truth_effects_from_true_theta = false;
};

struct ReplicateResult {
  int index = 0;
  bool ok = false;
  std::string error;
  MixedGraph truth;
  Parameters theta;
  MixedGraph estimate;
  double estimate_score = 0.0;
  EquivalenceClass truth_class;
  EquivalenceClass estimate_class;
  EffectBounds truth_bounds;
  EffectBounds estimate_bounds;
  RocResult roc;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<ReplicateResult> replicates;
  std::optional<double> mean_auc;
  std::vector<std::pair<double, double>> average_roc;  // pointwise mean on an fpr grid
};

// The simulation study: per replicate, sample a truth BAP and parameters,
// draw data, search, build both equivalence classes, bound effects, and score
// the ROC. Replicate failures are recorded and the run continues. Replicates
// run in an OpenMP pool with per-replicate RNG streams, so the report is
// deterministic for a fixed seed.
SimulationReport run_simulation(const SimulationConfig& cfg);

struct FitDatasetConfig {
  int bap_restarts = 100;
  int dag_restarts = 100;
  std::optional<int> max_in_degree;
  std::uint64_t seed = 0;
  int threads = 0;
  bool standardize = true;
  bool log_transform = false;
  double penalty_multiplier = 1.0;
};

struct FitComparison {
  SearchResult dag;
  SearchResult bap;  // best DAG injected as an extra restart point
};

FitComparison fit_dataset(const Dataset& data, const FitDatasetConfig& cfg);

// JSON views (all report objects carry schema_version).
nlohmann::json to_json(const MixedGraph& g);
nlohmann::json to_json(const Parameters& theta);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const EquivalenceClass& ec);
nlohmann::json to_json(const SearchResult& res, bool include_trace = true);
nlohmann::json to_json(const SimulationReport& report);
nlohmann::json to_json(const FitComparison& cmp);

SimulationConfig simulation_config_from_json(const nlohmann::json& j);
MixedGraph graph_from_json(const nlohmann::json& j);
EquivalenceClass equivalence_class_from_json(const nlohmann::json& j);

// Per-replicate ROC points plus the pointwise average, for external plotting.
std::string roc_csv(const SimulationReport& report);

}  // namespace bap
