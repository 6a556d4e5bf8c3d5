#pragma once

#include <Eigen/Dense>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bap/graph.hpp"
#include "bap/model.hpp"

namespace bap {

struct RicfOptions {
  int max_iter = 10;    // sweep cap, matching the reference implementation
  double tol = 1e-8;    // max absolute parameter change between sweeps
  bool with_district_terms = true;  // fill FitResult::per_district
};

struct DistrictTerm {
  std::vector<int> vertices;
  double term = 0.0;
};

struct FitResult {
  Parameters theta;
  double loglik = 0.0;
  double score = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<DistrictTerm> per_district;
};

// Gaussian log-likelihood -(n/2) (log|2 pi Sigma| + ((n-1)/n) tr(Sigma^-1 S)).
double log_likelihood(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s, int n);

// Residual iterative conditional fitting for a BAP given the sample
// covariance S (divisor n-1) and sample count n. Non-convergence within
// max_iter is reported via converged=false; the capped result is returned.
FitResult ricf(const MixedGraph& g, const Eigen::MatrixXd& s, int n,
               const RicfOptions& opts = {});

// Concurrent district-term cache. Values for equal keys are equal, so
// last-write-wins races are benign.
class ScoreCache {
 public:
  std::optional<double> get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& key, double value) {
    std::unique_lock lock(mutex_);
    map_[key] = value;
  }
  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, double> map_;
};

// Stable fingerprint of a district submodel: vertex set, internal edges,
// parent set, and dataset identity determine the fitted term.
std::string cache_key(const MixedGraph& g, const std::vector<int>& district,
                      const std::string& dataset_id);

struct ScoringContext {
  Eigen::MatrixXd S;            // sample covariance, divisor n-1
  int n = 0;                    // sample count
  std::string dataset_id;       // distinguishes datasets in the cache
  RicfOptions ricf_opts;
  double penalty_multiplier = 1.0;  // 1.0 = the per-edge log(n) penalty as-is
  ScoreCache* cache = nullptr;      // optional shared cache
};

// District-decomposed maximum log-likelihood: each district is fitted on its
// vertices plus parents (parents kept as source nodes) and corrected by the
// fitted parent marginals. Returns the total and the per-district terms.
std::pair<double, std::vector<DistrictTerm>> decomposed_loglik(
    const MixedGraph& g, const ScoringContext& ctx);

// Penalized score s(G) = (max loglik - m * (#nodes + #edges) log n) / n,
// bidirected pairs counted once, computed via the district decomposition.
double score(const MixedGraph& g, const ScoringContext& ctx);

}  // namespace bap
