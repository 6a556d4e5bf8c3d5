#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bap/graph.hpp"
#include "bap/ricf.hpp"
#include "bap/rng.hpp"

namespace bap {

struct SearchConfig {
  int restarts = 100;
  std::optional<int> max_in_degree;
  GraphClass graph_class = GraphClass::BAP;
  std::optional<int> neighbor_subset;  // per step, explore only this many neighbors
  std::uint64_t seed = 0;
  bool forward_only = false;  // additions only, started from the empty graph
  double min_improvement = 1e-12;
  std::optional<long> mcmc_burn_in;          // default d^4
  std::vector<MixedGraph> extra_starts;      // injected restart points
  int threads = 0;                           // 0 = OpenMP default
};

struct TraceEntry {
  int restart = 0;
  int step = 0;
  double seconds = 0.0;  // monotone clock since search start
  double score = 0.0;
  MixedGraph graph;
};

struct SearchTrace {
  std::vector<TraceEntry> entries;
  int skipped_restarts = 0;
};

struct SearchResult {
  MixedGraph best;
  double best_score = 0.0;
  FitResult fit;
  SearchTrace trace;
};

// Greedy hill climbing with random restarts; restarts run in an OpenMP work
// pool, per-restart RNG streams are derived from the seed so the result is
// independent of scheduling.
SearchResult greedy_search(const ScoringContext& ctx, const SearchConfig& cfg);

// Plain single-threaded loop over the same restart bodies; kept as the
// reference implementation for tests and benchmarks.
SearchResult greedy_search_serial(const ScoringContext& ctx, const SearchConfig& cfg);

// One move of the uniform-BAP Markov chain. Removal of a directed edge
// triggers only from its own ordered position, mirroring the addition move,
// which makes the transition matrix exactly symmetric.
MixedGraph mcmc_step(const MixedGraph& g, Rng& rng,
                     std::optional<int> max_in_degree = {});

// Deterministic single move for a given (position, coin) outcome.
MixedGraph mcmc_move(const MixedGraph& g, int i, int j, bool sigma,
                     std::optional<int> max_in_degree = {});

// Burn the chain in from the empty graph and return the state.
MixedGraph sample_uniform_bap(int d, Rng& rng, std::optional<int> max_in_degree = {},
                              std::optional<long> burn_in = {});

// Triangular-matrix sampling control: random order, then one of
// {none, directed, bidirected} per pair. Deliberately non-uniform.
MixedGraph sample_bap_naive(int d, Rng& rng);

// Exact single-step probability of the chain, by enumerating all
// (position, coin) outcomes. For testing symmetry and irreducibility.
double transition_probability(const MixedGraph& g, const MixedGraph& h,
                              std::optional<int> max_in_degree = {});

}  // namespace bap
