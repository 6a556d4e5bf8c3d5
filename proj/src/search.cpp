#include "bap/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bap {

MixedGraph mcmc_move(const MixedGraph& g, int i, int j, bool sigma,
                     std::optional<int> max_in_degree) {
  MixedGraph next = g;
  if (g.has_directed(i, j) || g.has_bidirected(i, j)) {
    if (!sigma) {
      next.remove_directed(i, j);
      next.remove_bidirected(i, j);
    }
    return next;
  }
  if (g.has_directed(j, i)) return next;  // opposite orientation owns this pair
  if (!sigma) {
    next.add_directed(i, j);
    if (!is_acyclic(next)) return g;
    if (max_in_degree && next.in_degree(j) > *max_in_degree) return g;
    return next;
  }
  next.add_bidirected(i, j);
  if (max_in_degree &&
      (next.in_degree(i) > *max_in_degree || next.in_degree(j) > *max_in_degree))
    return g;
  return next;
}

MixedGraph mcmc_step(const MixedGraph& g, Rng& rng,
                     std::optional<int> max_in_degree) {
  const int d = g.num_vertices();
  if (d < 2) return g;
  const int idx = rng.uniform_int(d * (d - 1));
  const int i = idx / (d - 1);
  int j = idx % (d - 1);
  if (j >= i) ++j;
  const bool sigma = rng.bernoulli();
  return mcmc_move(g, i, j, sigma, max_in_degree);
}

MixedGraph sample_uniform_bap(int d, Rng& rng, std::optional<int> max_in_degree,
                              std::optional<long> burn_in) {
  if (d < 0) throw std::invalid_argument("vertex count must be nonnegative");
  MixedGraph g(d);
  const long steps =
      burn_in.value_or(static_cast<long>(d) * d * d * d);
  for (long s = 0; s < steps; ++s) g = mcmc_step(g, rng, max_in_degree);
  return g;
}

MixedGraph sample_bap_naive(int d, Rng& rng) {
  if (d < 0) throw std::invalid_argument("vertex count must be nonnegative");
  std::vector<int> perm(d);
  for (int v = 0; v < d; ++v) perm[v] = v;
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  MixedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      switch (rng.uniform_int(3)) {
        case 0:
          break;
        case 1:
          g.add_directed(perm[a], perm[b]);
          break;
        case 2:
          g.add_bidirected(perm[a], perm[b]);
          break;
      }
    }
  return g;
}

double transition_probability(const MixedGraph& g, const MixedGraph& h,
                              std::optional<int> max_in_degree) {
  const int d = g.num_vertices();
  if (h.num_vertices() != d)
    throw std::invalid_argument("graphs must share the vertex set");
  if (d < 2) return g == h ? 1.0 : 0.0;
  long count = 0;
  long total = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      for (bool sigma : {false, true}) {
        ++total;
        if (mcmc_move(g, i, j, sigma, max_in_degree) == h) ++count;
      }
    }
  return static_cast<double>(count) / static_cast<double>(total);
}

namespace {

using Clock = std::chrono::steady_clock;

struct RestartOutcome {
  bool ok = false;
  MixedGraph best;
  double score = 0.0;
  std::vector<TraceEntry> trace;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One hill climb from `start`; strict best-improvement moves, deterministic
// smallest-key tie-break.
RestartOutcome run_restart(const ScoringContext& ctx, const SearchConfig& cfg,
                           const MixedGraph& start, int restart_index, Rng rng,
                           Clock::time_point t0) {
  RestartOutcome out;
  MixedGraph current = start;
  double current_score;
  try {
    current_score = score(current, ctx);
  } catch (const std::exception&) {
    return out;  // unfittable start, restart is skipped
  }
  out.ok = true;
  int step = 0;
  out.trace.push_back(
      {restart_index, step, seconds_since(t0), current_score, current});

  while (true) {
    std::vector<MixedGraph> cands =
        neighbors(current, cfg.graph_class, cfg.max_in_degree);
    if (cfg.forward_only) {
      std::erase_if(cands, [&](const MixedGraph& c) {
        return c.num_edges() <= current.num_edges();
      });
    }
    if (cfg.neighbor_subset && static_cast<int>(cands.size()) > *cfg.neighbor_subset) {
      std::shuffle(cands.begin(), cands.end(), rng.engine());
      cands.resize(*cfg.neighbor_subset);
    }

    bool moved = false;
    MixedGraph best_cand;
    double best_score = current_score;
    std::string best_key;
    for (const MixedGraph& cand : cands) {
      double s;
      try {
        s = score(cand, ctx);
      } catch (const std::exception&) {
        continue;
      }
      if (s <= current_score + cfg.min_improvement) continue;
      const std::string k = cand.key();
      if (!moved || s > best_score || (s == best_score && k < best_key)) {
        moved = true;
        best_cand = cand;
        best_score = s;
        best_key = k;
      }
    }
    if (!moved) break;
    current = std::move(best_cand);
    current_score = best_score;
    out.trace.push_back(
        {restart_index, ++step, seconds_since(t0), current_score, current});
  }
  out.best = current;
  out.score = current_score;
  return out;
}

SearchResult run_search(const ScoringContext& ctx, const SearchConfig& cfg,
                        bool parallel) {
  if (cfg.restarts < 1) throw std::invalid_argument("need at least one restart");
  const int d = static_cast<int>(ctx.S.rows());
  const Rng root(cfg.seed);
  const auto t0 = Clock::now();

  const int units = cfg.restarts + static_cast<int>(cfg.extra_starts.size());
  std::vector<RestartOutcome> outcomes(units);

  auto body = [&](int u) {
    Rng rng = root.stream(static_cast<std::uint64_t>(u));
    MixedGraph start(d);
    if (u >= cfg.restarts) {
      start = cfg.extra_starts[u - cfg.restarts];
    } else if (!cfg.forward_only) {
      start = sample_uniform_bap(d, rng, cfg.max_in_degree, cfg.mcmc_burn_in);
      if (cfg.graph_class == GraphClass::DAG)
        for (auto [i, j] : start.bidirected_edges()) start.remove_bidirected(i, j);
    }
    outcomes[u] = run_restart(ctx, cfg, start, u, rng, t0);
  };

  if (parallel) {
#ifdef _OPENMP
    const int nthreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (int u = 0; u < units; ++u) body(u);
#else
    for (int u = 0; u < units; ++u) body(u);
#endif
  } else {
    for (int u = 0; u < units; ++u) body(u);
  }

  SearchResult res;
  bool have = false;
  for (int u = 0; u < units; ++u) {
    const RestartOutcome& o = outcomes[u];
    if (!o.ok) {
      ++res.trace.skipped_restarts;
      continue;
    }
    res.trace.entries.insert(res.trace.entries.end(), o.trace.begin(),
                             o.trace.end());
    if (!have || o.score > res.best_score ||
        (o.score == res.best_score && o.best.key() < res.best.key())) {
      have = true;
      res.best = o.best;
      res.best_score = o.score;
    }
  }
  if (!have) throw std::runtime_error("every restart failed to fit");
  res.fit = ricf(res.best, ctx.S, ctx.n, ctx.ricf_opts);
  return res;
}

}  // namespace

SearchResult greedy_search(const ScoringContext& ctx, const SearchConfig& cfg) {
  return run_search(ctx, cfg, true);
}

SearchResult greedy_search_serial(const ScoringContext& ctx,
                                  const SearchConfig& cfg) {
  return run_search(ctx, cfg, false);
}

}  // namespace bap
