#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "doctest.h"

#include "bap/ricf.hpp"
#include "bap/rng.hpp"
#include "bap/search.hpp"
#include "oracles.hpp"

using bap::MixedGraph;

namespace {

// 99th percentile of the chi-square distribution.
constexpr double kChiSq61_99 = 89.59134449068712;

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / double(x.rows() - 1);
}

double chi_square_statistic(const std::map<std::string, int>& counts,
                            int categories, int samples) {
  const double expected = double(samples) / categories;
  double stat = 0.0;
  int seen = 0;
  for (const auto& [key, c] : counts) {
    stat += (c - expected) * (c - expected) / expected;
    ++seen;
  }
  stat += (categories - seen) * expected;  // empty categories
  return stat;
}

bap::ScoringContext make_ctx(const Eigen::MatrixXd& s, int n, const std::string& id,
                             bap::ScoreCache* cache = nullptr) {
  bap::ScoringContext ctx;
  ctx.S = s;
  ctx.n = n;
  ctx.dataset_id = id;
  ctx.cache = cache;
  return ctx;
}

}  // namespace

TEST_CASE("single-move semantics") {
  MixedGraph g(3);
  g.add_directed(0, 1);

  // Removal triggers only from the edge's own ordered position.
  CHECK(bap::mcmc_move(g, 0, 1, false, {}).num_edges() == 0);
  CHECK(bap::mcmc_move(g, 1, 0, false, {}) == g);  // opposite position: no-op
  CHECK(bap::mcmc_move(g, 0, 1, true, {}) == g);   // occupied pair, sigma=1: no-op

  // Additions on a free pair.
  const MixedGraph with_dir = bap::mcmc_move(g, 1, 2, false, {});
  CHECK(with_dir.has_directed(1, 2));
  const MixedGraph with_bidir = bap::mcmc_move(g, 1, 2, true, {});
  CHECK(with_bidir.has_bidirected(1, 2));

  // A cycle-creating addition is a no-op.
  MixedGraph chain = oracle::chain3();
  CHECK(bap::mcmc_move(chain, 2, 0, false, {}) == chain);

  // Bidirected removal triggers from both ordered positions.
  MixedGraph b(3);
  b.add_bidirected(0, 1);
  CHECK(bap::mcmc_move(b, 0, 1, false, {}).num_edges() == 0);
  CHECK(bap::mcmc_move(b, 1, 0, false, {}).num_edges() == 0);

  // The arrowhead cap turns violating additions into no-ops.
  MixedGraph capped(3);
  capped.add_directed(0, 2);
  CHECK(bap::mcmc_move(capped, 1, 2, false, 1) == capped);
  CHECK(bap::mcmc_move(capped, 1, 2, true, 1) == capped);
  CHECK(bap::mcmc_move(capped, 2, 1, false, 1).has_directed(2, 1));
}

TEST_CASE("transition matrices on d=2 and d=3 are symmetric and irreducible") {
  for (int d : {2, 3}) {
    const auto states = bap::enumerate_baps(d);
    const int m = static_cast<int>(states.size());
    Eigen::MatrixXd p(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        p(a, b) = bap::transition_probability(states[a], states[b], {});

    for (int a = 0; a < m; ++a) {
      CHECK(p.row(a).sum() == doctest::Approx(1.0));
      for (int b = a + 1; b < m; ++b) CHECK(p(a, b) == doctest::Approx(p(b, a)));
    }

    // Reachability of every state from the empty graph.
    std::queue<int> q;
    std::vector<char> seen(m, 0);
    int empty_idx = -1;
    for (int a = 0; a < m; ++a)
      if (states[a].num_edges() == 0) empty_idx = a;
    REQUIRE(empty_idx >= 0);
    seen[empty_idx] = 1;
    q.push(empty_idx);
    int reached = 0;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      ++reached;
      for (int b = 0; b < m; ++b)
        if (!seen[b] && p(a, b) > 0) {
          seen[b] = 1;
          q.push(b);
        }
    }
    CHECK(reached == m);
  }
}

TEST_CASE("one-edge transition probabilities") {
  const double p = 1.0 / (3 * 2);  // one position out of d(d-1)
  MixedGraph empty(3);
  MixedGraph dir(3);
  dir.add_directed(0, 1);
  MixedGraph bidir(3);
  bidir.add_bidirected(0, 1);

  CHECK(bap::transition_probability(empty, dir, {}) == doctest::Approx(p / 2));
  CHECK(bap::transition_probability(dir, empty, {}) == doctest::Approx(p / 2));
  CHECK(bap::transition_probability(empty, bidir, {}) == doctest::Approx(p));
  CHECK(bap::transition_probability(bidir, empty, {}) == doctest::Approx(p));
  CHECK(bap::transition_probability(dir, bidir, {}) == doctest::Approx(0.0));
}

TEST_CASE("symmetry holds for every one-edge pair of 3-node BAPs") {
  const auto states = bap::enumerate_baps(3);
  for (std::size_t a = 0; a < states.size(); ++a)
    for (std::size_t b = a + 1; b < states.size(); ++b) {
      const double ab = bap::transition_probability(states[a], states[b], {});
      const double ba = bap::transition_probability(states[b], states[a], {});
      CHECK(ab == doctest::Approx(ba));
    }
}

TEST_CASE("MCMC sampler is uniform over the 62 3-node BAPs; the naive one is not") {
  const int samples = 30000;
  bap::Rng rng(101);

  std::map<std::string, int> mcmc_counts;
  for (int k = 0; k < samples; ++k) {
    bap::Rng stream = rng.stream(static_cast<std::uint64_t>(k));
    mcmc_counts[bap::sample_uniform_bap(3, stream).key()]++;
  }
  const double mcmc_stat = chi_square_statistic(mcmc_counts, 62, samples);
  CHECK(mcmc_stat < kChiSq61_99);

  std::map<std::string, int> naive_counts;
  bap::Rng nrng(102);
  for (int k = 0; k < samples; ++k) {
    bap::Rng stream = nrng.stream(static_cast<std::uint64_t>(k));
    naive_counts[bap::sample_bap_naive(3, stream).key()]++;
  }
  const double naive_stat = chi_square_statistic(naive_counts, 62, samples);
  CHECK(naive_stat > kChiSq61_99);
}

TEST_CASE("sampled graphs respect the arrowhead cap") {
  bap::Rng rng(103);
  for (int k = 0; k < 200; ++k) {
    const MixedGraph g = bap::sample_uniform_bap(5, rng, 2);
    for (int v = 0; v < 5; ++v) CHECK(g.in_degree(v) <= 2);
  }
}

TEST_CASE("capped MCMC is uniform over the capped state space") {
  const auto states = bap::enumerate_baps(3, 1);
  const int m = static_cast<int>(states.size());
  bap::Rng rng(104);
  std::map<std::string, int> counts;
  const int samples = 20000;
  for (int k = 0; k < samples; ++k) {
    bap::Rng stream = rng.stream(static_cast<std::uint64_t>(k));
    counts[bap::sample_uniform_bap(3, stream, 1).key()]++;
  }
  CHECK(static_cast<int>(counts.size()) == m);
  // Loose uniformity check: all counts within 20% of the expectation.
  const double expected = double(samples) / m;
  for (const auto& [key, c] : counts) {
    CHECK(c > 0.8 * expected);
    CHECK(c < 1.2 * expected);
  }
}

TEST_CASE("parallel and serial searches return identical results") {
  bap::Rng rng(105);
  const MixedGraph truth = bap::sample_uniform_bap(5, rng, 2);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 800, rng));

  bap::SearchConfig cfg;
  cfg.restarts = 8;
  cfg.max_in_degree = 2;
  cfg.seed = 77;
  cfg.threads = 4;

  bap::ScoreCache c1, c2, c3;
  const auto serial = bap::greedy_search_serial(make_ctx(s, 800, "p1", &c1), cfg);
  const auto parallel = bap::greedy_search(make_ctx(s, 800, "p1", &c2), cfg);
  const auto again = bap::greedy_search(make_ctx(s, 800, "p1", &c3), cfg);

  CHECK(serial.best == parallel.best);
  CHECK(serial.best_score == parallel.best_score);
  CHECK(parallel.best == again.best);
  CHECK(parallel.best_score == again.best_score);
  CHECK(serial.trace.entries.size() == parallel.trace.entries.size());
}

TEST_CASE("each trace is a strictly improving staircase") {
  bap::Rng rng(106);
  const MixedGraph truth = bap::sample_uniform_bap(4, rng);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 500, rng));

  bap::SearchConfig cfg;
  cfg.restarts = 5;
  cfg.seed = 3;
  const auto res = bap::greedy_search_serial(make_ctx(s, 500, "stair"), cfg);
  CHECK(!res.trace.entries.empty());
  for (std::size_t k = 1; k < res.trace.entries.size(); ++k) {
    const auto& prev = res.trace.entries[k - 1];
    const auto& cur = res.trace.entries[k];
    if (cur.restart == prev.restart) {
      CHECK(cur.step == prev.step + 1);
      CHECK(cur.score > prev.score);
      CHECK(cur.seconds >= prev.seconds);
    }
  }
  // The reported best matches the best trace entry.
  double best = -1e300;
  for (const auto& e : res.trace.entries) best = std::max(best, e.score);
  CHECK(res.best_score == doctest::Approx(best));
}

TEST_CASE("greedy search recovers the exhaustive optimum on d=3 problems") {
  bap::Rng rng(107);
  const auto all = bap::enumerate_baps(3);
  int hits = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const MixedGraph truth = bap::sample_uniform_bap(3, rng);
    const bap::Parameters theta = bap::sample_parameters(truth, rng);
    const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 5000, rng));
    bap::ScoreCache cache;
    const auto ctx = make_ctx(s, 5000, "ex" + std::to_string(t), &cache);

    double best = -1e300;
    for (const MixedGraph& g : all) best = std::max(best, bap::score(g, ctx));

    bap::SearchConfig cfg;
    cfg.restarts = 20;
    cfg.seed = 1000 + t;
    const auto res = bap::greedy_search_serial(ctx, cfg);
    if (std::abs(res.best_score - best) <= 1e-8) ++hits;
  }
  CHECK(hits >= trials - 1);
}

TEST_CASE("forward-only search starts empty and only adds edges") {
  bap::Rng rng(108);
  const MixedGraph truth = bap::sample_uniform_bap(4, rng);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 600, rng));

  bap::SearchConfig cfg;
  cfg.restarts = 1;
  cfg.forward_only = true;
  cfg.seed = 5;
  const auto res = bap::greedy_search_serial(make_ctx(s, 600, "fwd"), cfg);
  REQUIRE(!res.trace.entries.empty());
  CHECK(res.trace.entries.front().graph.num_edges() == 0);
  for (std::size_t k = 1; k < res.trace.entries.size(); ++k)
    CHECK(res.trace.entries[k].graph.num_edges() ==
          res.trace.entries[k - 1].graph.num_edges() + 1);
}

TEST_CASE("DAG-restricted search returns DAGs") {
  bap::Rng rng(109);
  const MixedGraph truth = bap::sample_uniform_bap(4, rng);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 600, rng));

  bap::SearchConfig cfg;
  cfg.restarts = 4;
  cfg.graph_class = bap::GraphClass::DAG;
  cfg.seed = 6;
  const auto res = bap::greedy_search_serial(make_ctx(s, 600, "dag"), cfg);
  CHECK(bap::is_dag(res.best));
  for (const auto& e : res.trace.entries) CHECK(bap::is_dag(e.graph));
}

TEST_CASE("neighbor subsetting still returns a valid local search result") {
  bap::Rng rng(110);
  const MixedGraph truth = bap::sample_uniform_bap(4, rng);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 600, rng));

  bap::SearchConfig cfg;
  cfg.restarts = 4;
  cfg.neighbor_subset = 5;
  cfg.seed = 8;
  const auto res = bap::greedy_search_serial(make_ctx(s, 600, "sub"), cfg);
  CHECK(bap::is_bap(res.best));
  CHECK(std::isfinite(res.best_score));
}

TEST_CASE("extra starts join the restart pool") {
  bap::Rng rng(111);
  const MixedGraph truth = bap::sample_uniform_bap(4, rng);
  const bap::Parameters theta = bap::sample_parameters(truth, rng);
  const Eigen::MatrixXd s = sample_cov(bap::sample_data(truth, theta, 600, rng));
  const auto ctx = make_ctx(s, 600, "extra");

  bap::SearchConfig cfg;
  cfg.restarts = 1;
  cfg.seed = 9;
  const auto plain = bap::greedy_search_serial(ctx, cfg);

  bap::SearchConfig with_extra = cfg;
  with_extra.extra_starts = {plain.best};
  const auto seeded = bap::greedy_search_serial(ctx, with_extra);
  CHECK(seeded.best_score >= plain.best_score);
}
