// Benchmarks the OpenMP search against the serial reference on synthetic
// data and checks that both return the same result.
#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bap/io.hpp"
#include "bap/model.hpp"
#include "bap/pipeline.hpp"
#include "bap/search.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Benchmark: parallel vs serial greedy search"};
  int d = 6;
  int n = 1000;
  int restarts = 20;
  int alpha = 2;
  int threads = 0;
  std::uint64_t seed = 1;
  app.add_option("--d", d, "Vertex count");
  app.add_option("--n", n, "Sample count");
  app.add_option("--restarts", restarts, "Restarts per search");
  app.add_option("--alpha", alpha, "Arrowhead cap (-1 = none)");
  app.add_option("--threads", threads, "Thread cap (0 = default)");
  app.add_option("--seed", seed, "RNG seed");
  CLI11_PARSE(app, argc, argv);

  const std::optional<int> cap =
      alpha < 0 ? std::nullopt : std::optional<int>(alpha);

  bap::Rng rng(seed);
  bap::Rng g_rng = rng.stream(0);
  bap::Rng th_rng = rng.stream(1);
  bap::Rng x_rng = rng.stream(2);
  const bap::MixedGraph truth = bap::sample_uniform_bap(d, g_rng, cap);
  const bap::Parameters theta = bap::sample_parameters(truth, th_rng);
  const Eigen::MatrixXd x = bap::sample_data(truth, theta, n, x_rng);

  bap::ScoringContext ctx;
  ctx.S = bap::covariance(x);
  ctx.n = n;
  ctx.dataset_id = "bench:" + std::to_string(seed);

  bap::SearchConfig cfg;
  cfg.restarts = restarts;
  cfg.max_in_degree = cap;
  cfg.seed = rng.stream(3).seed();
  cfg.threads = threads;

  using Clock = std::chrono::steady_clock;

  bap::ScoreCache serial_cache;
  ctx.cache = &serial_cache;
  const auto t0 = Clock::now();
  const bap::SearchResult serial = bap::greedy_search_serial(ctx, cfg);
  const double serial_s = std::chrono::duration<double>(Clock::now() - t0).count();

  bap::ScoreCache parallel_cache;
  ctx.cache = &parallel_cache;
  const auto t1 = Clock::now();
  const bap::SearchResult parallel = bap::greedy_search(ctx, cfg);
  const double parallel_s = std::chrono::duration<double>(Clock::now() - t1).count();

  std::cout << "serial:   " << serial_s << " s, best score " << serial.best_score
            << "\n";
  std::cout << "parallel: " << parallel_s << " s, best score "
            << parallel.best_score << "\n";
  std::cout << "speedup:  " << serial_s / parallel_s << "x\n";
  if (serial.best != parallel.best || serial.best_score != parallel.best_score) {
    std::cerr << "MISMATCH between serial and parallel results\n";
    return 1;
  }
  std::cout << "results match\n";
  return 0;
}
