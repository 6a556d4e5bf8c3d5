#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "bap/equivalence.hpp"
#include "bap/io.hpp"
#include "bap/pipeline.hpp"
#include "bap/rng.hpp"
#include "oracles.hpp"

using bap::MixedGraph;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

bap::ScoringContext make_ctx(const Eigen::MatrixXd& s, int n,
                             const std::string& id) {
  bap::ScoringContext ctx;
  ctx.S = s;
  ctx.n = n;
  ctx.dataset_id = id;
  return ctx;
}

bap::Dataset simulated_dataset(const MixedGraph& g, int n, std::uint64_t seed,
                               const std::string& tag) {
  bap::Rng rng(seed);
  const bap::Parameters theta = bap::sample_parameters(g, rng);
  bap::Dataset data;
  data.X = bap::sample_data(g, theta, n, rng);
  for (int j = 0; j < g.num_vertices(); ++j)
    data.columns.push_back("x" + std::to_string(j));
  data.provenance = tag;
  return data;
}

}  // namespace

TEST_CASE("graph file round trip") {
  const MixedGraph g = oracle::confounded_chain4();
  const std::string text = bap::format_graph(g);
  CHECK(bap::parse_graph(text) == g);

  const auto path = temp_file("confounded_chain4.graph");
  bap::write_graph(path, g);
  CHECK(bap::read_graph(path) == g);
  std::filesystem::remove(path);

  // Comments and blank lines are tolerated.
  CHECK(bap::parse_graph("# chain\nd=3\n\n0 -> 1  # first\n1 -> 2\n") ==
        oracle::chain3());
}

TEST_CASE("graph parse errors are position-annotated") {
  CHECK_THROWS_WITH_AS(bap::parse_graph("0 -> 1\n"),
                       doctest::Contains("line 1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(bap::parse_graph("d=3\n0 => 1\n"),
                       doctest::Contains("line 2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(bap::parse_graph("d=3\n0 -> 7\n"),
                       doctest::Contains("line 2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(bap::parse_graph("d=3\n0 -> 1\n1 <-> 0\n"),
                       doctest::Contains("line 3"), std::runtime_error);
  CHECK_THROWS_AS(bap::parse_graph(""), std::runtime_error);
}

TEST_CASE("CSV round trip and errors") {
  const auto path = temp_file("data.csv");
  {
    std::ofstream out(path);
    out << "a,b,c\n1,2,3\n4.5,-1e2,0\n";
  }
  const bap::Dataset data = bap::read_csv(path);
  CHECK(data.columns == std::vector<std::string>{"a", "b", "c"});
  CHECK(data.X.rows() == 2);
  CHECK(data.X(1, 1) == doctest::Approx(-100.0));

  bap::write_csv(path, data.X, data.columns);
  const bap::Dataset again = bap::read_csv(path);
  CHECK((again.X - data.X).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);

  const auto bad = temp_file("bad.csv");
  {
    std::ofstream out(bad);
    out << "a,b\n1,2\n3,oops\n";
  }
  CHECK_THROWS_WITH_AS(bap::read_csv(bad), doctest::Contains("row 3"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(bap::read_csv(bad), doctest::Contains("column 2"),
                       std::runtime_error);
  std::filesystem::remove(bad);
}

TEST_CASE("covariance and standardization") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 3, 5, 2, 1, 6, 9;
  const Eigen::MatrixXd s = bap::covariance(x);
  // Against the textbook formula.
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double s01 = 0.0;
  for (int r = 0; r < 4; ++r) s01 += (x(r, 0) - mean(0)) * (x(r, 1) - mean(1));
  CHECK(s(0, 1) == doctest::Approx(s01 / 3.0));

  bap::Dataset d;
  d.columns = {"a", "b"};
  d.X = x;
  const bap::Dataset z = bap::standardize(d);
  CHECK(z.standardized);
  const Eigen::MatrixXd sz = bap::covariance(z.X);
  CHECK(sz(0, 0) == doctest::Approx(1.0));
  CHECK(sz(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(z.X.col(0).mean()) < 1e-12);
}

TEST_CASE("min_abs_effects on a singleton class is the member's effect matrix") {
  const MixedGraph g = oracle::chain3();
  const bap::Dataset data = simulated_dataset(g, 1500, 301, "chain");
  const auto ctx = make_ctx(bap::covariance(data.X), 1500, "chain");

  bap::EquivalenceClass ec;
  ec.reference = g;
  ec.members = {g};
  ec.provenance = {bap::MemberProvenance::ColliderIdentical};

  const bap::EffectBounds b = bap::min_abs_effects(ec, ctx);
  const bap::FitResult fit = bap::ricf(g, ctx.S, ctx.n);
  const Eigen::MatrixXd expected = bap::causal_effects(g, fit.theta).cwiseAbs();
  CHECK((b.min_abs - expected).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(b.min_abs(i, i) == doctest::Approx(1.0));
  CHECK(b.failed_members == 0);
}

TEST_CASE("min_abs_effects zeroes both directions for a reversible edge") {
  MixedGraph g(2);
  g.add_directed(0, 1);
  const bap::Dataset data = simulated_dataset(g, 1000, 302, "pair");
  const auto ctx = make_ctx(bap::covariance(data.X), 1000, "pair");

  bap::ScoreCache cache;
  auto cctx = ctx;
  cctx.cache = &cache;
  const bap::EquivalenceClass ec = bap::greedy_equivalence_class(g, cctx, 1e-10);
  CHECK(ec.members.size() == 3);  // both orientations and the bidirected edge
  const bap::EffectBounds b = bap::min_abs_effects(ec, ctx);
  CHECK(b.min_abs(0, 1) == doctest::Approx(0.0));
  CHECK(b.min_abs(1, 0) == doctest::Approx(0.0));
  CHECK(b.min_abs(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("min_abs_effects can use the true parameters for the reference") {
  const MixedGraph g = oracle::chain3();
  bap::Rng rng(303);
  const bap::Parameters theta = bap::sample_parameters(g, rng);
  bap::Dataset data;
  data.X = bap::sample_data(g, theta, 500, rng);
  const auto ctx = make_ctx(bap::covariance(data.X), 500, "true-theta");

  bap::EquivalenceClass ec;
  ec.reference = g;
  ec.members = {g};
  ec.provenance = {bap::MemberProvenance::ColliderIdentical};
  const bap::EffectBounds b = bap::min_abs_effects(ec, ctx, &theta);
  const Eigen::MatrixXd expected = bap::causal_effects(g, theta).cwiseAbs();
  CHECK((b.min_abs - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("roc_auc: perfect, uninformative, and monotone-invariant") {
  bap::EffectBounds truth;
  truth.min_abs.resize(3, 3);
  truth.min_abs << 1, 0.8, 0, 0, 1, 0.5, 0, 0, 1;

  bap::EffectBounds est = truth;
  const bap::RocResult perfect = bap::roc_auc(truth, est);
  REQUIRE(perfect.auc.has_value());
  CHECK(*perfect.auc == doctest::Approx(1.0));
  for (std::size_t k = 1; k < perfect.points.size(); ++k)
    CHECK(perfect.points[k].first >= perfect.points[k - 1].first);

  bap::EffectBounds flat;
  flat.min_abs = Eigen::MatrixXd::Constant(3, 3, 0.25);
  const bap::RocResult tie = bap::roc_auc(truth, flat);
  REQUIRE(tie.auc.has_value());
  CHECK(*tie.auc == doctest::Approx(0.5));

  bap::EffectBounds scaled = est;
  scaled.min_abs = (est.min_abs.array() * 3.0 + 1.0).matrix();  // monotone map
  const bap::RocResult same = bap::roc_auc(truth, scaled);
  CHECK(*same.auc == doctest::Approx(*perfect.auc));

  bap::EffectBounds none;
  none.min_abs = Eigen::MatrixXd::Identity(3, 3);  // no positive targets
  CHECK(!bap::roc_auc(none, est).auc.has_value());
}

TEST_CASE("roc_auc excludes pairs whose opposite direction carries an effect") {
  bap::EffectBounds truth;
  truth.min_abs.resize(2, 2);
  truth.min_abs << 1, 0.9, 0, 1;
  // (0,1) is a positive; (1,0) has truth 0 but its mirror is positive, so it
  // is excluded and no negatives remain: AUC undefined.
  bap::EffectBounds est = truth;
  CHECK(!bap::roc_auc(truth, est).auc.has_value());
}

TEST_CASE("simulation smoke run: valid schema and determinism") {
  bap::SimulationConfig cfg;
  cfg.replicates = 2;
  cfg.d = 4;
  cfg.max_in_degree = 2;
  cfg.n = 200;
  cfg.restarts = 5;
  cfg.epsilon = 1e-10;
  cfg.seed = 71;

  const bap::SimulationReport r1 = bap::run_simulation(cfg);
  CHECK(r1.replicates.size() == 2);
  for (const auto& rep : r1.replicates) {
    CHECK(rep.ok);
    CHECK(rep.truth_class.members.size() >= 1);
    CHECK(rep.estimate_class.members.size() >= 1);
    for (int i = 0; i < 4; ++i) {
      CHECK(rep.truth_bounds.min_abs(i, i) == doctest::Approx(1.0));
      CHECK(rep.estimate_bounds.min_abs(i, i) == doctest::Approx(1.0));
    }
    if (rep.roc.auc) {
      CHECK(*rep.roc.auc >= 0.0);
      CHECK(*rep.roc.auc <= 1.0);
    }
  }

  const nlohmann::json j1 = bap::to_json(r1);
  CHECK(j1.at("schema_version") == 1);
  CHECK(j1.at("replicates").size() == 2);

  // Byte-identical on re-run with the same seed.
  const bap::SimulationReport r2 = bap::run_simulation(cfg);
  CHECK(j1.dump() == bap::to_json(r2).dump());

  cfg.seed = 72;
  const bap::SimulationReport r3 = bap::run_simulation(cfg);
  CHECK(j1.dump() != bap::to_json(r3).dump());

  // The CSV view contains the average curve.
  const std::string csv = bap::roc_csv(r1);
  CHECK(csv.rfind("replicate,fpr,tpr\n", 0) == 0);
}

TEST_CASE("simulation config JSON round trip") {
  const nlohmann::json j = {
      {"replicates", 3}, {"d", 5},      {"max_in_degree", nullptr},
      {"n", 400},        {"restarts", 7}, {"epsilon", 1e-8},
      {"seed", 9},       {"threads", 2}};
  const bap::SimulationConfig cfg = bap::simulation_config_from_json(j);
  CHECK(cfg.replicates == 3);
  CHECK(cfg.d == 5);
  CHECK(!cfg.max_in_degree.has_value());
  CHECK(cfg.n == 400);
  CHECK(cfg.restarts == 7);
  CHECK(cfg.epsilon == doctest::Approx(1e-8));
  CHECK(cfg.seed == 9);
  CHECK(cfg.threads == 2);
}

TEST_CASE("white noise favors the empty graph") {
  bap::Rng rng(304);
  bap::Dataset data;
  data.columns = {"a", "b", "c", "d"};
  data.X.resize(800, 4);
  for (int i = 0; i < data.X.rows(); ++i)
    for (int j = 0; j < 4; ++j) data.X(i, j) = rng.normal();
  data.provenance = "noise";

  bap::FitDatasetConfig cfg;
  cfg.bap_restarts = 5;
  cfg.dag_restarts = 5;
  cfg.seed = 10;
  const bap::FitComparison cmp = bap::fit_dataset(data, cfg);
  CHECK(cmp.dag.best.num_edges() == 0);
  CHECK(cmp.bap.best.num_edges() == 0);
}

TEST_CASE("BAP search seeded with the best DAG never scores below it") {
  const MixedGraph g = oracle::confounded_chain4();
  const bap::Dataset data = simulated_dataset(g, 1200, 305, "seeded");
  bap::FitDatasetConfig cfg;
  cfg.bap_restarts = 4;
  cfg.dag_restarts = 4;
  cfg.seed = 11;
  const bap::FitComparison cmp = bap::fit_dataset(data, cfg);
  CHECK(cmp.bap.best_score >= cmp.dag.best_score);
}

TEST_CASE("column permutation permutes the graph but not the score") {
  const MixedGraph g = oracle::chain3();
  bap::Dataset data = simulated_dataset(g, 900, 306, "perm");

  bap::FitDatasetConfig cfg;
  cfg.bap_restarts = 4;
  cfg.dag_restarts = 2;
  cfg.seed = 12;
  const bap::FitComparison base = bap::fit_dataset(data, cfg);

  bap::Dataset permuted = data;
  permuted.provenance = "perm2";
  const std::vector<int> perm = {2, 0, 1};  // new column j = old column perm[j]
  for (int j = 0; j < 3; ++j) {
    permuted.X.col(j) = data.X.col(perm[j]);
    permuted.columns[j] = data.columns[perm[j]];
  }
  const bap::FitComparison moved = bap::fit_dataset(permuted, cfg);
  CHECK(moved.bap.best_score == doctest::Approx(base.bap.best_score).epsilon(1e-9));
}

TEST_CASE("graph JSON round trip") {
  const MixedGraph g = oracle::mixed4a();
  CHECK(bap::graph_from_json(bap::to_json(g)) == g);

  bap::EquivalenceClass ec;
  ec.reference = g;
  ec.zeta = -1.5;
  ec.epsilon = 1e-10;
  ec.members = {g};
  ec.provenance = {bap::MemberProvenance::ColliderIdentical};
  const bap::EquivalenceClass back =
      bap::equivalence_class_from_json(bap::to_json(ec));
  CHECK(back.reference == g);
  CHECK(back.zeta == doctest::Approx(-1.5));
  CHECK(back.members.size() == 1);
  CHECK(back.provenance[0] == bap::MemberProvenance::ColliderIdentical);
}
