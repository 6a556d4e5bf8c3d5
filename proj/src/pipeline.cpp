#include "bap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bap {

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kRocGridPoints = 51;

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json points_json(const std::vector<std::pair<double, double>>& pts) {
  nlohmann::json out = nlohmann::json::array();
  for (auto [x, y] : pts) out.push_back({x, y});
  return out;
}

nlohmann::json bounds_json(const EffectBounds& b) {
  return {{"min_abs", matrix_json(b.min_abs)}, {"failed_members", b.failed_members}};
}

nlohmann::json roc_json(const RocResult& r) {
  nlohmann::json j{{"points", points_json(r.points)}};
  if (r.auc)
    j["auc"] = *r.auc;
  else
    j["auc"] = nullptr;
  return j;
}

// Piecewise-linear tpr at a given fpr, over points starting at (0, 0).
double interp_tpr(const std::vector<std::pair<double, double>>& pts, double fpr) {
  double px = 0.0, py = 0.0;
  for (auto [x, y] : pts) {
    if (fpr <= x) {
      if (x == px) return y;
      return py + (y - py) * (fpr - px) / (x - px);
    }
    px = x;
    py = y;
  }
  return py;
}

}  // namespace

EffectBounds min_abs_effects(const EquivalenceClass& ec, const ScoringContext& ctx,
                             const Parameters* reference_theta) {
  if (ec.members.empty()) throw std::invalid_argument("empty equivalence class");
  const int d = ec.reference.num_vertices();
  EffectBounds out;
  out.min_abs = Eigen::MatrixXd::Constant(
      d, d, std::numeric_limits<double>::infinity());

  RicfOptions opts = ctx.ricf_opts;
  opts.with_district_terms = false;
  int fitted = 0;
  for (const MixedGraph& member : ec.members) {
    Eigen::MatrixXd effects;
    try {
      if (reference_theta && member == ec.reference) {
        effects = causal_effects(member, *reference_theta);
      } else {
        const FitResult fit = ricf(member, ctx.S, ctx.n, opts);
        effects = causal_effects(member, fit.theta);
      }
    } catch (const std::exception&) {
      ++out.failed_members;
      continue;
    }
    out.min_abs = out.min_abs.cwiseMin(effects.cwiseAbs());
    ++fitted;
  }
  if (fitted == 0) throw std::runtime_error("no equivalence-class member could be fitted");
  return out;
}

RocResult roc_auc(const EffectBounds& truth_bounds, const EffectBounds& est_bounds) {
  const Eigen::MatrixXd& t = truth_bounds.min_abs;
  const Eigen::MatrixXd& e = est_bounds.min_abs;
  if (t.rows() != e.rows() || t.cols() != e.cols())
    throw std::invalid_argument("bound matrices must have equal dimensions");

  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  int positives = 0, negatives = 0;
  const int d = static_cast<int>(t.rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      if (t(i, j) > 0.0) {
        items.push_back({e(i, j), true});
        ++positives;
      } else if (t(j, i) == 0.0) {
        // Both orientations are effect-free in truth; pairs where only the
        // opposite orientation carries an effect are excluded, the two
        // directions of an edge being mutually exclusive.
        items.push_back({e(i, j), false});
        ++negatives;
      }
    }

  RocResult res;
  if (positives == 0 || negatives == 0) return res;

  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.score > b.score;
  });

  double auc = 0.0;
  double px = 0.0, py = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) {
      if (items[j].positive)
        ++tp;
      else
        ++fp;
      ++j;
    }
    const double x = double(fp) / negatives;
    const double y = double(tp) / positives;
    auc += (x - px) * (py + y) / 2.0;
    res.points.emplace_back(x, y);
    px = x;
    py = y;
    i = j;
  }
  res.auc = auc;
  return res;
}

SimulationReport run_simulation(const SimulationConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("need at least one replicate");
  if (cfg.d < 2) throw std::invalid_argument("need at least two variables");
  if (cfg.n < cfg.d + 1) throw std::invalid_argument("need n >= d+1 samples");
  if (cfg.restarts < 1) throw std::invalid_argument("need at least one restart");
  if (cfg.epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");

  SimulationReport report;
  report.config = cfg;
  report.replicates.resize(cfg.replicates);
  const Rng root(cfg.seed);

  auto body = [&](int k) {
    ReplicateResult& rep = report.replicates[k];
    rep.index = k;
    try {
      const Rng rk = root.stream(static_cast<std::uint64_t>(k));
      Rng g_rng = rk.stream(0);
      Rng th_rng = rk.stream(1);
      Rng x_rng = rk.stream(2);

      rep.truth = sample_uniform_bap(cfg.d, g_rng, cfg.max_in_degree);
      rep.theta = sample_parameters(rep.truth, th_rng);
      const Eigen::MatrixXd x = sample_data(rep.truth, rep.theta, cfg.n, x_rng);

      ScoreCache cache;
      ScoringContext ctx;
      ctx.S = covariance(x);
      ctx.n = cfg.n;
      ctx.dataset_id =
          "sim:" + std::to_string(cfg.seed) + ":" + std::to_string(k);
      ctx.penalty_multiplier = cfg.penalty_multiplier;
      ctx.cache = &cache;

      SearchConfig sc;
      sc.restarts = cfg.restarts;
      // The in-degree cap constrains the sampled ground truth only. Keeping
      // the search unconstrained gives hill climbing escape routes through
      // denser graphs and avoids a large fraction of poor local optima.
      sc.graph_class = GraphClass::BAP;
      sc.seed = rk.stream(3).seed();
      const SearchResult main = greedy_search_serial(ctx, sc);

      SearchConfig fc = sc;
      fc.forward_only = true;
      fc.restarts = 1;
      fc.seed = rk.stream(4).seed();
      const SearchResult forward = greedy_search_serial(ctx, fc);

      const SearchResult& best =
          forward.best_score > main.best_score ? forward : main;
      rep.estimate = best.best;
      rep.estimate_score = best.best_score;

      rep.truth_class = greedy_equivalence_class(rep.truth, ctx, cfg.epsilon);
      rep.estimate_class = greedy_equivalence_class(rep.estimate, ctx, cfg.epsilon);
      rep.truth_bounds = min_abs_effects(
          rep.truth_class, ctx,
          cfg.truth_effects_from_true_theta ? &rep.theta : nullptr);
      rep.estimate_bounds = min_abs_effects(rep.estimate_class, ctx);
      rep.roc = roc_auc(rep.truth_bounds, rep.estimate_bounds);
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
  };

#ifdef _OPENMP
  const int nthreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (int k = 0; k < cfg.replicates; ++k) body(k);
#else
  for (int k = 0; k < cfg.replicates; ++k) body(k);
#endif

  double sum = 0.0;
  int defined = 0;
  for (const ReplicateResult& rep : report.replicates)
    if (rep.ok && rep.roc.auc) {
      sum += *rep.roc.auc;
      ++defined;
    }
  if (defined > 0) {
    report.mean_auc = sum / defined;
    for (int gi = 0; gi < kRocGridPoints; ++gi) {
      const double fpr = double(gi) / (kRocGridPoints - 1);
      double tpr = 0.0;
      for (const ReplicateResult& rep : report.replicates)
        if (rep.ok && rep.roc.auc) tpr += interp_tpr(rep.roc.points, fpr);
      report.average_roc.emplace_back(fpr, tpr / defined);
    }
  }
  return report;
}

FitComparison fit_dataset(const Dataset& data, const FitDatasetConfig& cfg) {
  Dataset work = data;
  std::string id = "data:" + data.provenance;
  if (cfg.log_transform) {
    if ((work.X.array() <= 0.0).any())
      throw std::invalid_argument("log transform requires strictly positive data");
    work.X = work.X.array().log();
    id += "|log";
  }
  if (cfg.standardize && !work.standardized) {
    work = standardize(work);
    id += "|std";
  }
  const int n = static_cast<int>(work.X.rows());
  const int d = static_cast<int>(work.X.cols());
  if (n < d + 1) throw std::invalid_argument("need n >= d+1 samples");

  ScoreCache cache;
  ScoringContext ctx;
  ctx.S = covariance(work.X);
  ctx.n = n;
  ctx.dataset_id = id;
  ctx.penalty_multiplier = cfg.penalty_multiplier;
  ctx.cache = &cache;

  const Rng root(cfg.seed);
  FitComparison cmp;

  SearchConfig dag_cfg;
  dag_cfg.restarts = cfg.dag_restarts;
  dag_cfg.max_in_degree = cfg.max_in_degree;
  dag_cfg.graph_class = GraphClass::DAG;
  dag_cfg.seed = root.stream(0).seed();
  dag_cfg.threads = cfg.threads;
  cmp.dag = greedy_search(ctx, dag_cfg);

  SearchConfig bap_cfg;
  bap_cfg.restarts = cfg.bap_restarts;
  bap_cfg.max_in_degree = cfg.max_in_degree;
  bap_cfg.graph_class = GraphClass::BAP;
  bap_cfg.seed = root.stream(1).seed();
  bap_cfg.threads = cfg.threads;
  bap_cfg.extra_starts = {cmp.dag.best};
  cmp.bap = greedy_search(ctx, bap_cfg);
  return cmp;
}

nlohmann::json to_json(const MixedGraph& g) {
  nlohmann::json dir = nlohmann::json::array();
  for (auto [i, j] : g.directed_edges()) dir.push_back({i, j});
  nlohmann::json bidir = nlohmann::json::array();
  for (auto [i, j] : g.bidirected_edges()) bidir.push_back({i, j});
  return {{"d", g.num_vertices()}, {"directed", dir}, {"bidirected", bidir}};
}

nlohmann::json to_json(const Parameters& theta) {
  return {{"B", matrix_json(theta.B)}, {"Omega", matrix_json(theta.Omega)}};
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json districts = nlohmann::json::array();
  for (const DistrictTerm& t : fit.per_district)
    districts.push_back({{"vertices", t.vertices}, {"term", t.term}});
  return {{"schema_version", kSchemaVersion},
          {"theta", to_json(fit.theta)},
          {"loglik", fit.loglik},
          {"score", fit.score},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"districts", districts}};
}

nlohmann::json to_json(const EquivalenceClass& ec) {
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < ec.members.size(); ++i)
    members.push_back(
        {{"graph", to_json(ec.members[i])},
         {"provenance", ec.provenance[i] == MemberProvenance::ColliderIdentical
                            ? "collider-identical"
                            : "greedy-found"}});
  return {{"schema_version", kSchemaVersion},
          {"reference", to_json(ec.reference)},
          {"zeta", ec.zeta},
          {"epsilon", ec.epsilon},
          {"members", members}};
}

nlohmann::json to_json(const SearchResult& res, bool include_trace) {
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"best", to_json(res.best)},
                   {"best_score", res.best_score},
                   {"fit", to_json(res.fit)},
                   {"skipped_restarts", res.trace.skipped_restarts}};
  if (include_trace) {
    nlohmann::json trace = nlohmann::json::array();
    for (const TraceEntry& e : res.trace.entries)
      trace.push_back({{"restart", e.restart},
                       {"step", e.step},
                       {"seconds", e.seconds},
                       {"score", e.score},
                       {"graph", to_json(e.graph)}});
    j["trace"] = std::move(trace);
  }
  return j;
}

nlohmann::json to_json(const SimulationReport& report) {
  const SimulationConfig& c = report.config;
  nlohmann::json cfg{{"replicates", c.replicates},
                     {"d", c.d},
                     {"n", c.n},
                     {"restarts", c.restarts},
                     {"epsilon", c.epsilon},
                     {"seed", c.seed},
                     {"penalty_multiplier", c.penalty_multiplier},
                     {"truth_effects_from_true_theta", c.truth_effects_from_true_theta}};
  if (c.max_in_degree)
    cfg["max_in_degree"] = *c.max_in_degree;
  else
    cfg["max_in_degree"] = nullptr;

  nlohmann::json reps = nlohmann::json::array();
  for (const ReplicateResult& r : report.replicates) {
    nlohmann::json jr{{"index", r.index}, {"ok", r.ok}};
    if (!r.ok) {
      jr["error"] = r.error;
      reps.push_back(std::move(jr));
      continue;
    }
    jr["truth"] = to_json(r.truth);
    jr["theta"] = to_json(r.theta);
    jr["estimate"] = to_json(r.estimate);
    jr["estimate_score"] = r.estimate_score;
    jr["truth_class"] = to_json(r.truth_class);
    jr["estimate_class"] = to_json(r.estimate_class);
    jr["truth_bounds"] = bounds_json(r.truth_bounds);
    jr["estimate_bounds"] = bounds_json(r.estimate_bounds);
    jr["roc"] = roc_json(r.roc);
    reps.push_back(std::move(jr));
  }

  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"config", std::move(cfg)},
                   {"replicates", std::move(reps)},
                   {"average_roc", points_json(report.average_roc)}};
  if (report.mean_auc)
    j["mean_auc"] = *report.mean_auc;
  else
    j["mean_auc"] = nullptr;
  return j;
}

nlohmann::json to_json(const FitComparison& cmp) {
  return {{"schema_version", kSchemaVersion},
          {"dag", to_json(cmp.dag)},
          {"bap", to_json(cmp.bap)}};
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j) {
  SimulationConfig cfg;
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.d = j.value("d", cfg.d);
  cfg.n = j.value("n", cfg.n);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.penalty_multiplier = j.value("penalty_multiplier", cfg.penalty_multiplier);
  cfg.truth_effects_from_true_theta =
      j.value("truth_effects_from_true_theta", cfg.truth_effects_from_true_theta);
  if (j.contains("max_in_degree")) {
    if (j["max_in_degree"].is_null())
      cfg.max_in_degree.reset();
    else
      cfg.max_in_degree = j["max_in_degree"].get<int>();
  }
  return cfg;
}

MixedGraph graph_from_json(const nlohmann::json& j) {
  MixedGraph g(j.at("d").get<int>());
  for (const auto& e : j.at("directed"))
    g.add_directed(e.at(0).get<int>(), e.at(1).get<int>());
  for (const auto& e : j.at("bidirected"))
    g.add_bidirected(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

EquivalenceClass equivalence_class_from_json(const nlohmann::json& j) {
  EquivalenceClass ec;
  ec.reference = graph_from_json(j.at("reference"));
  ec.zeta = j.at("zeta").get<double>();
  ec.epsilon = j.at("epsilon").get<double>();
  for (const auto& m : j.at("members")) {
    ec.members.push_back(graph_from_json(m.at("graph")));
    ec.provenance.push_back(m.at("provenance").get<std::string>() ==
                                    "collider-identical"
                                ? MemberProvenance::ColliderIdentical
                                : MemberProvenance::GreedyFound);
  }
  return ec;
}

std::string roc_csv(const SimulationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "replicate,fpr,tpr\n";
  for (const ReplicateResult& r : report.replicates) {
    if (!r.ok || !r.roc.auc) continue;
    out << r.index << ",0,0\n";
    for (auto [fpr, tpr] : r.roc.points)
      out << r.index << ',' << fpr << ',' << tpr << '\n';
  }
  for (auto [fpr, tpr] : report.average_roc)
    out << "average," << fpr << ',' << tpr << '\n';
  return out.str();
}

}  // namespace bap
