#include "bap/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "bap/rng.hpp"
#include "bap/treks.hpp"

namespace bap {

namespace {

constexpr std::size_t kMaxSkeletonEdges = 20;
constexpr int kExhaustiveMsepLimit = 6;
constexpr int kSampledCSetsPerPair = 64;
constexpr double kStandardizedTol = 1e-8;

void set_edge_state(MixedGraph& g, int i, int j, int state) {
  g.remove_between(i, j);
  switch (state) {
    case 0:
      g.add_directed(i, j);
      break;
    case 1:
      g.add_directed(j, i);
      break;
    case 2:
      g.add_bidirected(i, j);
      break;
  }
}

std::set<std::tuple<int, int, int>> triple_set(const MixedGraph& g) {
  auto v = collider_triples(g);
  return {v.begin(), v.end()};
}

}  // namespace

std::vector<MixedGraph> collider_equivalents(const MixedGraph& g) {
  if (!is_bap(g)) throw std::invalid_argument("collider_equivalents expects a BAP");
  const std::vector<std::pair<int, int>> edges = skeleton(g);
  if (edges.size() > kMaxSkeletonEdges)
    throw std::invalid_argument("skeleton has more than 20 edges");

  const int d = g.num_vertices();
  std::map<std::pair<int, int>, int> edge_index;
  for (std::size_t e = 0; e < edges.size(); ++e) edge_index[edges[e]] = static_cast<int>(e);

  auto edge_of = [&](int a, int b) {
    return edge_index.at({std::min(a, b), std::max(a, b)});
  };

  // Adjacent triples of the shared skeleton; each completes once the later of
  // its two edges gets assigned, at which point its collider status is fixed.
  struct Triple {
    int a, b, c;
    bool collider;  // status in the reference graph
  };
  std::vector<std::vector<Triple>> completed_at(edges.size());
  std::vector<std::vector<int>> nbrs(d);
  for (auto [i, j] : edges) {
    nbrs[i].push_back(j);
    nbrs[j].push_back(i);
  }
  for (int b = 0; b < d; ++b)
    for (std::size_t x = 0; x < nbrs[b].size(); ++x)
      for (std::size_t y = x + 1; y < nbrs[b].size(); ++y) {
        int a = std::min(nbrs[b][x], nbrs[b][y]);
        int c = std::max(nbrs[b][x], nbrs[b][y]);
        Triple t{a, b, c, g.arrowhead_at(b, a) && g.arrowhead_at(b, c)};
        completed_at[std::max(edge_of(a, b), edge_of(b, c))].push_back(t);
      }

  std::vector<MixedGraph> out;
  MixedGraph cand(d);
  auto rec = [&](auto&& self, std::size_t e) -> void {
    if (e == edges.size()) {
      if (is_acyclic(cand)) out.push_back(cand);
      return;
    }
    auto [i, j] = edges[e];
    for (int state = 0; state < 3; ++state) {
      set_edge_state(cand, i, j, state);
      bool ok = true;
      for (const Triple& t : completed_at[e])
        if ((cand.arrowhead_at(t.b, t.a) && cand.arrowhead_at(t.b, t.c)) != t.collider) {
          ok = false;
          break;
        }
      if (ok) self(self, e + 1);
    }
    cand.remove_between(i, j);
  };
  rec(rec, 0);

  std::sort(out.begin(), out.end(),
            [](const MixedGraph& a, const MixedGraph& b) { return a.key() < b.key(); });
  return out;
}

NecessaryViolations necessary_violations(const MixedGraph& g1, const MixedGraph& g2) {
  if (g1.num_vertices() != g2.num_vertices())
    throw std::invalid_argument("graphs must share the vertex set");
  const int d = g1.num_vertices();

  NecessaryViolations rep;
  rep.skeleton_differs = skeleton(g1) != skeleton(g2);
  rep.v_structures_differ = v_structures(g1) != v_structures(g2);

  auto compare = [&](int a, int b, const std::vector<int>& c) {
    if (m_separated(g1, a, b, c) != m_separated(g2, a, b, c)) {
      rep.m_separations_differ = true;
      if (!rep.m_separation_witness) rep.m_separation_witness = {a, b, c};
    }
  };

  if (d <= kExhaustiveMsepLimit) {
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        std::vector<int> rest;
        for (int v = 0; v < d; ++v)
          if (v != a && v != b) rest.push_back(v);
        const int m = static_cast<int>(rest.size());
        for (int mask = 0; mask < (1 << m); ++mask) {
          std::vector<int> c;
          for (int k = 0; k < m; ++k)
            if (mask & (1 << k)) c.push_back(rest[k]);
          compare(a, b, c);
        }
      }
  } else {
    rep.m_separation_exhaustive = false;
    Rng rng(UINT64_C(0x6d736570));  // fixed seed: the comparison is a deterministic test
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        Rng pair_rng = rng.stream(static_cast<std::uint64_t>(a) * d + b);
        compare(a, b, {});
        for (int s = 1; s < kSampledCSetsPerPair; ++s) {
          std::vector<int> c;
          for (int v = 0; v < d; ++v)
            if (v != a && v != b && pair_rng.bernoulli()) c.push_back(v);
          compare(a, b, c);
        }
      }
  }
  return rep;
}

EquivalenceClass greedy_equivalence_class(const MixedGraph& g,
                                          const ScoringContext& ctx,
                                          double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
  const int d = g.num_vertices();
  const int max_depth = d * (d - 1) / 2;

  EquivalenceClass ec;
  ec.reference = g;
  ec.epsilon = epsilon;
  ec.zeta = score(g, ctx);

  std::unordered_map<std::string, MemberProvenance> accepted;
  std::unordered_set<std::string> visited;
  std::unordered_map<std::string, MixedGraph> by_key;
  std::deque<std::pair<MixedGraph, int>> frontier;

  for (const MixedGraph& seed : collider_equivalents(g)) {
    const std::string k = seed.key();
    visited.insert(k);
    accepted.emplace(k, MemberProvenance::ColliderIdentical);
    by_key.emplace(k, seed);
    frontier.emplace_back(seed, 0);
  }

  const std::vector<std::pair<int, int>> skel = skeleton(g);
  while (!frontier.empty()) {
    auto [cur, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= max_depth) continue;
    for (auto [i, j] : skel)
      for (int state = 0; state < 3; ++state) {
        MixedGraph cand = cur;
        set_edge_state(cand, i, j, state);
        if (cand == cur || !is_acyclic(cand)) continue;
        const std::string k = cand.key();
        if (!visited.insert(k).second) continue;
        if (necessary_violations(g, cand).certifies_nonequivalence()) continue;
        double s;
        try {
          s = score(cand, ctx);
        } catch (const std::exception&) {
          continue;
        }
        if (std::abs(s - ec.zeta) > epsilon) continue;
        accepted.emplace(k, MemberProvenance::GreedyFound);
        by_key.emplace(k, cand);
        frontier.emplace_back(cand, depth + 1);
      }
  }

  std::vector<std::string> keys;
  keys.reserve(accepted.size());
  for (const auto& [k, p] : accepted) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const std::string& k : keys) {
    ec.members.push_back(by_key.at(k));
    ec.provenance.push_back(accepted.at(k));
  }
  return ec;
}

Parameters translate_parameters(const Parameters& theta1, const MixedGraph& g1,
                                const MixedGraph& g2) {
  if (g1.num_vertices() != g2.num_vertices())
    throw std::invalid_argument("graphs must share the vertex set");
  if (skeleton(g1) != skeleton(g2) || triple_set(g1) != triple_set(g2))
    throw std::invalid_argument(
        "translate_parameters needs equal skeletons and collider triples");
  validate_parameters(g1, theta1);
  const Eigen::MatrixXd sigma1 = phi(g1, theta1);
  const int d = g1.num_vertices();
  for (int i = 0; i < d; ++i)
    if (std::abs(sigma1(i, i) - 1.0) > kStandardizedTol)
      throw std::invalid_argument("theta1 must be standardized (unit-diagonal phi)");

  const auto order = topological_order(g2);
  if (!order) throw std::invalid_argument("g2 has a directed cycle");

  Parameters theta2;
  theta2.B = Eigen::MatrixXd::Zero(d, d);
  theta2.Omega = Eigen::MatrixXd::Zero(d, d);
  for (auto [i, j] : skeleton(g1)) {
    double label;
    if (g1.has_directed(i, j))
      label = theta1.B(j, i);
    else if (g1.has_directed(j, i))
      label = theta1.B(i, j);
    else
      label = theta1.Omega(i, j);
    if (g2.has_directed(i, j))
      theta2.B(j, i) = label;
    else if (g2.has_directed(j, i))
      theta2.B(i, j) = label;
    else
      theta2.Omega(i, j) = theta2.Omega(j, i) = label;
  }

  // Unit-diagonal condition phi_vv = 1 expanded over self treks gives a unit
  // lower-triangular system in the Omega2 diagonal; solve it by forward
  // substitution along the topological order.
  for (int v : *order) {
    double diag = 1.0;
    for (const Trek& t : self_treks(g2, v)) {
      double p = 1.0;
      for (std::size_t k = 0; k + 1 < t.left.size(); ++k)
        p *= theta2.B(t.left[k], t.left[k + 1]);
      for (std::size_t k = 0; k + 1 < t.right.size(); ++k)
        p *= theta2.B(t.right[k + 1], t.right[k]);
      if (t.has_bidirected)
        p *= theta2.Omega(t.left.back(), t.right.front());
      else
        p *= theta2.Omega(t.head, t.head);
      diag -= p;
    }
    theta2.Omega(v, v) = diag;
  }
  return theta2;
}

SubgraphCheck subgraph_equivalence_check(const MixedGraph& g1, const MixedGraph& g2,
                                         const std::vector<int>& w,
                                         const ScoringContext* ctx,
                                         double epsilon) {
  if (w.size() < 2) throw std::invalid_argument("W needs at least two vertices");
  SubgraphCheck rep;
  rep.w = w;

  const InducedSubgraph s1 = induced_subgraph(g1, w);
  const InducedSubgraph s2 = induced_subgraph(g2, w);
  rep.violations = necessary_violations(s1.graph, s2.graph);
  rep.certified_nonequivalent = rep.violations.certifies_nonequivalence();

  if (ctx) {
    const int m = static_cast<int>(w.size());
    ScoringContext sub;
    sub.S.resize(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) sub.S(a, b) = ctx->S(w[a], w[b]);
    sub.n = ctx->n;
    std::ostringstream id;
    id << ctx->dataset_id << "|W=";
    for (int v : w) id << v << ",";
    sub.dataset_id = id.str();
    sub.ricf_opts = ctx->ricf_opts;
    sub.penalty_multiplier = ctx->penalty_multiplier;
    sub.cache = ctx->cache;
    const double gap = std::abs(score(s1.graph, sub) - score(s2.graph, sub));
    rep.score_gap = gap;
    if (gap > epsilon) rep.certified_nonequivalent = true;
  }
  return rep;
}

}  // namespace bap
