#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include "bap/graph.hpp"
#include "bap/model.hpp"
#include "bap/ricf.hpp"

namespace bap {

enum class MemberProvenance { ColliderIdentical, GreedyFound };

struct EquivalenceClass {
  MixedGraph reference;
  double zeta = 0.0;     // reference score, compared against throughout
  double epsilon = 0.0;  // absolute score tolerance
  std::vector<MixedGraph> members;            // sorted by key(), contains reference
  std::vector<MemberProvenance> provenance;   // parallel to members
};

// All BAPs with the same skeleton and the same collider-triple set as g.
// Enumerates 3 states per skeleton edge with partial collider pruning;
// refuses skeletons with more than 20 edges.
std::vector<MixedGraph> collider_equivalents(const MixedGraph& g);

// Empirical equivalence class: seeded by collider_equivalents(g), grown by
// recursive exploration of same-skeleton edge changes. A neighbor is accepted
// iff it passes the necessary filters (same skeleton, v-structures and
// m-separations as g) and |score - zeta| <= epsilon. Recursion depth is
// capped at d(d-1)/2.
EquivalenceClass greedy_equivalence_class(const MixedGraph& g,
                                          const ScoringContext& ctx,
                                          double epsilon);

struct NecessaryViolations {
  bool skeleton_differs = false;
  bool v_structures_differ = false;
  bool m_separations_differ = false;
  bool m_separation_exhaustive = true;  // false when C-sets were subsampled
  // One (a, b, C) separated in exactly one of the graphs, when found.
  std::optional<std::tuple<int, int, std::vector<int>>> m_separation_witness;

  bool certifies_nonequivalence() const {
    return skeleton_differs || v_structures_differ || m_separations_differ;
  }
};

// Checks the necessary conditions for distributional equivalence: equal
// skeletons, equal v-structures, equal m-separation sets. The m-separation
// comparison is exhaustive over all conditioning sets for d <= 6 and falls
// back to a fixed-seed sample of conditioning sets above.
NecessaryViolations necessary_violations(const MixedGraph& g1, const MixedGraph& g2);

// Constructive translation between collider-identical graphs: copies each skeleton edge's label
// from theta1 into g2's edge of the same pair, then solves for the diagonal
// of Omega2 in topological order so that the implied covariance keeps a unit
// diagonal. Requires standardized theta1 and equal skeleton + collider
// triples.
Parameters translate_parameters(const Parameters& theta1, const MixedGraph& g1,
                                const MixedGraph& g2);

struct SubgraphCheck {
  std::vector<int> w;
  NecessaryViolations violations;
  std::optional<double> score_gap;  // filled when data is supplied
  bool certified_nonequivalent = false;
};

// Contrapositive use of the induced-subgraph property: if the subgraphs on W
// are certifiably non-equivalent (graphically, or by score separation beyond
// epsilon on the data restricted to W), then g1 and g2 are non-equivalent.
SubgraphCheck subgraph_equivalence_check(const MixedGraph& g1, const MixedGraph& g2,
                                         const std::vector<int>& w,
                                         const ScoringContext* ctx = nullptr,
                                         double epsilon = 1e-10);

}  // namespace bap
