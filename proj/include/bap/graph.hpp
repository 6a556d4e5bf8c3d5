#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace bap {

enum class GraphClass { DAG, BAP, APD };

// Mixed graph on vertices 0..d-1 with directed (i->j) and bidirected (i<->j)
// edge sets. Immutable by convention once built: all algorithms below take
// the graph by const reference and return new values.
class MixedGraph {
 public:
  MixedGraph() = default;
  explicit MixedGraph(int d) : d_(d), dir_(d * d, 0), bidir_(d * d, 0) {}

  int num_vertices() const { return d_; }

  bool has_directed(int i, int j) const { return dir_[i * d_ + j] != 0; }
  bool has_bidirected(int i, int j) const { return bidir_[i * d_ + j] != 0; }
  bool adjacent(int i, int j) const {
    return has_directed(i, j) || has_directed(j, i) || has_bidirected(i, j);
  }
  // Arrowhead at j coming from i (i->j or i<->j).
  bool arrowhead_at(int j, int i) const {
    return has_directed(i, j) || has_bidirected(i, j);
  }

  void add_directed(int i, int j);
  void add_bidirected(int i, int j);
  void remove_directed(int i, int j);
  void remove_bidirected(int i, int j);
  // Removes whatever edge(s) exist between the pair.
  void remove_between(int i, int j);

  std::vector<std::pair<int, int>> directed_edges() const;    // lexicographic
  std::vector<std::pair<int, int>> bidirected_edges() const;  // i < j, lexicographic

  std::vector<int> parents(int i) const;
  std::vector<int> children(int i) const;
  std::vector<int> spouses(int i) const;

  // Number of arrowheads at i (directed in-edges plus bidirected edges).
  int in_degree(int i) const;

  int num_directed() const;
  int num_bidirected() const;
  // Bidirected pairs counted once.
  int num_edges() const { return num_directed() + num_bidirected(); }

  bool operator==(const MixedGraph& o) const {
    return d_ == o.d_ && dir_ == o.dir_ && bidir_ == o.bidir_;
  }
  bool operator!=(const MixedGraph& o) const { return !(*this == o); }

  // Canonical string encoding, usable as a hash-map key.
  std::string key() const;

 private:
  void check(int i, int j) const;

  int d_ = 0;
  std::vector<std::uint8_t> dir_;
  std::vector<std::uint8_t> bidir_;
};

bool is_acyclic(const MixedGraph& g);
bool is_dag(const MixedGraph& g);
bool is_bap(const MixedGraph& g);
bool is_admissible(const MixedGraph& g, GraphClass cls);

// Topological order of the directed part; empty optional if cyclic.
std::optional<std::vector<int>> topological_order(const MixedGraph& g);

// Connected components of the bidirected part, each sorted, ordered by
// smallest member.
std::vector<std::vector<int>> districts(const MixedGraph& g);

// an(C): C plus all vertices with a directed path into C.
std::vector<int> ancestors(const MixedGraph& g, const std::vector<int>& c);

// m-separation of a and b given C, via the ancestral-subgraph augmentation
// reduction. Throws std::invalid_argument on out-of-range or overlapping
// arguments.
bool m_separated(const MixedGraph& g, int a, int b, const std::vector<int>& c);

std::vector<std::pair<int, int>> skeleton(const MixedGraph& g);

// Adjacent triples (i,j,k), i < k, with two arrowheads at j.
std::vector<std::tuple<int, int, int>> collider_triples(const MixedGraph& g);
// Collider triples whose endpoints are non-adjacent.
std::vector<std::tuple<int, int, int>> v_structures(const MixedGraph& g);

struct InducedSubgraph {
  MixedGraph graph;
  std::vector<int> vertex_map;  // new index -> original vertex
};
InducedSubgraph induced_subgraph(const MixedGraph& g, const std::vector<int>& w);

// All admissible graphs one edge addition, deletion, or same-skeleton edge
// change away. Deterministic order, no duplicates.
std::vector<MixedGraph> neighbors(const MixedGraph& g, GraphClass cls,
                                  std::optional<int> max_in_degree = {});

// Exhaustive enumeration for small d (guarded, meant for oracles and tests).
std::vector<MixedGraph> enumerate_baps(int d, std::optional<int> max_in_degree = {});

}  // namespace bap
