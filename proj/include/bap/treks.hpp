#pragma once

#include <vector>

#include "bap/graph.hpp"

namespace bap {

// A trek between two endpoints: `left` runs from the left endpoint inward to
// the left anchor, `right` from the right anchor outward to the right
// endpoint. Without a bidirected edge both anchors coincide at `head`; with
// one, the anchors are the two ends of the bidirected edge and head is -1.
struct Trek {
  std::vector<int> left;   // left endpoint ... left anchor
  std::vector<int> right;  // right anchor ... right endpoint
  bool has_bidirected = false;
  int head = -1;

  int left_length() const { return static_cast<int>(left.size()) - 1; }
  int right_length() const { return static_cast<int>(right.size()) - 1; }
};

// All directed paths from src to dst as vertex sequences (src first). The
// graph must be acyclic.
std::vector<std::vector<int>> directed_paths(const MixedGraph& g, int src, int dst);

// All simple treks between i and j (sides intersect at most at the head),
// sorted deterministically. Guarded to d <= 8; enumeration is exponential
// and intended for oracles and small-graph algebra.
std::vector<Trek> simple_treks(const MixedGraph& g, int i, int j);

// All nonempty treks from i to i (sides may intersect), for the diagonal
// trek-sum formula. Same d <= 8 guard.
std::vector<Trek> self_treks(const MixedGraph& g, int i);

}  // namespace bap
