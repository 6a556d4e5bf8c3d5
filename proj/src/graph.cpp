#include "bap/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace bap {

void MixedGraph::check(int i, int j) const {
  if (i < 0 || i >= d_ || j < 0 || j >= d_)
    throw std::invalid_argument("vertex index out of range");
  if (i == j) throw std::invalid_argument("self-loops are not allowed");
}

void MixedGraph::add_directed(int i, int j) {
  check(i, j);
  dir_[i * d_ + j] = 1;
}

void MixedGraph::add_bidirected(int i, int j) {
  check(i, j);
  bidir_[i * d_ + j] = 1;
  bidir_[j * d_ + i] = 1;
}

void MixedGraph::remove_directed(int i, int j) {
  check(i, j);
  dir_[i * d_ + j] = 0;
}

void MixedGraph::remove_bidirected(int i, int j) {
  check(i, j);
  bidir_[i * d_ + j] = 0;
  bidir_[j * d_ + i] = 0;
}

void MixedGraph::remove_between(int i, int j) {
  check(i, j);
  dir_[i * d_ + j] = 0;
  dir_[j * d_ + i] = 0;
  bidir_[i * d_ + j] = 0;
  bidir_[j * d_ + i] = 0;
}

std::vector<std::pair<int, int>> MixedGraph::directed_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (dir_[i * d_ + j]) out.emplace_back(i, j);
  return out;
}

std::vector<std::pair<int, int>> MixedGraph::bidirected_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d_; ++i)
    for (int j = i + 1; j < d_; ++j)
      if (bidir_[i * d_ + j]) out.emplace_back(i, j);
  return out;
}

std::vector<int> MixedGraph::parents(int i) const {
  std::vector<int> out;
  for (int j = 0; j < d_; ++j)
    if (has_directed(j, i)) out.push_back(j);
  return out;
}

std::vector<int> MixedGraph::children(int i) const {
  std::vector<int> out;
  for (int j = 0; j < d_; ++j)
    if (has_directed(i, j)) out.push_back(j);
  return out;
}

std::vector<int> MixedGraph::spouses(int i) const {
  std::vector<int> out;
  for (int j = 0; j < d_; ++j)
    if (has_bidirected(i, j)) out.push_back(j);
  return out;
}

int MixedGraph::in_degree(int i) const {
  int deg = 0;
  for (int j = 0; j < d_; ++j) {
    if (has_directed(j, i)) ++deg;
    if (has_bidirected(i, j)) ++deg;
  }
  return deg;
}

int MixedGraph::num_directed() const {
  int c = 0;
  for (auto v : dir_) c += v;
  return c;
}

int MixedGraph::num_bidirected() const {
  int c = 0;
  for (auto v : bidir_) c += v;
  return c / 2;
}

std::string MixedGraph::key() const {
  std::string s;
  s.reserve(static_cast<std::size_t>(d_) * d_ + 8);
  s += std::to_string(d_);
  s += ':';
  for (int i = 0; i < d_; ++i)
    for (int j = i + 1; j < d_; ++j) {
      char c = '0';
      if (has_directed(i, j)) c += 1;
      if (has_directed(j, i)) c += 2;
      if (has_bidirected(i, j)) c += 4;
      s += c;
    }
  return s;
}

std::optional<std::vector<int>> topological_order(const MixedGraph& g) {
  const int d = g.num_vertices();
  std::vector<int> indeg(d, 0);
  for (auto [i, j] : g.directed_edges()) ++indeg[j];
  std::vector<int> order;
  order.reserve(d);
  // Smallest-index-first Kahn's algorithm for a deterministic order.
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < d; ++v)
    if (indeg[v] == 0) ready.push(v);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : g.children(v))
      if (--indeg[c] == 0) ready.push(c);
  }
  if (static_cast<int>(order.size()) != d) return std::nullopt;
  return order;
}

bool is_acyclic(const MixedGraph& g) { return topological_order(g).has_value(); }

bool is_dag(const MixedGraph& g) {
  return g.num_bidirected() == 0 && is_acyclic(g);
}

bool is_bap(const MixedGraph& g) {
  const int d = g.num_vertices();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      int edges = (g.has_directed(i, j) ? 1 : 0) + (g.has_directed(j, i) ? 1 : 0) +
                  (g.has_bidirected(i, j) ? 1 : 0);
      if (edges > 1) return false;
    }
  return is_acyclic(g);
}

bool is_admissible(const MixedGraph& g, GraphClass cls) {
  switch (cls) {
    case GraphClass::DAG:
      return is_dag(g);
    case GraphClass::BAP:
      return is_bap(g);
    case GraphClass::APD:
      return is_acyclic(g);
  }
  return false;
}

std::vector<std::vector<int>> districts(const MixedGraph& g) {
  const int d = g.num_vertices();
  std::vector<int> comp(d, -1);
  int next = 0;
  for (int v = 0; v < d; ++v) {
    if (comp[v] != -1) continue;
    std::queue<int> q;
    q.push(v);
    comp[v] = next;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int w : g.spouses(u))
        if (comp[w] == -1) {
          comp[w] = next;
          q.push(w);
        }
    }
    ++next;
  }
  std::vector<std::vector<int>> out(next);
  for (int v = 0; v < d; ++v) out[comp[v]].push_back(v);
  return out;
}

std::vector<int> ancestors(const MixedGraph& g, const std::vector<int>& c) {
  const int d = g.num_vertices();
  std::vector<char> in(d, 0);
  std::queue<int> q;
  for (int v : c) {
    if (v < 0 || v >= d) throw std::invalid_argument("vertex index out of range");
    if (!in[v]) {
      in[v] = 1;
      q.push(v);
    }
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int p : g.parents(v))
      if (!in[p]) {
        in[p] = 1;
        q.push(p);
      }
  }
  std::vector<int> out;
  for (int v = 0; v < d; ++v)
    if (in[v]) out.push_back(v);
  return out;
}

namespace {

// Collider-connectedness of u and v within the vertex mask: either adjacent,
// or joined through a chain of bidirected edges every vertex of which
// receives an arrowhead from its neighbors (u *-> w1 <-> ... <-> wk <-* v).
bool collider_connected(const MixedGraph& g, const std::vector<char>& mask, int u,
                        int v) {
  if (g.adjacent(u, v)) return true;
  const int d = g.num_vertices();
  // BFS over bidirected edges among mask \ {u, v}, seeded at vertices that
  // receive an arrowhead from u.
  std::vector<char> seen(d, 0);
  std::queue<int> q;
  for (int w = 0; w < d; ++w) {
    if (!mask[w] || w == u || w == v) continue;
    if (g.arrowhead_at(w, u)) {
      seen[w] = 1;
      q.push(w);
    }
  }
  while (!q.empty()) {
    int w = q.front();
    q.pop();
    if (g.arrowhead_at(w, v)) return true;
    for (int x : g.spouses(w))
      if (mask[x] && x != u && x != v && !seen[x]) {
        seen[x] = 1;
        q.push(x);
      }
  }
  return false;
}

}  // namespace

bool m_separated(const MixedGraph& g, int a, int b, const std::vector<int>& c) {
  const int d = g.num_vertices();
  if (a < 0 || a >= d || b < 0 || b >= d)
    throw std::invalid_argument("vertex index out of range");
  if (a == b) throw std::invalid_argument("endpoints must differ");
  for (int v : c) {
    if (v < 0 || v >= d) throw std::invalid_argument("vertex index out of range");
    if (v == a || v == b)
      throw std::invalid_argument("conditioning set must not contain endpoints");
  }

  std::vector<int> hull = {a, b};
  hull.insert(hull.end(), c.begin(), c.end());
  std::vector<char> mask(d, 0);
  for (int v : ancestors(g, hull)) mask[v] = 1;

  std::vector<char> cond(d, 0);
  for (int v : c) cond[v] = 1;

  // Separation of a and b by C in the augmented (collider-connected) graph
  // over the ancestral hull.
  std::vector<char> seen(d, 0);
  std::queue<int> q;
  seen[a] = 1;
  q.push(a);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < d; ++v) {
      if (v == u || !mask[v] || seen[v]) continue;
      if (!collider_connected(g, mask, u, v)) continue;
      if (v == b) return false;
      if (cond[v]) continue;
      seen[v] = 1;
      q.push(v);
    }
  }
  return true;
}

std::vector<std::pair<int, int>> skeleton(const MixedGraph& g) {
  std::vector<std::pair<int, int>> out;
  const int d = g.num_vertices();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (g.adjacent(i, j)) out.emplace_back(i, j);
  return out;
}

std::vector<std::tuple<int, int, int>> collider_triples(const MixedGraph& g) {
  std::vector<std::tuple<int, int, int>> out;
  const int d = g.num_vertices();
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (i == j || !g.arrowhead_at(j, i)) continue;
      for (int k = i + 1; k < d; ++k) {
        if (k == j || !g.arrowhead_at(j, k)) continue;
        out.emplace_back(i, j, k);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::tuple<int, int, int>> v_structures(const MixedGraph& g) {
  std::vector<std::tuple<int, int, int>> out;
  for (auto [i, j, k] : collider_triples(g))
    if (!g.adjacent(i, k)) out.emplace_back(i, j, k);
  return out;
}

InducedSubgraph induced_subgraph(const MixedGraph& g, const std::vector<int>& w) {
  const int d = g.num_vertices();
  std::vector<int> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int v : sorted)
    if (v < 0 || v >= d) throw std::invalid_argument("W is not a subset of V");

  InducedSubgraph out;
  out.vertex_map = sorted;
  const int m = static_cast<int>(sorted.size());
  out.graph = MixedGraph(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      if (g.has_directed(sorted[a], sorted[b])) out.graph.add_directed(a, b);
      if (a < b && g.has_bidirected(sorted[a], sorted[b]))
        out.graph.add_bidirected(a, b);
    }
  return out;
}

namespace {

bool within_cap(const MixedGraph& g, std::optional<int> cap, int i, int j) {
  if (!cap) return true;
  return g.in_degree(i) <= *cap && g.in_degree(j) <= *cap;
}

void maybe_emit(std::vector<MixedGraph>& out, MixedGraph cand, GraphClass cls,
                std::optional<int> cap, int i, int j) {
  if (!is_admissible(cand, cls)) return;
  if (!within_cap(cand, cap, i, j)) return;
  out.push_back(std::move(cand));
}

}  // namespace

std::vector<MixedGraph> neighbors(const MixedGraph& g, GraphClass cls,
                                  std::optional<int> max_in_degree) {
  const int d = g.num_vertices();
  std::vector<MixedGraph> out;

  // Deletions.
  for (auto [i, j] : g.directed_edges()) {
    MixedGraph cand = g;
    cand.remove_directed(i, j);
    out.push_back(std::move(cand));
  }
  for (auto [i, j] : g.bidirected_edges()) {
    MixedGraph cand = g;
    cand.remove_bidirected(i, j);
    out.push_back(std::move(cand));
  }

  // Additions.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j || g.has_directed(i, j)) continue;
      if (cls != GraphClass::APD && g.adjacent(i, j)) continue;
      if (cls == GraphClass::APD && g.has_directed(j, i)) continue;  // 2-cycle
      MixedGraph cand = g;
      cand.add_directed(i, j);
      maybe_emit(out, std::move(cand), cls, max_in_degree, i, j);
    }
  if (cls != GraphClass::DAG)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        if (g.has_bidirected(i, j)) continue;
        if (cls != GraphClass::APD && g.adjacent(i, j)) continue;
        MixedGraph cand = g;
        cand.add_bidirected(i, j);
        maybe_emit(out, std::move(cand), cls, max_in_degree, i, j);
      }

  // Same-skeleton edge changes.
  for (auto [i, j] : g.directed_edges()) {
    if (!g.has_directed(j, i)) {
      MixedGraph cand = g;
      cand.remove_directed(i, j);
      cand.add_directed(j, i);
      maybe_emit(out, std::move(cand), cls, max_in_degree, i, j);
    }
    if (cls != GraphClass::DAG && !g.has_bidirected(i, j)) {
      MixedGraph cand = g;
      cand.remove_directed(i, j);
      cand.add_bidirected(i, j);
      maybe_emit(out, std::move(cand), cls, max_in_degree, i, j);
    }
  }
  if (cls != GraphClass::DAG)
    for (auto [i, j] : g.bidirected_edges()) {
      for (auto [s, t] : {std::pair{i, j}, std::pair{j, i}}) {
        if (g.has_directed(s, t)) continue;
        MixedGraph cand = g;
        cand.remove_bidirected(i, j);
        cand.add_directed(s, t);
        maybe_emit(out, std::move(cand), cls, max_in_degree, i, j);
      }
    }

  return out;
}

std::vector<MixedGraph> enumerate_baps(int d, std::optional<int> max_in_degree) {
  if (d < 0 || d > 5)
    throw std::invalid_argument("enumerate_baps is guarded to d <= 5");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  const int m = static_cast<int>(pairs.size());

  std::vector<MixedGraph> out;
  std::vector<int> state(m, 0);  // 0 none, 1 i->j, 2 j->i, 3 i<->j
  while (true) {
    MixedGraph g(d);
    for (int e = 0; e < m; ++e) {
      auto [i, j] = pairs[e];
      if (state[e] == 1) g.add_directed(i, j);
      if (state[e] == 2) g.add_directed(j, i);
      if (state[e] == 3) g.add_bidirected(i, j);
    }
    bool ok = is_acyclic(g);
    if (ok && max_in_degree)
      for (int v = 0; v < d && ok; ++v) ok = g.in_degree(v) <= *max_in_degree;
    if (ok) out.push_back(std::move(g));

    int e = 0;
    while (e < m && state[e] == 3) state[e++] = 0;
    if (e == m) break;
    ++state[e];
  }
  return out;
}

}  // namespace bap
