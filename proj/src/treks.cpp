#include "bap/treks.hpp"

#include <algorithm>
#include <stdexcept>

namespace bap {

namespace {

void path_dfs(const MixedGraph& g, int cur, int dst, std::vector<int>& stack,
              std::vector<std::vector<int>>& out) {
  if (cur == dst) {
    out.push_back(stack);
    return;
  }
  for (int c : g.children(cur)) {
    stack.push_back(c);
    path_dfs(g, c, dst, stack, out);
    stack.pop_back();
  }
}

void check_guard(const MixedGraph& g) {
  if (g.num_vertices() > 8)
    throw std::invalid_argument("trek enumeration is guarded to d <= 8");
  if (!is_acyclic(g))
    throw std::invalid_argument("trek enumeration requires an acyclic graph");
}

bool disjoint(const std::vector<int>& a, const std::vector<int>& b, int skip = -1) {
  for (int x : a) {
    if (x == skip) continue;
    if (std::find(b.begin(), b.end(), x) != b.end()) return false;
  }
  return true;
}

bool trek_less(const Trek& a, const Trek& b) {
  if (a.left != b.left) return a.left < b.left;
  if (a.right != b.right) return a.right < b.right;
  return a.has_bidirected < b.has_bidirected;
}

}  // namespace

std::vector<std::vector<int>> directed_paths(const MixedGraph& g, int src, int dst) {
  std::vector<std::vector<int>> out;
  std::vector<int> stack = {src};
  path_dfs(g, src, dst, stack, out);
  return out;
}

std::vector<Trek> simple_treks(const MixedGraph& g, int i, int j) {
  check_guard(g);
  if (i == j) throw std::invalid_argument("simple_treks expects distinct endpoints");
  const int d = g.num_vertices();
  std::vector<Trek> out;

  for (int h = 0; h < d; ++h) {
    for (const auto& p : directed_paths(g, h, i)) {
      for (const auto& q : directed_paths(g, h, j)) {
        if (!disjoint(p, q, h)) continue;
        Trek t;
        t.left.assign(p.rbegin(), p.rend());
        t.right = q;
        t.head = h;
        out.push_back(std::move(t));
      }
    }
  }
  for (auto [a, b] : g.bidirected_edges()) {
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      for (const auto& p : directed_paths(g, x, i)) {
        for (const auto& q : directed_paths(g, y, j)) {
          if (!disjoint(p, q)) continue;
          Trek t;
          t.left.assign(p.rbegin(), p.rend());
          t.right = q;
          t.has_bidirected = true;
          out.push_back(std::move(t));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), trek_less);
  return out;
}

std::vector<Trek> self_treks(const MixedGraph& g, int i) {
  check_guard(g);
  const int d = g.num_vertices();
  std::vector<Trek> out;

  // Bidirected-free self-treks: two directed paths from a common ancestor,
  // each of length >= 1 (a zero-length side would force a directed cycle).
  for (int h = 0; h < d; ++h) {
    if (h == i) continue;
    const auto paths = directed_paths(g, h, i);
    for (const auto& p : paths) {
      for (const auto& q : paths) {
        Trek t;
        t.left.assign(p.rbegin(), p.rend());
        t.right = q;
        t.head = h;
        out.push_back(std::move(t));
      }
    }
  }
  for (auto [a, b] : g.bidirected_edges()) {
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      for (const auto& p : directed_paths(g, x, i)) {
        for (const auto& q : directed_paths(g, y, i)) {
          Trek t;
          t.left.assign(p.rbegin(), p.rend());
          t.right = q;
          t.has_bidirected = true;
          out.push_back(std::move(t));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), trek_less);
  return out;
}

}  // namespace bap
