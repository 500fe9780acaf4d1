#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "brownian_atlas/path_grid.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/tree.hpp"

namespace brownian_atlas {

// Sparse shortest-path engine for the quotient metric.
//
// Complete-graph Dijkstra is exact but quadratic per source.  Shortest paths
// are preserved when the graph keeps only pairs (a, b) whose connecting arc
// (either side) attains its label minimum at one of the two endpoints: any
// one-step bound d_circle(s, t) splits exactly through the arc argmin u* into
// d_circle(s, u*) + d_circle(u*, t), and both halves are such pairs.  Those
// pairs are enumerated with nearest-smaller-value ladders (interval side) and
// prefix/suffix minima (complement side), plus zero-weight links inside each
// tree-equivalence class so a chain can hop to the better representative.
//
// Node space: the map variant works on the circle of size()-1 nodes (the last
// grid index aliases node 0); the plane variant keeps every index.
class FastMetric {
 public:
  explicit FastMetric(const SnakePath& snake)
      : variant_(snake.variant),
        nodes_(snake.variant == Variant::map ? snake.size() - 1 : snake.size()) {
    y_.assign(snake.labels.begin(), snake.labels.begin() + nodes_);
    std::vector<double> x(snake.grid.values.begin(), snake.grid.values.begin() + nodes_);
    labels_min_ = MinimaIndex(y_, /*allow_cyclic=*/variant_ == Variant::map);
    std::vector<std::pair<int, int>> pairs =
        variant_ == Variant::map ? circular_pairs() : linear_pairs();
    pair_count_ = static_cast<long>(pairs.size());
    build_csr(pairs, detail::equal_minima_classes(x));
  }

  int nodes() const { return nodes_; }
  Variant variant() const { return variant_; }
  double y(int node) const { return y_[node]; }
  long pair_count() const { return pair_count_; }
  long csr_edges() const { return static_cast<long>(adj_to_.size()); }

  int node_of_index(int grid_index) const {
    return variant_ == Variant::map ? grid_index % nodes_ : grid_index;
  }

  // One-step bound between nodes, same formula as the dense engine.
  double d_circle_nodes(int a, int b) const {
    const double m =
        std::max(labels_min_.range_min(a, b), labels_min_.complement_min(a, b));
    return (y_[a] - m) + (y_[b] - m);
  }

  // Distances from one source to every node.  Finished values are capped at
  // the one-step bound and floored at the label gap, as in the dense engine.
  void sssp_into(int source, std::vector<double>& dist) const {
    run_dijkstra(source, dist, -1);
    for (int t = 0; t < nodes_; ++t) {
      dist[t] = std::min(dist[t], d_circle_nodes(source, t));
      dist[t] = std::max(dist[t], std::abs(y_[t] - y_[source]));
    }
  }

  std::vector<double> sssp(int source) const {
    std::vector<double> dist;
    sssp_into(source, dist);
    return dist;
  }

  // Point-to-point distance with early exit once the target settles.
  double distance(int a, int b) const {
    if (a == b) return 0.0;
    std::vector<double> dist;
    run_dijkstra(a, dist, b);
    double d = std::min(dist[b], d_circle_nodes(a, b));
    return std::max(d, std::abs(y_[b] - y_[a]));
  }

  // Distances to a target set only, stopping once every target settles.
  // Entries outside the target set are not finalized.
  void sssp_targets_into(int source, const std::vector<int>& targets,
                         std::vector<double>& dist) const {
    run_dijkstra(source, dist, -1, &targets);
    for (int t : targets) {
      dist[t] = std::min(dist[t], d_circle_nodes(source, t));
      dist[t] = std::max(dist[t], std::abs(y_[t] - y_[source]));
    }
  }

  // Diameter of a node window: max distance over sources x window targets.
  // n_sources <= 0 uses every window node (exact at grid level); otherwise
  // evenly spaced sources plus both label extremes of the window.
  double window_diameter(int w0, int w1, int n_sources = 0) const {
    if (w0 < 0 || w1 >= nodes_ || w0 > w1)
      throw std::invalid_argument("window_diameter: bad node window");
    std::vector<int> sources;
    const int count = w1 - w0 + 1;
    if (n_sources <= 0 || n_sources >= count) {
      sources.resize(count);
      for (int i = 0; i < count; ++i) sources[i] = w0 + i;
    } else {
      for (int k = 0; k < n_sources; ++k)
        sources.push_back(w0 + static_cast<int>((static_cast<long long>(k) * (count - 1)) /
                                                std::max(1, n_sources - 1)));
      int lo = w0, hi = w0;
      for (int i = w0; i <= w1; ++i) {
        if (y_[i] < y_[lo]) lo = i;
        if (y_[i] > y_[hi]) hi = i;
      }
      sources.push_back(lo);
      sources.push_back(hi);
      std::sort(sources.begin(), sources.end());
      sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    }
    double best = 0.0;
    std::vector<double> dist;
    for (int s : sources) {
      sssp_into(s, dist);
      for (int t = w0; t <= w1; ++t) best = std::max(best, dist[t]);
    }
    return best;
  }

 private:
  // Nearest strictly smaller value to the left; -1 when none exists.
  static std::vector<int> nsv_left(const std::vector<double>& a) {
    std::vector<int> out(a.size());
    std::vector<int> stack;
    for (int i = 0; i < static_cast<int>(a.size()); ++i) {
      while (!stack.empty() && a[stack.back()] >= a[i]) stack.pop_back();
      out[i] = stack.empty() ? -1 : stack.back();
      stack.push_back(i);
    }
    return out;
  }

  // Plane variant: pairs whose interval side or two-sided complement side
  // attains its minimum at an endpoint.
  std::vector<std::pair<int, int>> linear_pairs() const {
    const int m = nodes_;
    std::vector<std::pair<int, int>> pairs;
    const std::vector<int> nsv = nsv_left(y_);
    for (int b = 1; b < m; ++b) {
      for (int a = b - 1; a > nsv[b]; --a) pairs.emplace_back(a, b);
      for (int a = nsv[b]; a >= 0; a = nsv[a]) pairs.emplace_back(a, b);
    }
    std::vector<double> pre(m), suf(m);
    pre[0] = y_[0];
    for (int i = 1; i < m; ++i) pre[i] = std::min(pre[i - 1], y_[i]);
    suf[m - 1] = y_[m - 1];
    for (int i = m - 2; i >= 0; --i) suf[i] = std::min(suf[i + 1], y_[i]);
    for (int a = 0; a < m - 1; ++a) {
      if (pre[a] != y_[a]) continue;  // complement min can only sit on a prefix minimum
      auto from = suf.begin() + (a + 1);
      auto it = std::lower_bound(from, suf.end(), y_[a]);
      for (int b = static_cast<int>(it - suf.begin()); b < m; ++b) pairs.emplace_back(a, b);
    }
    for (int b = 1; b < m; ++b) {
      if (suf[b] != y_[b]) continue;
      // pre is nonincreasing: valid a's form the prefix where pre >= y_[b].
      auto it = std::lower_bound(pre.begin(), pre.begin() + b, y_[b],
                                 [](double v, double key) { return v >= key; });
      for (int a = 0; a < static_cast<int>(it - pre.begin()); ++a) pairs.emplace_back(a, b);
    }
    return pairs;
  }

  // Map variant: every circular arc shows up once in the doubled array, so
  // one interval-side sweep over it covers both sides of each pair.
  std::vector<std::pair<int, int>> circular_pairs() const {
    const int m = nodes_;
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> z(y_);
    z.insert(z.end(), y_.begin(), y_.end());
    const std::vector<int> nsv = nsv_left(z);
    for (int b = m; b < 2 * m; ++b) {
      const int lb = std::max(nsv[b], b - m);
      for (int a = b - 1; a > lb; --a) pairs.emplace_back(a % m, b % m);
      for (int a = nsv[b]; a > b - m; a = nsv[a]) pairs.emplace_back(a % m, b % m);
    }
    return pairs;
  }

  void build_csr(const std::vector<std::pair<int, int>>& pairs,
                 const detail::EqualMinimaClasses& classes) {
    std::vector<std::pair<int, int>> links(pairs);
    for (const auto& cls : classes.classes)
      for (size_t k = 1; k < cls.size(); ++k) links.emplace_back(cls[k - 1], cls[k]);
    std::vector<int> degree(nodes_ + 1, 0);
    for (const auto& [a, b] : links) {
      ++degree[a];
      ++degree[b];
    }
    head_.assign(nodes_ + 1, 0);
    for (int i = 0; i < nodes_; ++i) head_[i + 1] = head_[i] + degree[i];
    adj_to_.resize(head_[nodes_]);
    adj_w_.resize(head_[nodes_]);
    std::vector<int> cursor(head_.begin(), head_.end() - 1);
    const size_t zero_from = pairs.size();
    for (size_t k = 0; k < links.size(); ++k) {
      const auto [a, b] = links[k];
      const double w = k < zero_from ? d_circle_nodes(a, b) : 0.0;
      adj_to_[cursor[a]] = b;
      adj_w_[cursor[a]++] = w;
      adj_to_[cursor[b]] = a;
      adj_w_[cursor[b]++] = w;
    }
  }

  void run_dijkstra(int source, std::vector<double>& dist, int stop_at,
                    const std::vector<int>* stop_set = nullptr) const {
    if (source < 0 || source >= nodes_)
      throw std::invalid_argument("FastMetric: source out of range");
    const double inf = std::numeric_limits<double>::infinity();
    dist.assign(nodes_, inf);
    std::vector<char> done(nodes_, 0);
    std::vector<char> wanted;
    long pending = 0;
    if (stop_set) {
      wanted.assign(nodes_, 0);
      for (int t : *stop_set)
        if (!wanted[t]) {
          wanted[t] = 1;
          ++pending;
        }
    }
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      if (u == stop_at) return;
      if (stop_set && wanted[u] && --pending == 0) return;
      for (int e = head_[u]; e < head_[u + 1]; ++e) {
        const int v = adj_to_[e];
        if (done[v]) continue;
        const double nd = du + adj_w_[e];
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
  }

  Variant variant_;
  int nodes_;
  std::vector<double> y_;
  MinimaIndex labels_min_;
  std::vector<int> head_;
  std::vector<int> adj_to_;
  std::vector<double> adj_w_;
  long pair_count_ = 0;
};

}  // namespace brownian_atlas
