#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "brownian_atlas/path_grid.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/tree.hpp"

namespace brownian_atlas {

struct HullSet {
  int center = 0;
  double radius = 0.0;
  int basepoint = 0;
  std::vector<int> ball;
  std::vector<int> hull;  // ball plus every complement component cut off from the basepoint
};

// Quotient pseudo-metric of a snake: one-step bound d_circle, its
// tree-point refinement d_tree_circle, and the chain metric realized by
// Dijkstra on the complete graph over grid indices.
//
// Finished distance arrays are capped at the one-step bound and floored at
// the label gap |Y_i - Y_j|; both are theorems for the chain metric, and
// applying them keeps the floating-point output inside the proven envelope.
class QuotientMetric {
 public:
  explicit QuotientMetric(const SnakePath& snake)
      : snake_(&snake), tree_(snake), labels_min_(snake.labels, snake.variant == Variant::map) {}

  const SnakePath& snake() const { return *snake_; }
  const TreeView& tree() const { return tree_; }
  int size() const { return snake_->size(); }

  // One-step bound between indices: Y_i + Y_j minus twice the better of the
  // two arc minima (interval and complement-of-interval).
  double d_circle(int i, int j) const {
    check(i);
    check(j);
    const double m =
        std::max(labels_min_.range_min(i, j), labels_min_.complement_min(i, j));
    return (snake_->y(i) - m) + (snake_->y(j) - m);
  }

  // Minimum of d_circle over the tree-equivalence classes of both indices.
  double d_tree_circle(int i, int j, double tol = 0.0) const {
    const auto reps_i = tol == 0.0 ? tree_.exact_class(i) : tree_.equivalence_class(i, tol);
    const auto reps_j = tol == 0.0 ? tree_.exact_class(j) : tree_.equivalence_class(j, tol);
    if (reps_i.size() == 1 && reps_j.size() == 1) return d_circle(i, j);
    double best = std::numeric_limits<double>::infinity();
    for (int a : reps_i)
      for (int b : reps_j) best = std::min(best, d_circle(a, b));
    return best;
  }

  // Chain metric from one source to every index: Dijkstra over the complete
  // graph with d_tree_circle edge weights. Results are cached per source.
  const std::vector<double>& quotient_sssp(int source) const {
    check(source);
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      auto it = cache_.find(source);
      if (it != cache_.end()) return it->second;
    }
    std::vector<double> dist = run_dijkstra(source);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(source, std::move(dist)).first->second;
  }

  double distance(int i, int j) const { return quotient_sssp(i)[j]; }

  // Injects a previously computed distance row (e.g. from an on-disk cache).
  void preload_row(int source, std::vector<double> row) {
    check(source);
    if (static_cast<int>(row.size()) != size())
      throw std::invalid_argument("preload_row: row length mismatch");
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.emplace(source, std::move(row));
  }

  bool has_cached_row(int source) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.count(source) > 0;
  }

  // Exact grid diameter with the full source set (max_sources = 0), or the
  // subsampled estimate: evenly spaced sources plus both label extremes.
  double diameter(int max_sources = 0) const {
    if (snake_->variant == Variant::plane)
      throw std::invalid_argument("diameter: plane variant requires an explicit index window");
    return window_diameter(0, snake_->last(), max_sources);
  }

  double window_diameter(int w0, int w1, int max_sources = 0) const {
    check(w0);
    check(w1);
    if (w0 > w1) throw std::invalid_argument("window_diameter: empty window");
    std::vector<int> sources = pick_sources(w0, w1, max_sources);
    double best = 0.0;
    for (int s : sources) {
      const auto& dist = quotient_sssp(s);
      for (int t = w0; t <= w1; ++t) best = std::max(best, dist[t]);
    }
    return best;
  }

  std::vector<int> metric_ball(int center, double r) const {
    check(center);
    if (r < 0.0) throw std::invalid_argument("metric_ball: negative radius");
    const auto& dist = quotient_sssp(center);
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (dist[i] <= r) out.push_back(i);
    return out;
  }

  // Ball plus the complement components that do not reach the basepoint.
  // Complement adjacency: consecutive grid indices and tree-equivalent pairs.
  HullSet filled_hull(int center, double r, int basepoint) const {
    check(basepoint);
    HullSet h;
    h.center = center;
    h.radius = r;
    h.basepoint = basepoint;
    h.ball = metric_ball(center, r);
    std::vector<char> in_ball(size(), 0);
    for (int i : h.ball) in_ball[i] = 1;
    if (in_ball[basepoint])
      throw std::invalid_argument("filled_hull: basepoint lies inside the ball");
    std::vector<char> reach(size(), 0);
    std::vector<int> stack{basepoint};
    reach[basepoint] = 1;
    auto push = [&](int v) {
      if (v >= 0 && v < size() && !reach[v] && !in_ball[v]) {
        reach[v] = 1;
        stack.push_back(v);
      }
    };
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      push(u - 1);
      push(u + 1);
      for (int v : tree_.exact_class(u)) push(v);
    }
    for (int i = 0; i < size(); ++i)
      if (in_ball[i] || !reach[i]) h.hull.push_back(i);
    return h;
  }

  // Default hull basepoint for the infinite-volume variant: the window
  // endpoint furthest in time from the root.
  int default_plane_basepoint() const {
    if (snake_->variant != Variant::plane)
      throw std::invalid_argument("default_plane_basepoint: map variant has no canonical basepoint");
    return std::abs(snake_->grid.time_of(0)) >= std::abs(snake_->grid.time_of(snake_->last()))
               ? 0
               : snake_->last();
  }

 private:
  void check(int i) const {
    if (i < 0 || i >= size()) throw std::invalid_argument("QuotientMetric: index out of range");
  }

  std::vector<int> pick_sources(int w0, int w1, int max_sources) const {
    const int count = w1 - w0 + 1;
    std::vector<int> sources;
    if (max_sources <= 0 || max_sources >= count) {
      sources.resize(count);
      for (int i = 0; i < count; ++i) sources[i] = w0 + i;
      return sources;
    }
    for (int k = 0; k < max_sources; ++k)
      sources.push_back(w0 + static_cast<int>((static_cast<long long>(k) * (count - 1)) /
                                              std::max(1, max_sources - 1)));
    int lo = w0, hi = w0;
    for (int i = w0; i <= w1; ++i) {
      if (snake_->y(i) < snake_->y(lo)) lo = i;
      if (snake_->y(i) > snake_->y(hi)) hi = i;
    }
    sources.push_back(lo);
    sources.push_back(hi);
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    return sources;
  }

  std::vector<double> run_dijkstra(int source) const {
    const int n = size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (int v = 0; v < n; ++v) {
        if (done[v]) continue;
        const double nd = du + d_tree_circle(u, v);
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    const double ys = snake_->y(source);
    for (int v = 0; v < n; ++v) dist[v] = std::max(dist[v], std::abs(snake_->y(v) - ys));
    return dist;
  }

  const SnakePath* snake_;
  TreeView tree_;
  MinimaIndex labels_min_;
  mutable std::unordered_map<int, std::vector<double>> cache_;
  mutable std::mutex cache_mutex_;
};

}  // namespace brownian_atlas
