#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "brownian_atlas/path_grid.hpp"
#include "brownian_atlas/snake.hpp"

namespace brownian_atlas {

namespace detail {

struct EqualMinimaClasses {
  std::vector<int> class_id;               // index -> class
  std::vector<std::vector<int>> classes;   // class -> sorted member indices
};

// Groups indices carrying equal values with no smaller value in between
// (transitively), via one monotone-stack sweep.
inline EqualMinimaClasses equal_minima_classes(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  EqualMinimaClasses out;
  out.class_id.assign(n, -1);
  std::vector<int> stack;
  for (int j = 0; j < n; ++j) {
    while (!stack.empty() && x[stack.back()] > x[j]) stack.pop_back();
    if (!stack.empty() && x[stack.back()] == x[j]) {
      const int top = stack.back();
      if (out.class_id[top] < 0) {
        out.class_id[top] = static_cast<int>(out.classes.size());
        out.classes.push_back({top});
      }
      out.class_id[j] = out.class_id[top];
      out.classes[out.class_id[j]].push_back(j);
      stack.back() = j;
    } else {
      stack.push_back(j);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (out.class_id[i] < 0) {
      out.class_id[i] = static_cast<int>(out.classes.size());
      out.classes.push_back({i});
    }
  }
  return out;
}

}  // namespace detail

// Contour-tree structure of a lifetime path: pseudo-distance between grid
// indices and the equivalence classes of indices encoding the same tree point
// (equal value, no smaller value between them).
class TreeView {
 public:
  explicit TreeView(const SnakePath& snake)
      : snake_(&snake), minima_(snake.grid.values, snake.variant == Variant::map) {
    auto built = detail::equal_minima_classes(snake.grid.values);
    class_id_ = std::move(built.class_id);
    classes_ = std::move(built.classes);
  }

  double tree_distance(int i, int j) const {
    check(i);
    check(j);
    const double m = minima_.range_min(i, j);
    return (snake_->x(i) - m) + (snake_->x(j) - m);
  }

  bool is_equivalent(int i, int j, double tol = 0.0) const { return tree_distance(i, j) <= tol; }

  // All indices within tree-distance tol of i, scanned outward; at most cap
  // members are returned and the overflow counter is bumped on truncation.
  std::vector<int> equivalence_class(int i, double tol = 0.0, int cap = 64) const {
    check(i);
    if (tol == 0.0 && cap >= static_cast<int>(exact_class(i).size())) return exact_class(i);
    const double xi = snake_->x(i);
    std::vector<int> out{i};
    auto scan = [&](int step) {
      double run = xi;
      for (int j = i + step; j >= 0 && j < snake_->size(); j += step) {
        run = std::min(run, snake_->x(j));
        if (xi - run > tol) break;
        const double dt = (xi - std::min(xi, run)) + (snake_->x(j) - std::min(xi, run));
        if (dt <= tol) {
          if (static_cast<int>(out.size()) >= cap) {
            ++cap_overflows_;
            return;
          }
          out.push_back(j);
        }
      }
    };
    scan(+1);
    scan(-1);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Exact-equality class of i (tolerance 0), precomputed in O(n).
  const std::vector<int>& exact_class(int i) const {
    check(i);
    return classes_[class_id_[i]];
  }

  long cap_overflows() const { return cap_overflows_; }
  const MinimaIndex& minima() const { return minima_; }

 private:
  void check(int i) const {
    if (i < 0 || i >= snake_->size()) throw std::invalid_argument("TreeView: index out of range");
  }

  const SnakePath* snake_;
  MinimaIndex minima_;
  std::vector<int> class_id_;
  std::vector<std::vector<int>> classes_;
  mutable long cap_overflows_ = 0;
};

}  // namespace brownian_atlas
