#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace brownian_atlas {

namespace detail {
// Gauss-Kronrod 7/15 pair on [-1,1]; positive half of the symmetric rule.
inline constexpr double kKronrodNodes[8] = {
    0.0000000000000000, 0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585, 0.9914553711208126};
inline constexpr double kKronrodWeights[8] = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299786, 0.0229353220105292};
// Gauss-7 weights aligned with Kronrod node indices 0,2,4,6.
inline constexpr double kGaussWeights[4] = {0.4179591836734694, 0.3818300505051189,
                                            0.2797053914892767, 0.1294849661688697};
}  // namespace detail

struct QuadResult {
  double value;
  double error_estimate;
  int evaluations;
};

inline QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = detail::kKronrodNodes[i] * h;
    const double fv = (i == 0) ? f(c) : f(c - x) + f(c + x);
    kron += detail::kKronrodWeights[i] * fv;
    if (i % 2 == 0) gauss += detail::kGaussWeights[i / 2] * fv;
  }
  kron *= h;
  gauss *= h;
  const double diff = std::abs(kron - gauss);
  // Standard QUADPACK-style error sharpening.
  const double err = std::min(diff, 200.0 * diff * std::sqrt(200.0 * diff));
  return {kron, err, 15};
}

// Adaptive bisection on the worst subinterval until the absolute error
// estimate falls below tol.
inline QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     double tol = 1e-12, int max_intervals = 4096) {
  if (!(a < b)) throw std::invalid_argument("integrate_adaptive: need a < b");
  struct Piece {
    double err, a, b, value;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  std::priority_queue<Piece> pieces;
  QuadResult first = gauss_kronrod_15(f, a, b);
  pieces.push({first.error_estimate, a, b, first.value});
  int evals = first.evaluations;
  int n_pieces = 1;
  double total_err = first.error_estimate;
  while (total_err > tol && n_pieces < max_intervals) {
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const QuadResult left = gauss_kronrod_15(f, worst.a, mid);
    const QuadResult right = gauss_kronrod_15(f, mid, worst.b);
    evals += left.evaluations + right.evaluations;
    total_err += left.error_estimate + right.error_estimate - worst.err;
    pieces.push({left.error_estimate, worst.a, mid, left.value});
    pieces.push({right.error_estimate, mid, worst.b, right.value});
    ++n_pieces;
  }
  double value = 0.0, comp = 0.0;
  double err = 0.0;
  while (!pieces.empty()) {
    const Piece p = pieces.top();
    pieces.pop();
    const double t = value + p.value;
    comp += (std::abs(value) >= std::abs(p.value)) ? (value - t) + p.value : (p.value - t) + value;
    value = t;
    err += p.err;
  }
  return {value + comp, err, evals};
}

}  // namespace brownian_atlas
