#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "brownian_atlas/parallel.hpp"
#include "brownian_atlas/path_grid.hpp"
#include "brownian_atlas/quadrature.hpp"
#include "brownian_atlas/rng.hpp"
#include "brownian_atlas/stats.hpp"

namespace brownian_atlas {

enum class EndpointLaw { excursion, bessel3 };

inline const char* endpoint_law_name(EndpointLaw which) {
  return which == EndpointLaw::excursion ? "excursion" : "bessel3";
}

// Endpoint density of the normalized excursion at interior time t.
inline double excursion_endpoint_pdf(double x, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("excursion_endpoint_pdf: need t in (0,1)");
  if (x < 0.0) throw std::invalid_argument("excursion_endpoint_pdf: need x >= 0");
  const double cube = t * t * t * (1.0 - t) * (1.0 - t) * (1.0 - t);
  return 2.0 * x * x / std::sqrt(2.0 * kPi * cube) *
         std::exp(-x * x / (2.0 * t) - x * x / (2.0 * (1.0 - t)));
}

// Endpoint density of the 3d Bessel path at time t: the norm density of a 3d
// centered Gaussian with per-coordinate variance t.
inline double bessel_endpoint_pdf(double x, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("bessel_endpoint_pdf: need t > 0");
  if (x < 0.0) throw std::invalid_argument("bessel_endpoint_pdf: need x >= 0");
  return 2.0 * x * x / std::sqrt(2.0 * kPi * t * t * t) * std::exp(-x * x / (2.0 * t));
}

inline double endpoint_pdf(double x, EndpointLaw which, double t = 0.5) {
  return which == EndpointLaw::excursion ? excursion_endpoint_pdf(x, t)
                                         : bessel_endpoint_pdf(x, t);
}

// Change of law from the excursion endpoint to the Bessel endpoint at t=1/2,
// evaluated as the definitional density ratio.
inline double rn_derivative(double x) {
  if (!(x > 0.0)) throw std::domain_error("rn_derivative: ratio undefined at x <= 0");
  return bessel_endpoint_pdf(x, 0.5) / excursion_endpoint_pdf(x, 0.5);
}

namespace detail {

// Cutoff M with the tail of c x^2 exp(-alpha x^2) below tol, from the bound
// integral_M^inf x^2 e^{-a x^2} dx <= M e^{-a M^2} / (2a) for M >= sqrt(2/a).
inline double gaussian_tail_cutoff(double coeff, double alpha, double tol) {
  double m = std::max(1.0, std::sqrt(2.0 / alpha));
  while (coeff * m * std::exp(-alpha * m * m) / (2.0 * alpha) >= tol) m *= 1.5;
  return m;
}

inline double pdf_alpha(EndpointLaw which, double t) {
  return which == EndpointLaw::excursion ? 0.5 / t + 0.5 / (1.0 - t) : 0.5 / t;
}

inline double pdf_coeff(EndpointLaw which, double t) {
  const double cube = which == EndpointLaw::excursion
                          ? t * t * t * (1.0 - t) * (1.0 - t) * (1.0 - t)
                          : t * t * t;
  return 2.0 / std::sqrt(2.0 * kPi * cube);
}

}  // namespace detail

// Total mass of an endpoint density by adaptive quadrature; the analytic tail
// beyond the cutoff is below 1e-12.
inline double endpoint_total_mass(EndpointLaw which, double t = 0.5) {
  const double m = detail::gaussian_tail_cutoff(detail::pdf_coeff(which, t),
                                                detail::pdf_alpha(which, t), 1e-12);
  return integrate_adaptive([&](double x) { return endpoint_pdf(x, which, t); }, 0.0, m).value;
}

inline double endpoint_cdf(double x, EndpointLaw which, double t = 0.5) {
  if (x <= 0.0) return 0.0;
  return integrate_adaptive([&](double u) { return endpoint_pdf(u, which, t); }, 0.0, x).value;
}

// Expectation of the change of law under the excursion endpoint law; equals
// the total mass of the target endpoint density, so its value is 1.
inline double z_expectation() {
  const double m = detail::gaussian_tail_cutoff(detail::pdf_coeff(EndpointLaw::bessel3, 0.5),
                                                detail::pdf_alpha(EndpointLaw::bessel3, 0.5), 1e-12);
  return integrate_adaptive(
             [](double x) { return rn_derivative(x) * excursion_endpoint_pdf(x, 0.5); }, 1e-12, m)
      .value;
}

// ---- L^p window of the change of law ----------------------------------------

struct ZlpResult {
  double p = 0.0;
  bool divergent = false;
  double value = 0.0;  // meaningful only when finite
};

// integral of Z^p against the excursion endpoint law. The integrand is
// proportional to x^2 exp((p-2) x^2): finite below p = 2, divergent above.
// Divergence is detected from partial integrals over dyadic shells
// [2^{k-1}, 2^k]: a convergent integrand's shell masses decay to nothing once
// past its mode, while a divergent one keeps growing (and soon overflows), so
// mass still arriving at the largest shell is the divergence signal.
inline ZlpResult z_lp_norm(double p) {
  if (p < 1.0) throw std::invalid_argument("z_lp_norm: need p >= 1");
  ZlpResult out;
  out.p = p;
  // Z^p times the endpoint density, reduced to one exponential. Evaluating the
  // factors separately turns into inf * 0 = NaN past x ~ 27; the reduced form
  // underflows to 0 when convergent and overflows to +inf when not.
  const double coeff = 16.0 / std::sqrt(2.0 * kPi) / std::pow(2.0 * std::sqrt(2.0), p);
  auto integrand = [p, coeff](double x) {
    return coeff * x * x * std::exp((p - 2.0) * x * x);
  };
  double total = integrate_adaptive(integrand, 1e-12, 1.0).value;
  bool decayed = false;
  for (int k = 1; k <= 10; ++k) {
    const double lo = std::pow(2.0, k - 1);
    const double hi = std::pow(2.0, k);
    // The integrand is largest at the right edge when it grows; probe before
    // integrating so overflow is reported as divergence, not fed to the rule.
    if (!std::isfinite(integrand(hi))) {
      out.divergent = true;
      return out;
    }
    const double shell = integrate_adaptive(integrand, lo, hi).value;
    if (!std::isfinite(shell)) {
      out.divergent = true;
      return out;
    }
    total += shell;
    if (shell <= 1e-14 * total) {
      decayed = true;
      break;
    }
  }
  if (!decayed) {
    out.divergent = true;  // still carrying mass at the shell cap
    return out;
  }
  const double alpha = 2.0 - p;
  if (alpha <= 0.0) {
    out.divergent = true;  // shells cannot have decayed; keep the guard anyway
    return out;
  }
  const double m = detail::gaussian_tail_cutoff(coeff, alpha, 1e-12);
  out.value = integrate_adaptive(integrand, 1e-12, std::max(m, 1.0)).value;
  return out;
}

// ---- endpoint goodness of fit ------------------------------------------------

struct GofReport {
  std::string which;
  int n = 0;
  long replicas = 0;
  double ks_stat = 0.0;
  double p_value = 0.0;
};

// Simulated endpoint value at t = 1/2 for one replica: the excursion path at
// its midpoint index, or the Bessel lifetime at the window edge t = 1/2.
inline double simulate_endpoint(EndpointLaw which, int n, std::uint64_t seed) {
  if (which == EndpointLaw::excursion) {
    if (n % 2 != 0) throw std::invalid_argument("simulate_endpoint: excursion needs even n");
    PathGrid g = sample_excursion(n, seed);
    return g.values[n / 2];
  }
  PathGrid g = sample_plane_lifetime(0.5, n, seed);
  return g.values.back();
}

// KS test of simulated endpoints against the closed-form law. The reference
// CDF is evaluated by incremental quadrature along the sorted sample.
inline GofReport endpoint_gof(EndpointLaw which, int n, long replicas, std::uint64_t seed,
                              int threads = 1) {
  if (replicas < 8) throw std::invalid_argument("endpoint_gof: need replicas >= 8");
  GofReport rep;
  rep.which = endpoint_law_name(which);
  rep.n = n;
  rep.replicas = replicas;
  std::vector<double> xs(replicas);
  parallel_for_replicas(threads, replicas, [&](long r) {
    xs[r] = simulate_endpoint(which, n, Rng(seed, "endpoint", r).next_u64());
  });
  std::sort(xs.begin(), xs.end());
  std::vector<double> cdf(replicas);
  auto pdf = [&](double u) { return endpoint_pdf(u, which, 0.5); };
  double acc = 0.0, prev = 0.0;
  for (long i = 0; i < replicas; ++i) {
    if (xs[i] > prev) acc += integrate_adaptive(pdf, prev, xs[i]).value;
    prev = xs[i];
    cdf[i] = std::min(acc, 1.0);
  }
  double d = 0.0;
  for (long i = 0; i < replicas; ++i) {
    d = std::max(d, cdf[i] - static_cast<double>(i) / replicas);
    d = std::max(d, static_cast<double>(i + 1) / replicas - cdf[i]);
  }
  rep.ks_stat = d;
  const double ne = std::sqrt(static_cast<double>(replicas));
  rep.p_value = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
  return rep;
}

// Tabulated inverse CDF, for drawing calibration samples straight from the
// closed form.
class EndpointSampler {
 public:
  explicit EndpointSampler(EndpointLaw which, double t = 0.5, int table_size = 4096)
      : which_(which), t_(t) {
    const double m = detail::gaussian_tail_cutoff(detail::pdf_coeff(which, t),
                                                  detail::pdf_alpha(which, t), 1e-13);
    xs_.resize(table_size + 1);
    cs_.resize(table_size + 1);
    auto pdf = [&](double u) { return endpoint_pdf(u, which_, t_); };
    xs_[0] = 0.0;
    cs_[0] = 0.0;
    double acc = 0.0;
    for (int i = 1; i <= table_size; ++i) {
      xs_[i] = m * i / table_size;
      acc += integrate_adaptive(pdf, xs_[i - 1], xs_[i]).value;
      cs_[i] = acc;
    }
    for (auto& c : cs_) c /= acc;  // normalize away the residual tail mass
  }

  double sample(Rng& rng) const {
    const double u = rng.next_unit();
    const auto it = std::lower_bound(cs_.begin(), cs_.end(), u);
    const size_t hi = std::min<size_t>(it - cs_.begin(), cs_.size() - 1);
    if (hi == 0) return xs_[0];
    const double span = cs_[hi] - cs_[hi - 1];
    const double frac = span > 0.0 ? (u - cs_[hi - 1]) / span : 0.0;
    return xs_[hi - 1] + frac * (xs_[hi] - xs_[hi - 1]);
  }

 private:
  EndpointLaw which_;
  double t_;
  std::vector<double> xs_, cs_;
};

// Null calibration: KS of inverse-CDF samples against the same closed form;
// returns each meta-run's p-value.
inline std::vector<double> null_endpoint_calibration(EndpointLaw which, int meta_runs,
                                                     long samples, std::uint64_t seed) {
  const EndpointSampler sampler(which);
  std::vector<double> p_values(meta_runs);
  for (int m = 0; m < meta_runs; ++m) {
    Rng rng(seed, "endpoint-null", m);
    std::vector<double> xs(samples);
    for (auto& x : xs) x = sampler.sample(rng);
    p_values[m] = ks_one_sample(xs, [&](double v) { return endpoint_cdf(v, which); }).p_value;
  }
  return p_values;
}

}  // namespace brownian_atlas
