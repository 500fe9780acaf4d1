// Acceptance gate: twelve numbered end-to-end criteria, one pass/fail line
// each. Run `acceptance` for the full gate or `acceptance <k>` for one
// criterion. Exit status is 0 only if every requested criterion passes.
//
// Each criterion pins its tolerances inline; seeds are fixed so every run is
// reproducible bit for bit.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "brownian_atlas/densities.hpp"
#include "brownian_atlas/fast_metric.hpp"
#include "brownian_atlas/io.hpp"
#include "brownian_atlas/mmspace.hpp"
#include "brownian_atlas/plane_experiments.hpp"
#include "brownian_atlas/quotient_metric.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/stats.hpp"
#include "brownian_atlas/whitney.hpp"
#include "oracles.hpp"

using namespace brownian_atlas;
namespace fs = std::filesystem;

namespace {

constexpr int kThreads = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

// ---- 1: engine rows equal the relaxation oracle exactly --------------------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  long entries = 0;
  for (int s = 0; s < 50; ++s) {
    const SnakePath snake = (s % 2 == 0) ? sample_map_snake(48, 101 + s)
                                         : sample_plane_snake(0.5, 48, 101 + s);
    const QuotientMetric qm(snake);
    for (int src = 0; src < qm.size(); ++src) {
      const std::vector<double> oracle = oracles::chain_metric_fixpoint(qm, src);
      const std::vector<double>& row = qm.quotient_sssp(src);
      for (int v = 0; v < qm.size(); ++v) {
        if (row[v] != oracle[v])
          return {false, fmt("mismatch at snake %d source %d target %d (%.17g vs %.17g)", s,
                             src, v, row[v], oracle[v])};
        ++entries;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {secs < 60.0,
          fmt("engine equals relaxation oracle on %ld entries across 50 snakes (%.1fs)",
              entries, secs)};
}

// ---- 2: root rows realize the label deficit --------------------------------------

Outcome criterion2() {
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const SnakePath snake = sample_map_snake(256, 202 + s);
    int arg = 0;
    for (int i = 1; i < snake.size(); ++i)
      if (snake.y(i) < snake.y(arg)) arg = i;
    const double ymin = snake.y(arg);
    const QuotientMetric qm(snake);
    const std::vector<double>& row = qm.quotient_sssp(arg);
    for (int t = 0; t < qm.size(); ++t) {
      const double want = snake.y(t) - ymin;
      const double err = std::abs(row[t] - want) / std::max(1.0, std::abs(want));
      worst = std::max(worst, err);
      if (err > 1e-12)
        return {false, fmt("snake %d index %d: distance %.17g vs label deficit %.17g", s, t,
                           row[t], want)};
    }
  }
  return {true, fmt("min-label rows equal label deficits on 100 snakes (worst rel err %.2g)",
                    worst)};
}

// ---- 3: diameter sandwich ---------------------------------------------------------

Outcome criterion3() {
  long violations = 0;
  for (int s = 0; s < 500; ++s) {
    const SnakePath snake = sample_map_snake(64, 303 + s);
    const QuotientMetric qm(snake);
    const double d = qm.diameter(0);
    double lo = snake.y(0), hi = snake.y(0);
    for (int i = 1; i < snake.size(); ++i) {
      lo = std::min(lo, snake.y(i));
      hi = std::max(hi, snake.y(i));
    }
    const double osc = hi - lo;
    if (!(d >= osc && d <= 2.0 * osc)) ++violations;
  }
  for (int s = 0; s < 500; ++s) {
    const SnakePath snake = sample_plane_snake(1.0, 32, 9303 + s);
    const FastMetric fm(snake);
    const SegmentDiameter seg = segment_diameter(fm, snake.grid, 0.0, 1.0, 0);
    if (!(seg.diameter >= 0.5 * seg.label_osc_bound && seg.diameter <= seg.label_osc_bound))
      ++violations;
  }
  return {violations == 0,
          fmt("label-oscillation sandwich on 1000 instances, %ld violations", violations)};
}

// ---- 4: snake covariance ----------------------------------------------------------

Outcome criterion4() {
  const PathGrid life = sample_excursion(64, 404);
  const int n = life.size();
  const long draws = 10000;
  const ExactSnakeSampler sampler(life, Variant::map);
  const std::vector<int> probes = {16, 32, 48};

  std::vector<double> sum(n, 0.0), cross(static_cast<size_t>(n) * n, 0.0);
  std::vector<std::vector<double>> exact_probe(probes.size());
  for (auto& v : exact_probe) v.reserve(draws);
  for (long r = 0; r < draws; ++r) {
    const SnakePath s = sampler.draw(405, static_cast<std::uint64_t>(r));
    for (int i = 0; i < n; ++i) sum[i] += s.labels[i];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) cross[static_cast<size_t>(i) * n + j] += s.labels[i] * s.labels[j];
    for (size_t p = 0; p < probes.size(); ++p) exact_probe[p].push_back(s.labels[probes[p]]);
  }

  long outside = 0;
  double worst_z = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double target = oracles::naive_range_min(life.values, i, j);
      const double mii = oracles::naive_range_min(life.values, i, i);
      const double mjj = oracles::naive_range_min(life.values, j, j);
      const double cov = cross[static_cast<size_t>(i) * n + j] / draws -
                         (sum[i] / draws) * (sum[j] / draws);
      const double se = std::sqrt((mii * mjj + target * target) / static_cast<double>(draws));
      const double err = std::abs(cov - target);
      if (se == 0.0) {
        if (err != 0.0) ++outside;
        continue;
      }
      worst_z = std::max(worst_z, err / se);
      if (err > 5.0 * se) ++outside;
    }

  std::vector<std::vector<double>> seq_probe(probes.size());
  for (auto& v : seq_probe) v.reserve(draws);
  for (long r = 0; r < draws; ++r) {
    const SnakePath s = sample_snake_sequential(
        life, Variant::map, Rng(406, "acc-seq", static_cast<std::uint64_t>(r)).next_u64());
    for (size_t p = 0; p < probes.size(); ++p) seq_probe[p].push_back(s.labels[probes[p]]);
  }
  double min_p = 1.0;
  for (size_t p = 0; p < probes.size(); ++p)
    min_p = std::min(min_p, ks_two_sample(exact_probe[p], seq_probe[p]).p_value);

  const bool pass = outside == 0 && min_p > 0.01;
  return {pass, fmt("all %d covariance pairs within 5 SE (worst %.2f SE); "
                    "sequential-vs-exact min KS p = %.3f at 3 probes",
                    n * (n + 1) / 2, worst_z, min_p)};
}

// ---- 5: densities -----------------------------------------------------------------

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const double m_exc = endpoint_total_mass(EndpointLaw::excursion, 0.5);
  const double m_bes = endpoint_total_mass(EndpointLaw::bessel3, 0.5);
  if (std::abs(m_exc - 1.0) > 1e-8 || std::abs(m_bes - 1.0) > 1e-8)
    return {false, fmt("density masses %.12f / %.12f stray from 1", m_exc, m_bes)};
  const double zmean = z_expectation();
  if (std::abs(zmean - 1.0) > 1e-8)
    return {false, fmt("change-of-law mean %.12f strays from 1", zmean)};
  for (double p : {1.25, 1.5, 1.75}) {
    const ZlpResult lp = z_lp_norm(p);
    if (lp.divergent) return {false, fmt("L^%.2f unexpectedly divergent", p)};
  }
  for (double p : {2.25, 2.5}) {
    const ZlpResult lp = z_lp_norm(p);
    if (!lp.divergent) return {false, fmt("L^%.2f unexpectedly finite (%.3g)", p, lp.value)};
  }
  const GofReport ge = endpoint_gof(EndpointLaw::excursion, 2048, 10000, 505, kThreads);
  const GofReport gb = endpoint_gof(EndpointLaw::bessel3, 2048, 10000, 506, kThreads);
  const double secs = seconds_since(t0);
  const bool pass = ge.p_value > 0.01 && gb.p_value > 0.01 && secs < 300.0;
  return {pass, fmt("masses and change-of-law exact to 1e-8; L^p window honored; endpoint KS "
                    "p = %.3f (excursion) / %.3f (Bessel) at n=2048, 1e4 replicas (%.0fs)",
                    ge.p_value, gb.p_value, secs)};
}

// ---- 6: quarter-power scaling -----------------------------------------------------

Outcome criterion6() {
  const ScalingReport rep = scaling_experiment(2000, 512, 606, kThreads);
  const std::vector<double> null_p = null_scaling_calibration(6, 500, 128, 607, kThreads);
  int null_ok = 0;
  for (double p : null_p)
    if (p > 0.01) ++null_ok;
  const bool pass = rep.p_value > 0.01 && null_ok >= 5;
  return {pass, fmt("rescaled half-segment vs unit segment KS p = %.3f (2000 replicas, n=512); "
                    "null calibration %d/6 runs above 0.01",
                    rep.p_value, null_ok)};
}

// ---- 7: diameter tail exponent ----------------------------------------------------

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const TailReport rep = tail_experiment(100000, {}, 1024, 707, kThreads);
  const double secs = seconds_since(t0);
  const double c0 = std::exp(rep.intercept);
  const bool pass = rep.exponent >= 1.08 && rep.exponent <= 1.58 && rep.r2 > 0.95;
  return {pass, fmt("tail exponent %.3f (se %.3f) in [1.08, 1.58], R^2 = %.4f over %zu radii; "
                    "rate constant c0 = %.3f reported, not asserted (%.0fs)",
                    rep.exponent, rep.exponent_se, rep.r2, rep.r.size(), c0, secs)};
}

// ---- 8: chunk diameter decay ------------------------------------------------------

Outcome criterion8() {
  const ChunkReport rep = chunk_cover_experiment(16, 10000, 256, 808, 0.25, kThreads);
  const bool pass = rep.r2 > 0.9 && rep.slope < 0.0;
  return {pass, fmt("log-fraction vs a^{4/3} linear with R^2 = %.4f (slope %.3f) at k=16, "
                    "1e4 replicas",
                    rep.r2, rep.slope)};
}

// ---- 9: re-rooting invariance -----------------------------------------------------

Outcome criterion9() {
  const int n = 512;
  double min_ks = 1.0, min_chi = 1.0;
  for (int shift : {n / 4, n / 2, 3 * n / 4}) {
    const RerootReport rep = reroot_test(n, shift, 2000, 909 + shift, kThreads);
    min_ks = std::min(min_ks, rep.ks_p);
    min_chi = std::min(min_chi, rep.chi2_p);
  }
  const bool pass = min_ks > 0.01 && min_chi > 0.01;
  return {pass, fmt("shifts {128, 256, 384} at n=512, 2000 replicas: min KS p = %.3f, "
                    "min marked-point chi-square p = %.3f",
                    min_ks, min_chi)};
}

// ---- 10: distance matrix scans ----------------------------------------------------

Outcome criterion10() {
  long checked = 0;
  std::vector<double> group_a, group_b;
  group_a.reserve(500);
  group_b.reserve(500);
  for (int s = 0; s < 1000; ++s) {
    const SnakePath snake = sample_map_snake(128, 1010 + s);
    const QuotientMetric qm(snake);
    const DistanceMatrix m = sample_distance_matrix(qm, 6, {}, 1010 + s);
    double scale = 0.0;
    for (int i = 0; i < m.k; ++i)
      for (int j = 0; j < m.k; ++j) scale = std::max(scale, m.at(i, j));
    for (int i = 0; i < m.k; ++i) {
      if (m.at(i, i) != 0.0) return {false, fmt("matrix %d has nonzero diagonal", s)};
      for (int j = 0; j < m.k; ++j) {
        if (m.at(i, j) != m.at(j, i)) return {false, fmt("matrix %d asymmetric", s)};
        if (m.at(i, j) < 0.0) return {false, fmt("matrix %d negative entry", s)};
        for (int l = 0; l < m.k; ++l)
          if (m.at(i, j) > m.at(i, l) + m.at(l, j) + 1e-12 * scale)
            return {false, fmt("matrix %d violates the triangle inequality", s)};
      }
    }
    ++checked;
    if (s < 500)
      group_a.push_back(m.at(0, 1));
    else
      group_b.push_back(m.at(1, 2));
  }
  const KsResult ks = ks_two_sample(group_a, group_b);
  const bool pass = checked == 1000 && ks.p_value > 0.01;
  return {pass, fmt("1000 matrices pass symmetry/zero-diagonal/triangle scans; "
                    "exchangeability KS p = %.3f",
                    ks.p_value)};
}

// ---- 11: boundary cubes and shadows -----------------------------------------------

Outcome criterion11() {
  long sandwich_viol = 0;
  const WhitneyDecomposition disk = whitney_decompose(Domain::disk(1.0), 6);
  for (const auto& q : disk.cubes) {
    const double diam = disk.cube_diam(q);
    const double dist = oracles::disk_cube_distance(disk, q, 1.0);
    if (!(diam <= dist && dist <= 4.0 * diam)) ++sandwich_viol;
  }
  const WhitneyDecomposition square = whitney_decompose(Domain::unit_square(), 6);
  for (const auto& q : square.cubes) {
    const double diam = square.cube_diam(q);
    const double dist = oracles::square_cube_distance(square, q);
    if (!(diam <= dist && dist <= 4.0 * diam)) ++sandwich_viol;
  }
  if (sandwich_viol != 0)
    return {false, fmt("%ld cube distance sandwich violations at level 6", sandwich_viol)};

  const ShadowReport rep = radial_shadow(ConformalChart::identity_disk(1.0), disk, 4096);
  long shadow_bad = 0;
  double worst_lo = 1.0, worst_hi = 1.0;
  for (size_t i = 0; i < disk.cubes.size(); ++i) {
    const double exact = oracles::disk_shadow_chord(disk, disk.cubes[i], 1.0);
    if (exact <= 0.0) continue;
    const double ratio = rep.cubes[i].s / exact;
    worst_lo = std::min(worst_lo, ratio);
    worst_hi = std::max(worst_hi, ratio);
    if (ratio < 0.5 || ratio > 2.0) ++shadow_bad;
  }
  std::vector<double> increments, ratios;
  double prev = 0.0;
  for (double ps : rep.partial_sums) {
    increments.push_back(ps - prev);
    prev = ps;
  }
  for (size_t k = 1; k < increments.size(); ++k)
    if (increments[k - 1] > 0.0) ratios.push_back(increments[k] / increments[k - 1]);
  double max_ratio = 0.0;
  for (double r : ratios) max_ratio = std::max(max_ratio, r);
  const std::string verdict = summability_verdict(ratios);
  const bool pass = shadow_bad == 0 && !ratios.empty() && max_ratio < 0.8 &&
                    verdict == "converging";
  return {pass, fmt("zero sandwich violations (disk %zu + square %zu cubes); shadow/arc ratios "
                    "in [%.2f, %.2f]; increment ratios max %.2f, verdict %s",
                    disk.cubes.size(), square.cubes.size(), worst_lo, worst_hi, max_ratio,
                    verdict.c_str())};
}

// ---- 12: CLI reproducibility ------------------------------------------------------

struct CliCase {
  std::string name;
  std::string args;           // without --threads
  bool has_threads = false;   // rerun with --threads 3 as the third run
  std::vector<std::string> outs;
};

Outcome criterion12() {
  const char* cli = std::getenv("BROWNIAN_ATLAS_CLI");
  if (!cli || !*cli)
    return {false, "BROWNIAN_ATLAS_CLI is not set; cannot locate the command-line binary"};
  const fs::path dir = fs::temp_directory_path() / ("ba-acc12-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();

  std::vector<CliCase> cases;
  cases.push_back({"simulate-map", "simulate-map --n 64 --seed 5 --out " + d + "/m.csv", false,
                   {d + "/m.csv", d + "/m.csv.json"}});
  cases.push_back({"simulate-plane",
                   "simulate-plane --n 32 --T 0.5 --seed 5 --format json --out " + d + "/p.json",
                   false,
                   {d + "/p.json"}});
  cases.push_back({"tail", "tail --n 64 --replicas 150 --seed 5 --out " + d + "/t.json", true,
                   {d + "/t.json", d + "/t.csv"}});
  cases.push_back({"scaling", "scaling --n 32 --replicas 120 --seed 5 --out " + d + "/s.json",
                   true,
                   {d + "/s.json"}});
  cases.push_back({"chunk-cover",
                   "chunk-cover --k 4 --n 32 --replicas 100 --seed 5 --out " + d + "/c.json",
                   true,
                   {d + "/c.json"}});
  cases.push_back({"densities",
                   "densities --n 64 --replicas 64 --seed 5 --out " + d + "/de.json", true,
                   {d + "/de.json"}});
  cases.push_back({"reroot", "reroot --n 64 --replicas 100 --seed 5 --out " + d + "/r.json",
                   true,
                   {d + "/r.json"}});
  cases.push_back({"matrix",
                   "matrix --n 48 --k 4 --replicas 2 --seed 5 --out " + d + "/x.jsonl", false,
                   {d + "/x.jsonl"}});
  cases.push_back({"whitney",
                   "whitney --domain disk --chart identity --max-level 4 --theta-grid 256 "
                   "--out " + d + "/w.csv",
                   false,
                   {d + "/w.csv", d + "/w.csv.json", d + "/w.csv.shadow.json",
                    d + "/w.csv.summability.json"}});

  auto slurp = [](const std::string& p) -> std::string {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<missing:" + p + ">";
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  auto run = [&](const std::string& prefix, const std::string& args) {
    const std::string cmd = prefix + "\"" + cli + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  for (const auto& c : cases) {
    std::vector<std::string> variants = {c.args};
    if (c.has_threads) {
      variants = {c.args + " --threads 1", c.args + " --threads 3"};
    }
    std::string env_prefix;
    if (c.name == "matrix") env_prefix = "BROWNIAN_ATLAS_CACHE=" + d + "/cache ";

    std::vector<std::string> baseline;
    bool first = true;
    int round = 0;
    const int reps = c.name == "matrix" ? 3 : 2;  // cold cache, then warm
    for (const auto& v : variants)
      for (int rep = 0; rep < reps; ++rep, ++round) {
        const std::string prefix = (c.name == "matrix" && round > 0) ? env_prefix : "";
        if (run(prefix, v) != 0) {
          fs::remove_all(dir);
          return {false, fmt("%s exited nonzero", c.name.c_str())};
        }
        std::vector<std::string> bytes;
        for (const auto& o : c.outs) bytes.push_back(slurp(o));
        if (first) {
          baseline = bytes;
          first = false;
          continue;
        }
        for (size_t i = 0; i < bytes.size(); ++i)
          if (bytes[i] != baseline[i]) {
            fs::remove_all(dir);
            return {false, fmt("%s artifact %s changed between identical-config runs",
                               c.name.c_str(), c.outs[i].c_str())};
          }
      }
  }

  // a usage error must exit nonzero and write nothing
  const int usage_rc = run("", "tail --replicas 0 --out " + d + "/bad.json");
  const bool usage_ok = usage_rc != 0 && !fs::exists(d + "/bad.json");
  fs::remove_all(dir);
  if (!usage_ok) return {false, "usage error did not exit nonzero without artifacts"};
  return {true, fmt("all 9 subcommands byte-identical across reruns and thread counts "
                    "(matrix also cache-warm vs cold); usage errors exit nonzero")};
}

using CriterionFn = Outcome (*)();

constexpr CriterionFn kCriteria[12] = {criterion1, criterion2, criterion3,  criterion4,
                                       criterion5, criterion6, criterion7,  criterion8,
                                       criterion9, criterion10, criterion11, criterion12};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > 12) {
      std::fprintf(stderr, "usage: acceptance [criterion 1..12]...\n");
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (int k = 1; k <= 12; ++k) which.push_back(k);

  bool all = true;
  for (int k : which) {
    const Outcome o = kCriteria[k - 1]();
    std::printf("criterion %d: %s — %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
