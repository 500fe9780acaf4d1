// Command-line front end: simulation, experiments, and decomposition exports.
//
// Every artifact is written atomically and embeds the library version plus
// the exact run configuration (thread count excluded: it changes wall time,
// never bytes). All randomness flows through the counter RNG keyed by
// (seed, module tag, replica), so reruns are byte-identical.

#include <CLI11.hpp>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "brownian_atlas/densities.hpp"
#include "brownian_atlas/io.hpp"
#include "brownian_atlas/mmspace.hpp"
#include "brownian_atlas/plane_experiments.hpp"
#include "brownian_atlas/quotient_metric.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/version.hpp"
#include "brownian_atlas/whitney.hpp"

namespace ba = brownian_atlas;
using ba::io::ordered_json;

namespace {

// "a:b:steps" -> geometric grid from a to b inclusive.
std::vector<double> parse_r_grid(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw CLI::ValidationError("--r-grid", "expected a:b:steps");
  double a = 0.0, b = 0.0;
  long steps = 0;
  try {
    a = std::stod(spec.substr(0, c1));
    b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    steps = std::stol(spec.substr(c2 + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--r-grid", "expected numeric a:b:steps");
  }
  if (!(a > 0.0) || !(b > a) || steps < 2)
    throw CLI::ValidationError("--r-grid", "need 0 < a < b and steps >= 2");
  std::vector<double> grid(steps);
  for (long i = 0; i < steps; ++i)
    grid[i] = a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(steps - 1));
  return grid;
}

void write_snake_json(const std::string& path, const ba::SnakePath& s,
                      const ordered_json& config) {
  ordered_json j = ba::io::version_stamp();
  j["variant"] = s.variant == ba::Variant::map ? "map" : "plane";
  j["n"] = s.variant == ba::Variant::map
               ? static_cast<long>(s.grid.values.size() - 1)
               : static_cast<long>((s.grid.values.size() - 1) / 2);
  j["T"] = ba::io::snake_span(s);
  j["seed"] = s.seed;
  j["dt"] = s.grid.dt;
  j["config"] = config;
  std::vector<double> t(s.grid.values.size());
  for (size_t i = 0; i < t.size(); ++i) t[i] = s.grid.t0 + s.grid.dt * static_cast<double>(i);
  j["t"] = t;
  j["X"] = s.grid.values;
  j["Y"] = s.labels;
  ba::io::write_json(path, j);
}

struct CheckLine {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

int run_density_checks(int gof_n, long gof_replicas, std::uint64_t seed, int threads,
                       const std::string& out, const ordered_json& config) {
  std::vector<CheckLine> checks;
  auto add = [&](const std::string& name, bool pass, double value) {
    checks.push_back({name, pass, value});
    std::printf("%-28s %s  (%.6g)\n", name.c_str(), pass ? "PASS" : "FAIL", value);
  };

  const double m_exc = ba::endpoint_total_mass(ba::EndpointLaw::excursion, 0.5);
  add("mass-excursion-mid", std::abs(m_exc - 1.0) <= 1e-8, m_exc);
  const double m_exc_off = ba::endpoint_total_mass(ba::EndpointLaw::excursion, 0.3);
  add("mass-excursion-off", std::abs(m_exc_off - 1.0) <= 1e-8, m_exc_off);
  const double m_bes = ba::endpoint_total_mass(ba::EndpointLaw::bessel3, 0.5);
  add("mass-bessel-mid", std::abs(m_bes - 1.0) <= 1e-8, m_bes);
  const double m_bes_off = ba::endpoint_total_mass(ba::EndpointLaw::bessel3, 0.8);
  add("mass-bessel-off", std::abs(m_bes_off - 1.0) <= 1e-8, m_bes_off);

  bool ratio_ok = true;
  double worst = 0.0;
  for (double x : {0.1, 0.5, 1.0, 1.5, 2.0}) {
    const double got = ba::rn_derivative(x);
    const double want = std::exp(x * x) / (2.0 * std::sqrt(2.0));
    const double rel = std::abs(got - want) / want;
    worst = std::max(worst, rel);
    if (rel > 1e-10) ratio_ok = false;
  }
  add("density-ratio-closed-form", ratio_ok, worst);

  const double zmean = ba::z_expectation();
  add("ratio-mean-is-one", std::abs(zmean - 1.0) <= 1e-8, zmean);

  for (double p : {1.25, 1.5, 1.75}) {
    const auto lp = ba::z_lp_norm(p);
    add("lp-finite-p" + std::to_string(p).substr(0, 4), !lp.divergent && lp.value >= 1.0,
        lp.value);
  }
  for (double p : {2.25, 2.5}) {
    const auto lp = ba::z_lp_norm(p);
    add("lp-divergent-p" + std::to_string(p).substr(0, 4), lp.divergent, lp.p);
  }

  const int exc_n = gof_n % 2 == 0 ? gof_n : gof_n + 1;
  const auto gof_e = ba::endpoint_gof(ba::EndpointLaw::excursion, exc_n, gof_replicas,
                                      ba::Rng(seed, "cli-gof", 0).next_u64(), threads);
  add("gof-excursion-endpoint", gof_e.p_value > 1e-4, gof_e.p_value);
  const auto gof_b = ba::endpoint_gof(ba::EndpointLaw::bessel3, gof_n, gof_replicas,
                                      ba::Rng(seed, "cli-gof", 1).next_u64(), threads);
  add("gof-bessel-endpoint", gof_b.p_value > 1e-4, gof_b.p_value);

  bool all = true;
  for (const auto& c : checks) all = all && c.pass;
  if (!out.empty()) {
    ordered_json j = ba::io::version_stamp();
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
      ordered_json e;
      e["name"] = c.name;
      e["pass"] = c.pass;
      e["value"] = c.value;
      arr.push_back(e);
    }
    j["checks"] = arr;
    j["all_pass"] = all;
    j["config"] = config;
    ba::io::write_json(out, j);
  }
  std::printf("densities: %s\n", all ? "ALL PASS" : "FAILURES");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"brownian-atlas: random-surface simulation and validation toolkit"};
  app.require_subcommand(1);

  int rc = 0;

  // ---- shared option storage (each subcommand binds the subset it uses) ----
  int n = 256;
  double T = 1.0;
  long replicas = 1000;
  std::uint64_t seed = 1;
  int k = 16;
  std::vector<int> marks;
  std::string r_grid_spec;
  int theta_grid = 1024;
  int max_level = 6;
  std::string out;
  std::string format = "csv";
  int threads = 1;
  std::string check;
  std::string domain_name = "disk";
  std::string chart_name = "none";
  double koebe_c = 0.9;

  // ---- simulate-map ----
  auto* sm = app.add_subcommand("simulate-map", "sample one unit-area map snake to disk");
  sm->add_option("--n", n, "grid cells")->default_val(1024)->check(CLI::PositiveNumber);
  sm->add_option("--seed", seed, "RNG seed")->default_val(1);
  sm->add_option("--out", out, "output path")->required();
  sm->add_option("--format", format, "artifact format")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "json"}));
  sm->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "simulate-map";
    cfg["n"] = n;
    cfg["seed"] = seed;
    cfg["format"] = format;
    const ba::SnakePath s = ba::sample_map_snake(n, seed);
    if (format == "csv")
      ba::io::write_snake(out, s, cfg);
    else
      write_snake_json(out, s, cfg);
    std::printf("wrote %s (map, n=%d, seed=%llu)\n", out.c_str(), n,
                static_cast<unsigned long long>(seed));
  });

  // ---- simulate-plane ----
  auto* sp = app.add_subcommand("simulate-plane", "sample one infinite-volume window snake");
  sp->add_option("--n", n, "grid cells per unit time")->default_val(256)->check(CLI::PositiveNumber);
  sp->add_option("--T", T, "window half-width")->default_val(1.0)->check(CLI::PositiveNumber);
  sp->add_option("--seed", seed, "RNG seed")->default_val(1);
  sp->add_option("--out", out, "output path")->required();
  sp->add_option("--format", format, "artifact format")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "json"}));
  sp->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "simulate-plane";
    cfg["n"] = n;
    cfg["T"] = T;
    cfg["seed"] = seed;
    cfg["format"] = format;
    const ba::SnakePath s = ba::sample_plane_snake(T, n, seed);
    if (format == "csv")
      ba::io::write_snake(out, s, cfg);
    else
      write_snake_json(out, s, cfg);
    std::printf("wrote %s (plane, n=%d, T=%g, seed=%llu)\n", out.c_str(), n, T,
                static_cast<unsigned long long>(seed));
  });

  // ---- tail ----
  auto* tl = app.add_subcommand("tail", "diameter tail exponent experiment");
  tl->add_option("--n", n, "grid cells per instance")->default_val(1024)->check(CLI::PositiveNumber);
  tl->add_option("--replicas", replicas, "independent instances")
      ->default_val(1000)
      ->check(CLI::PositiveNumber);
  tl->add_option("--seed", seed, "RNG seed")->default_val(1);
  tl->add_option("--r-grid", r_grid_spec, "radius grid a:b:steps (default: automatic)");
  tl->add_option("--threads", threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  tl->add_option("--out", out, "output JSON path")->required();
  tl->callback([&]() {
    std::vector<double> grid;
    if (!r_grid_spec.empty()) grid = parse_r_grid(r_grid_spec);
    ordered_json cfg;
    cfg["command"] = "tail";
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    if (!r_grid_spec.empty()) cfg["r_grid"] = r_grid_spec;
    const ba::TailReport rep = ba::tail_experiment(replicas, grid, n, seed, threads);
    ba::io::write_tail_report(out, rep, cfg);
    std::printf("tail: exponent=%.4f se=%.4f r2=%.4f points=%zu%s\n", rep.exponent,
                rep.exponent_se, rep.r2, rep.r.size(), rep.truncated ? " (truncated)" : "");
  });

  // ---- scaling ----
  auto* sc = app.add_subcommand("scaling", "quarter-power segment scaling experiment");
  sc->add_option("--n", n, "grid cells per unit time")->default_val(512)->check(CLI::PositiveNumber);
  sc->add_option("--replicas", replicas, "independent instances per arm")
      ->default_val(2000)
      ->check(CLI::PositiveNumber);
  sc->add_option("--seed", seed, "RNG seed")->default_val(1);
  sc->add_option("--threads", threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  sc->add_option("--out", out, "output JSON path")->required();
  sc->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "scaling";
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    const ba::ScalingReport rep = ba::scaling_experiment(replicas, n, seed, threads);
    ba::io::write_scaling_report(out, rep, cfg);
    std::printf("scaling: ks=%.4f p=%.4f\n", rep.ks_stat, rep.p_value);
  });

  // ---- chunk-cover ----
  auto* cc = app.add_subcommand("chunk-cover", "chunk diameter decay experiment");
  cc->add_option("--k", k, "chunks per window")->default_val(16)->check(CLI::PositiveNumber);
  cc->add_option("--n", n, "grid cells per unit time")->default_val(256)->check(CLI::PositiveNumber);
  cc->add_option("--replicas", replicas, "independent windows")
      ->default_val(1000)
      ->check(CLI::PositiveNumber);
  cc->add_option("--seed", seed, "RNG seed")->default_val(1);
  cc->add_option("--threads", threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  cc->add_option("--out", out, "output JSON path")->required();
  cc->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "chunk-cover";
    cfg["k"] = k;
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    const ba::ChunkReport rep = ba::chunk_cover_experiment(k, replicas, n, seed, 0.25, threads);
    ba::io::write_chunk_report(out, rep, cfg);
    std::printf("chunk-cover: slope=%.4f r2=%.4f\n", rep.slope, rep.r2);
  });

  // ---- densities ----
  auto* de = app.add_subcommand("densities", "endpoint density and change-of-law checks");
  de->add_option("--check", check, "run the full verification suite")
      ->check(CLI::IsMember({"all"}));
  de->add_option("--n", n, "endpoint grid cells for goodness of fit")
      ->default_val(256)
      ->check(CLI::PositiveNumber);
  de->add_option("--replicas", replicas, "goodness-of-fit sample size")
      ->default_val(400)
      ->check(CLI::PositiveNumber);
  de->add_option("--seed", seed, "RNG seed")->default_val(1);
  de->add_option("--threads", threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  de->add_option("--out", out, "optional JSON report path");
  de->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "densities";
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    if (!check.empty()) cfg["check"] = check;
    rc = run_density_checks(n, replicas, seed, threads, out, cfg);
    if (check.empty()) rc = 0;  // informational run: exit reflects IO only
  });

  // ---- reroot ----
  auto* rr = app.add_subcommand("reroot", "re-rooting invariance experiment");
  rr->add_option("--n", n, "grid cells per instance")->default_val(512)->check(CLI::PositiveNumber);
  rr->add_option("--replicas", replicas, "independent instances")
      ->default_val(2000)
      ->check(CLI::PositiveNumber);
  rr->add_option("--seed", seed, "RNG seed")->default_val(1);
  rr->add_option("--threads", threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  rr->add_option("--out", out, "output JSON path")->required();
  rr->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "reroot";
    cfg["n"] = n;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    ordered_json j = ba::io::version_stamp();
    ordered_json arr = ordered_json::array();
    for (int shift : {n / 4, n / 2, 3 * n / 4}) {
      const ba::RerootReport rep = ba::reroot_test(n, shift, replicas, seed, threads);
      ordered_json e;
      e["t_shift"] = rep.t_shift;
      e["ks_stat"] = rep.ks_stat;
      e["ks_p"] = rep.ks_p;
      e["chi2_stat"] = rep.chi2_stat;
      e["chi2_p"] = rep.chi2_p;
      arr.push_back(e);
      std::printf("reroot shift=%d: ks_p=%.4f chi2_p=%.4f\n", rep.t_shift, rep.ks_p, rep.chi2_p);
    }
    j["n"] = n;
    j["replicas"] = replicas;
    j["seed"] = seed;
    j["shifts"] = arr;
    j["config"] = cfg;
    ba::io::write_json(out, j);
  });

  // ---- matrix ----
  auto* mx = app.add_subcommand("matrix", "sample rooted distance matrices from map instances");
  mx->add_option("--n", n, "grid cells per instance")->default_val(256)->check(CLI::PositiveNumber);
  mx->add_option("--k", k, "points per matrix")->default_val(16)->check(CLI::PositiveNumber);
  mx->add_option("--marks", marks, "distinguished grid indices placed first")->delimiter(',');
  mx->add_option("--replicas", replicas, "matrices (one instance each)")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  mx->add_option("--seed", seed, "RNG seed")->default_val(1);
  mx->add_option("--format", format, "single-matrix format")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "json"}));
  mx->add_option("--out", out, "output path")->required();
  mx->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "matrix";
    cfg["n"] = n;
    cfg["k"] = k;
    cfg["marks"] = marks;
    cfg["replicas"] = replicas;
    cfg["seed"] = seed;
    cfg["format"] = format;
    const std::string cache_dir = ba::io::cache_dir_from_env();
    if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);

    auto run_one = [&](std::uint64_t r) {
      const ba::SnakePath s =
          ba::sample_map_snake(n, ba::Rng(seed, "matrix-snake", r).next_u64());
      ba::QuotientMetric qm(s);
      const std::uint64_t mseed = ba::Rng(seed, "matrix-draw", r).next_u64();
      std::vector<int> points;
      if (!cache_dir.empty()) {
        points = ba::sample_matrix_points(s, k, marks, mseed);
        for (int p : points)
          if (auto row = ba::io::load_cached_row(
                  ba::io::row_cache_path(cache_dir, s.hash(), p), qm.size()))
            qm.preload_row(p, std::move(*row));
      }
      ba::DistanceMatrix m = ba::sample_distance_matrix(qm, k, marks, mseed);
      if (!cache_dir.empty())
        for (int p : points) {
          const std::string rp = ba::io::row_cache_path(cache_dir, s.hash(), p);
          if (!std::filesystem::exists(rp)) ba::io::store_cached_row(rp, qm.quotient_sssp(p));
        }
      return m;
    };

    if (replicas == 1) {
      const ba::DistanceMatrix m = run_one(0);
      if (format == "csv")
        ba::io::write_matrix_csv(out, m, cfg);
      else {
        ordered_json j = ba::io::version_stamp();
        j["config"] = cfg;
        j["matrix"] = ba::io::matrix_to_json(m);
        ba::io::write_json(out, j);
      }
    } else {
      ordered_json head = ba::io::version_stamp();
      head["config"] = cfg;
      std::string blob = head.dump() + "\n";
      for (long r = 0; r < replicas; ++r)
        blob += ba::io::matrix_to_json(run_one(static_cast<std::uint64_t>(r))).dump() + "\n";
      ba::io::atomic_write(out, blob);
    }
    std::printf("wrote %s (%ld matrices, k=%d)\n", out.c_str(), replicas, k);
  });

  // ---- whitney ----
  auto* wh = app.add_subcommand("whitney", "dyadic boundary decomposition and chart shadows");
  wh->add_option("--domain", domain_name, "domain for the cube export")
      ->default_val("disk")
      ->check(CLI::IsMember({"disk", "square"}));
  wh->add_option("--chart", chart_name, "chart for shadow/summability export")
      ->default_val("none")
      ->check(CLI::IsMember({"none", "identity", "koebe"}));
  wh->add_option("--koebe-c", koebe_c, "truncation parameter of the distortion chart")
      ->default_val(0.9);
  wh->add_option("--max-level", max_level, "finest dyadic level")
      ->default_val(6)
      ->check(CLI::PositiveNumber);
  wh->add_option("--theta-grid", theta_grid, "angular resolution for shadows")
      ->default_val(1024)
      ->check(CLI::PositiveNumber);
  wh->add_option("--out", out, "output CSV path (sidecars share the stem)")->required();
  wh->callback([&]() {
    ordered_json cfg;
    cfg["command"] = "whitney";
    cfg["domain"] = domain_name;
    cfg["chart"] = chart_name;
    if (chart_name == "koebe") cfg["koebe_c"] = koebe_c;
    cfg["max_level"] = max_level;
    if (chart_name != "none") cfg["theta_grid"] = theta_grid;

    const ba::Domain dom =
        domain_name == "disk" ? ba::Domain::disk(1.0) : ba::Domain::unit_square();
    const ba::WhitneyDecomposition dec = ba::whitney_decompose(dom, max_level);
    ba::io::write_whitney_csv(out, dec);
    ordered_json side = ba::io::version_stamp();
    side["cubes"] = dec.cubes.size();
    side["config"] = cfg;
    ba::io::write_json(out + ".json", side);
    std::printf("whitney: %zu cubes (%s, level %d)\n", dec.cubes.size(), domain_name.c_str(),
                max_level);

    if (chart_name == "identity") {
      const ba::WhitneyDecomposition disk_dec =
          domain_name == "disk" ? dec : ba::whitney_decompose(ba::Domain::disk(1.0), max_level);
      const ba::ShadowReport srep =
          ba::radial_shadow(ba::ConformalChart::identity_disk(1.0), disk_dec, theta_grid);
      ba::io::write_shadow_json(out + ".shadow.json", srep, cfg);
    }
    if (chart_name != "none") {
      const ba::ConformalChart chart = chart_name == "identity"
                                           ? ba::ConformalChart::identity_disk(1.0)
                                           : ba::ConformalChart::truncated_koebe(koebe_c);
      const ba::SummabilityReport rep = ba::summability_report(chart, max_level, theta_grid);
      ba::io::write_summability_json(out + ".summability.json", rep, cfg);
      std::printf("summability(%s): %s\n", rep.chart_name.c_str(), rep.verdict.c_str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // usage problems exit nonzero with a message
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}
