#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "brownian_atlas/densities.hpp"
#include "brownian_atlas/mmspace.hpp"
#include "brownian_atlas/plane_experiments.hpp"
#include "brownian_atlas/quotient_metric.hpp"
#include "brownian_atlas/snake.hpp"
#include "brownian_atlas/version.hpp"
#include "brownian_atlas/whitney.hpp"

namespace brownian_atlas::io {

using ordered_json = nlohmann::ordered_json;

// ---- numeric formatting ---------------------------------------------------------

// Shortest decimal that reloads to the identical double (report CSVs).
inline std::string fmt_shortest(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("fmt_shortest: to_chars failed");
  return std::string(buf, p);
}

// 17 significant digits — also reloads bit-exactly (snake files).
inline std::string fmt_17(double v) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("fmt_17: to_chars failed");
  return std::string(buf, p);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || p != end) throw std::runtime_error("parse_double: bad field '" + s + "'");
  return v;
}

// ---- atomic writes --------------------------------------------------------------

// Writes to a sibling temp file then renames, so partial artifacts never
// appear under the target name.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("atomic_write: short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline void write_json(const std::string& path, const ordered_json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

inline ordered_json version_stamp() {
  ordered_json j;
  j["library"] = std::string(kLibraryName);
  j["version"] = std::string(kLibraryVersion);
  return j;
}

// ---- snake files ----------------------------------------------------------------

struct SnakeFile {
  std::vector<long> index;
  std::vector<double> t, x, y;
};

inline double snake_span(const SnakePath& snake) {
  const auto& g = snake.grid;
  return snake.variant == Variant::map ? g.dt * static_cast<double>(g.values.size() - 1) : -g.t0;
}

// Columnar CSV `i,t,X,Y` plus a JSON sidecar at <path>.json carrying
// {variant, n, T, seed, dt} and the run configuration.
inline void write_snake(const std::string& csv_path, const SnakePath& snake,
                        const ordered_json& config = ordered_json::object()) {
  std::string out = "i,t,X,Y\n";
  const auto& g = snake.grid;
  for (size_t i = 0; i < g.values.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += fmt_17(g.t0 + g.dt * static_cast<double>(i));
    out += ',';
    out += fmt_17(g.values[i]);
    out += ',';
    out += fmt_17(snake.labels[i]);
    out += '\n';
  }
  atomic_write(csv_path, out);

  ordered_json side = version_stamp();
  side["variant"] = snake.variant == Variant::map ? "map" : "plane";
  side["n"] = snake.variant == Variant::map
                  ? static_cast<long>(g.values.size() - 1)
                  : static_cast<long>((g.values.size() - 1) / 2);
  side["T"] = snake_span(snake);
  side["seed"] = snake.seed;
  side["dt"] = g.dt;
  if (!config.empty()) side["config"] = config;
  write_json(csv_path + ".json", side);
}

inline SnakeFile read_snake_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("read_snake_csv: cannot open " + csv_path);
  SnakeFile f;
  std::string line;
  if (!std::getline(in, line) || line != "i,t,X,Y")
    throw std::runtime_error("read_snake_csv: bad header in " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    f.index.push_back(std::stol(field));
    std::getline(ss, field, ',');
    f.t.push_back(parse_double(field));
    std::getline(ss, field, ',');
    f.x.push_back(parse_double(field));
    std::getline(ss, field, ',');
    f.y.push_back(parse_double(field));
  }
  return f;
}

// ---- experiment reports ---------------------------------------------------------

inline void write_tail_report(const std::string& json_path, const TailReport& rep,
                              const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["r"] = rep.r;
  j["neg_log_p"] = rep.neg_log_p;
  j["exponent"] = rep.exponent;
  j["exponent_se"] = rep.exponent_se;
  j["intercept"] = rep.intercept;
  j["r2"] = rep.r2;
  j["replicas"] = rep.replicas;
  j["n"] = rep.n;
  j["seed"] = rep.seed;
  j["truncated"] = rep.truncated;
  if (!rep.warning.empty()) j["warning"] = rep.warning;
  if (!config.empty()) j["config"] = config;
  write_json(json_path, j);
  // CSV mirror for plotting.
  std::string csv = "r,neg_log_p\n";
  for (size_t i = 0; i < rep.r.size(); ++i)
    csv += fmt_shortest(rep.r[i]) + "," + fmt_shortest(rep.neg_log_p[i]) + "\n";
  const std::string csv_path =
      json_path.size() > 5 && json_path.substr(json_path.size() - 5) == ".json"
          ? json_path.substr(0, json_path.size() - 5) + ".csv"
          : json_path + ".csv";
  atomic_write(csv_path, csv);
}

inline void write_scaling_report(const std::string& json_path, const ScalingReport& rep,
                                 const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["replicas"] = rep.replicas;
  j["n"] = rep.n;
  j["seed"] = rep.seed;
  j["ks_stat"] = rep.ks_stat;
  j["p_value"] = rep.p_value;
  if (!config.empty()) j["config"] = config;
  write_json(json_path, j);
}

inline void write_chunk_report(const std::string& json_path, const ChunkReport& rep,
                               const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["k"] = rep.k;
  j["replicas"] = rep.replicas;
  j["cells_per_unit"] = rep.cells_per_unit;
  j["seed"] = rep.seed;
  j["radius_exponent"] = rep.radius_exponent;
  j["a"] = rep.a;
  j["fraction"] = rep.fraction;
  j["slope"] = rep.slope;
  j["r2"] = rep.r2;
  if (!config.empty()) j["config"] = config;
  write_json(json_path, j);
}

inline void write_gof_report(const std::string& json_path, const GofReport& rep,
                             const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["which"] = rep.which;
  j["n"] = rep.n;
  j["replicas"] = rep.replicas;
  j["ks_stat"] = rep.ks_stat;
  j["p_value"] = rep.p_value;
  if (!config.empty()) j["config"] = config;
  write_json(json_path, j);
}

inline void write_reroot_report(const std::string& json_path, const RerootReport& rep,
                                const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["n"] = rep.n;
  j["t_shift"] = rep.t_shift;
  j["replicas"] = rep.replicas;
  j["seed"] = rep.seed;
  j["ks_stat"] = rep.ks_stat;
  j["ks_p"] = rep.ks_p;
  j["chi2_stat"] = rep.chi2_stat;
  j["chi2_p"] = rep.chi2_p;
  if (!config.empty()) j["config"] = config;
  write_json(json_path, j);
}

// ---- distance exports -----------------------------------------------------------

inline void write_distance_csv(const std::string& path, const std::vector<int>& source,
                               const std::vector<int>& target, const std::vector<double>& d) {
  if (source.size() != target.size() || source.size() != d.size())
    throw std::invalid_argument("write_distance_csv: column length mismatch");
  std::string out = "source,target,d\n";
  for (size_t i = 0; i < d.size(); ++i)
    out += std::to_string(source[i]) + "," + std::to_string(target[i]) + "," +
           fmt_shortest(d[i]) + "\n";
  atomic_write(path, out);
}

inline void write_hull_json(const std::string& path, const HullSet& hull,
                            const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["center"] = hull.center;
  j["r"] = hull.radius;
  j["basepoint"] = hull.basepoint;
  j["ball"] = hull.ball;
  j["hull"] = hull.hull;
  if (!config.empty()) j["config"] = config;
  write_json(path, j);
}

// Metadata rows prefixed with '#', then the k-by-k matrix.
inline void write_matrix_csv(const std::string& path, const DistanceMatrix& m,
                             const ordered_json& config = ordered_json::object()) {
  std::string out;
  out += "# k," + std::to_string(m.k) + "\n";
  out += "# marks," + std::to_string(m.marks.size()) + "\n";
  out += "# snake_hash," + std::to_string(m.snake_hash) + "\n";
  out += "# seed," + std::to_string(m.seed) + "\n";
  out += "# library," + std::string(kLibraryName) + " " + std::string(kLibraryVersion) + "\n";
  if (!config.empty()) out += "# config," + config.dump() + "\n";
  for (int i = 0; i < m.k; ++i) {
    for (int j = 0; j < m.k; ++j) {
      if (j) out += ',';
      out += fmt_shortest(m.at(i, j));
    }
    out += '\n';
  }
  atomic_write(path, out);
}

inline ordered_json matrix_to_json(const DistanceMatrix& m) {
  ordered_json j;
  j["k"] = m.k;
  j["marks"] = m.marks;
  j["points"] = m.points;
  j["snake_hash"] = m.snake_hash;
  j["seed"] = m.seed;
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.k; ++i) {
    ordered_json row = ordered_json::array();
    for (int jj = 0; jj < m.k; ++jj) row.push_back(m.at(i, jj));
    rows.push_back(row);
  }
  j["d"] = rows;
  return j;
}

// JSON-lines batch container: one matrix per line.
inline void write_matrix_batch(const std::string& path, const std::vector<DistanceMatrix>& ms) {
  std::string out;
  for (const auto& m : ms) out += matrix_to_json(m).dump() + "\n";
  atomic_write(path, out);
}

// ---- decomposition / shadow exports ----------------------------------------------

inline void write_whitney_csv(const std::string& path, const WhitneyDecomposition& dec) {
  std::string out = "level,ix,iy,L,dist\n";
  for (const auto& q : dec.cubes)
    out += std::to_string(q.level) + "," + std::to_string(q.ix) + "," + std::to_string(q.iy) +
           "," + fmt_shortest(q.side) + "," + fmt_shortest(q.dist) + "\n";
  atomic_write(path, out);
}

inline void write_shadow_json(const std::string& path, const ShadowReport& rep,
                              const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["chart"] = rep.chart_name;
  j["theta_grid"] = rep.theta_grid;
  ordered_json cubes = ordered_json::array();
  for (const auto& sc : rep.cubes) {
    ordered_json c;
    c["id"] = sc.cube_id;
    c["s"] = sc.s;
    c["n_theta"] = sc.n_theta;
    cubes.push_back(c);
  }
  j["cubes"] = cubes;
  j["partial_sums"] = rep.partial_sums;
  std::vector<double> increments, ratios;
  double prev = 0.0;
  for (double ps : rep.partial_sums) {
    increments.push_back(ps - prev);
    prev = ps;
  }
  for (size_t k = 1; k < increments.size(); ++k)
    if (increments[k - 1] > 0.0) ratios.push_back(increments[k] / increments[k - 1]);
  j["verdict"] = summability_verdict(ratios);
  if (!config.empty()) j["config"] = config;
  write_json(path, j);
}

inline void write_summability_json(const std::string& path, const SummabilityReport& rep,
                                   const ordered_json& config = ordered_json::object()) {
  ordered_json j = version_stamp();
  j["chart"] = rep.chart_name;
  j["max_level"] = rep.max_level;
  j["theta_grid"] = rep.theta_grid;
  j["partial_sums"] = rep.partial_sums;
  j["increments"] = rep.increments;
  j["ratios"] = rep.ratios;
  j["verdict"] = rep.verdict;
  if (!config.empty()) j["config"] = config;
  write_json(path, j);
}

// ---- quotient-distance row cache --------------------------------------------------

// Directory from BROWNIAN_ATLAS_CACHE; empty when unset. Rows are binary
// little-endian doubles keyed by (snake hash, source); values round-trip
// exactly, so cached reruns stay byte-identical.
inline std::string cache_dir_from_env() {
  const char* v = std::getenv("BROWNIAN_ATLAS_CACHE");
  return v ? std::string(v) : std::string();
}

inline std::string row_cache_path(const std::string& dir, std::uint64_t snake_hash, int source) {
  return dir + "/row-" + std::to_string(snake_hash) + "-" + std::to_string(source) + ".bin";
}

inline std::optional<std::vector<double>> load_cached_row(const std::string& path,
                                                          size_t expected_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count != expected_size) return std::nullopt;
  std::vector<double> row(count);
  in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) return std::nullopt;
  return row;
}

inline void store_cached_row(const std::string& path, const std::vector<double>& row) {
  std::string blob;
  const std::uint64_t count = row.size();
  blob.resize(sizeof(count) + row.size() * sizeof(double));
  std::memcpy(blob.data(), &count, sizeof(count));
  std::memcpy(blob.data() + sizeof(count), row.data(), row.size() * sizeof(double));
  atomic_write(path, blob);
}

}  // namespace brownian_atlas::io
