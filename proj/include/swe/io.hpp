#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "swe/cases.hpp"
#include "swe/core.hpp"
#include "swe/engine.hpp"
#include "swe/mesh.hpp"

namespace swe {

/// Shortest-exact float formatting: 17 significant digits round-trip any
/// double, so canonical files compare bitwise.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// SWEMESH native format
//
//   SWEMESH 1
//   <nnodes> <ncells>
//   x y                    (nnodes lines)
//   i j k z_b n_manning    (ncells lines, 0-based node indices)
// ---------------------------------------------------------------------------

struct NativeMesh {
  RawMesh raw;
  std::vector<double> bed;
  std::vector<double> manning;
};

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next_line() {
    ++line_;
    return static_cast<bool>(std::getline(in_, buf_));
  }
  int line() const { return line_; }
  const std::string& text() const { return buf_; }

 private:
  std::istream& in_;
  std::string buf_;
  int line_ = 0;
};

template <class T>
T parse_token(std::istringstream& ss, int line, int column, const char* what) {
  T v{};
  if (!(ss >> v))
    throw io_error("line " + std::to_string(line) + ", token " + std::to_string(column) +
                   ": expected " + std::string(what));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v))
      throw io_error("line " + std::to_string(line) + ", token " + std::to_string(column) +
                     ": non-finite number");
  }
  return v;
}

}  // namespace detail

inline NativeMesh read_mesh_native(std::istream& in) {
  detail::LineReader r(in);
  if (!r.next_line()) throw io_error("line 1: empty stream, expected 'SWEMESH 1'");
  {
    std::istringstream ss(r.text());
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "SWEMESH" || version != 1)
      throw io_error("line 1: bad magic, expected 'SWEMESH 1', got '" + r.text() + "'");
  }
  if (!r.next_line()) throw io_error("line 2: expected '<nnodes> <ncells>'");
  int nnodes = 0, ncells = 0;
  {
    std::istringstream ss(r.text());
    nnodes = detail::parse_token<int>(ss, r.line(), 1, "node count");
    ncells = detail::parse_token<int>(ss, r.line(), 2, "cell count");
  }
  if (nnodes < 0 || ncells < 0)
    throw io_error("line 2: negative counts");

  NativeMesh m;
  m.raw.nodes.reserve(nnodes);
  for (int i = 0; i < nnodes; ++i) {
    if (!r.next_line())
      throw io_error("line " + std::to_string(r.line()) + ": file ends after " +
                     std::to_string(i) + " of " + std::to_string(nnodes) + " node lines");
    std::istringstream ss(r.text());
    const double x = detail::parse_token<double>(ss, r.line(), 1, "x coordinate");
    const double y = detail::parse_token<double>(ss, r.line(), 2, "y coordinate");
    m.raw.nodes.push_back({x, y});
  }
  m.raw.triangles.reserve(ncells);
  m.bed.reserve(ncells);
  m.manning.reserve(ncells);
  for (int c = 0; c < ncells; ++c) {
    if (!r.next_line())
      throw io_error("line " + std::to_string(r.line()) + ": file ends after " +
                     std::to_string(c) + " of " + std::to_string(ncells) + " cell lines");
    std::istringstream ss(r.text());
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      tri[k] = detail::parse_token<int>(ss, r.line(), k + 1, "node index");
      if (tri[k] < 0 || tri[k] >= nnodes)
        throw io_error("line " + std::to_string(r.line()) + ", token " + std::to_string(k + 1) +
                       ": node index " + std::to_string(tri[k]) + " out of range [0," +
                       std::to_string(nnodes) + ")");
    }
    m.raw.triangles.push_back(tri);
    m.bed.push_back(detail::parse_token<double>(ss, r.line(), 4, "bathymetry"));
    m.manning.push_back(detail::parse_token<double>(ss, r.line(), 5, "manning coefficient"));
  }
  return m;
}

inline void write_mesh_native(std::ostream& out, const RawMesh& raw,
                              const std::vector<double>& bed,
                              const std::vector<double>& manning) {
  out << "SWEMESH 1\n";
  out << raw.nodes.size() << ' ' << raw.triangles.size() << '\n';
  for (const Vec2& n : raw.nodes)
    out << format_double(n.x) << ' ' << format_double(n.y) << '\n';
  for (size_t c = 0; c < raw.triangles.size(); ++c) {
    const auto& t = raw.triangles[c];
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << format_double(bed[c]) << ' '
        << format_double(manning[c]) << '\n';
  }
}

inline NativeMesh read_mesh_native_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open mesh file '" + path + "'");
  try {
    return read_mesh_native(in);
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

inline void write_mesh_native_file(const std::string& path, const RawMesh& raw,
                                   const std::vector<double>& bed,
                                   const std::vector<double>& manning) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_mesh_native(out, raw, bed, manning);
  if (!out) throw io_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// VTK legacy snapshots (ASCII, UNSTRUCTURED_GRID, cell type 5)
// ---------------------------------------------------------------------------

inline void write_vtk_snapshot(const Mesh& mesh, const FieldState& s, double t,
                               const std::string& path) {
  if (s.size() != mesh.n_cells())
    throw io_error("write_vtk_snapshot: state has " + std::to_string(s.size()) +
                   " cells, mesh has " + std::to_string(mesh.n_cells()));
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "swe snapshot t=" << format_double(t) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Vec2& n : mesh.nodes)
    out << format_double(n.x) << ' ' << format_double(n.y) << " 0\n";
  out << "CELLS " << mesh.n_cells() << ' ' << 4 * mesh.n_cells() << '\n';
  for (const auto& tri : mesh.cell_nodes)
    out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  out << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) out << "5\n";

  out << "CELL_DATA " << mesh.n_cells() << '\n';
  const auto scalars = [&](const char* name, auto&& value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) out << format_double(value(c)) << '\n';
  };
  scalars("h", [&](int c) { return s.h[c]; });
  scalars("eta", [&](int c) { return s.h[c] + mesh.cell_bed[c]; });
  scalars("z", [&](int c) { return mesh.cell_bed[c]; });
  out << "VECTORS velocity double\n";
  PhysParams pv;  // dry threshold only guards the division here
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2 v = velocity(s.cell(c), pv.h_dry);
    out << format_double(v.x) << ' ' << format_double(v.y) << " 0\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Stats CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kStatsHeader =
    "step,t,dt,mass,mass_drift,max_speed,wall_ms_flux,wall_ms_update";

inline void write_stats_csv(std::ostream& out, const std::vector<StepStats>& series,
                            double mass_initial) {
  out << kStatsHeader << '\n';
  for (const StepStats& s : series) {
    const double drift = mass_initial != 0.0 ? (s.mass - mass_initial) / mass_initial : s.mass;
    out << s.step << ',' << format_double(s.t) << ',' << format_double(s.dt) << ','
        << format_double(s.mass) << ',' << format_double(drift) << ','
        << format_double(s.max_speed) << ',' << format_double(s.wall_flux_ms) << ','
        << format_double(s.wall_update_ms) << '\n';
  }
}

inline void write_stats_csv_file(const std::string& path, const std::vector<StepStats>& series,
                                 double mass_initial) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_stats_csv(out, series, mass_initial);
  if (!out) throw io_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Run configuration (JSON with CLI overrides)
// ---------------------------------------------------------------------------

struct GeneratorSpec {
  int nx = 0;
  int ny = 0;
};

struct OutputSpec {
  double snapshot_interval = 0.0;  // seconds; 0 disables periodic snapshots
  std::string vtk_pattern;         // printf-style %d pattern or plain prefix
  std::string stats_csv;
  std::string config_echo;
  bool per_step_timing = false;
};

struct Config {
  std::variant<std::string, GeneratorSpec> mesh_source = GeneratorSpec{};
  CaseSpec scenario;
  PhysParams params;
  BackendSpec backend;
  OutputSpec output;
};

struct CliOverrides {
  std::optional<int> threads;
  std::optional<std::string> backend;
  std::optional<double> t_end;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw config_error("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void get_to_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace detail

inline void validate_config(const Config& c);

inline Config parse_config_checked(const nlohmann::json& j, const CliOverrides& cli);

inline Config parse_config(const std::string& json_text, const CliOverrides& cli = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config_checked(j, cli);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

inline Config parse_config_checked(const nlohmann::json& j, const CliOverrides& cli) {
  detail::reject_unknown_keys(j, {"case", "mesh", "params", "backend", "output"}, "config root");

  Config c;
  if (j.contains("case")) {
    const auto& jc = j.at("case");
    detail::reject_unknown_keys(jc,
                                {"id", "lx", "ly", "eta0", "amplitude", "sigma", "manning",
                                 "h_left", "h_right", "x_dam", "t_end"},
                                "case");
    if (!jc.contains("id")) throw config_error("case.id is required");
    c.scenario = make_case(case_from_name(jc.at("id").get<std::string>()));
    detail::get_to_if(jc, "lx", c.scenario.lx);
    detail::get_to_if(jc, "ly", c.scenario.ly);
    detail::get_to_if(jc, "eta0", c.scenario.eta0);
    detail::get_to_if(jc, "amplitude", c.scenario.amplitude);
    detail::get_to_if(jc, "sigma", c.scenario.sigma);
    detail::get_to_if(jc, "manning", c.scenario.manning);
    detail::get_to_if(jc, "h_left", c.scenario.h_left);
    detail::get_to_if(jc, "h_right", c.scenario.h_right);
    detail::get_to_if(jc, "x_dam", c.scenario.x_dam);
    detail::get_to_if(jc, "t_end", c.scenario.t_end);
  } else {
    throw config_error("config requires a 'case' section");
  }

  if (!j.contains("mesh")) throw config_error("config requires a 'mesh' section");
  {
    const auto& jm = j.at("mesh");
    detail::reject_unknown_keys(jm, {"file", "generate"}, "mesh");
    const bool has_file = jm.contains("file");
    const bool has_gen = jm.contains("generate");
    if (has_file == has_gen)
      throw config_error("mesh must name exactly one source: 'file' or 'generate'");
    if (has_file) {
      c.mesh_source = jm.at("file").get<std::string>();
    } else {
      const auto& jg = jm.at("generate");
      detail::reject_unknown_keys(jg, {"nx", "ny"}, "mesh.generate");
      GeneratorSpec g;
      if (!jg.contains("nx") || !jg.contains("ny"))
        throw config_error("mesh.generate requires nx and ny");
      jg.at("nx").get_to(g.nx);
      jg.at("ny").get_to(g.ny);
      if (g.nx < 1 || g.ny < 1) throw config_error("mesh.generate: nx and ny must be >= 1");
      c.mesh_source = g;
    }
  }

  if (j.contains("params")) {
    const auto& jp = j.at("params");
    detail::reject_unknown_keys(jp, {"g", "cfl", "h_dry", "dt_max", "h_ref"}, "params");
    detail::get_to_if(jp, "g", c.params.g);
    detail::get_to_if(jp, "cfl", c.params.cfl);
    detail::get_to_if(jp, "h_dry", c.params.h_dry);
    detail::get_to_if(jp, "dt_max", c.params.dt_max);
    detail::get_to_if(jp, "h_ref", c.params.h_ref);
  }

  if (j.contains("backend")) {
    const auto& jb = j.at("backend");
    detail::reject_unknown_keys(jb, {"kind", "threads", "deterministic"}, "backend");
    std::string kind = "sequential";
    detail::get_to_if(jb, "kind", kind);
    if (kind == "sequential" || kind == "seq")
      c.backend.kind = BackendSpec::Kind::sequential;
    else if (kind == "parallel" || kind == "par")
      c.backend.kind = BackendSpec::Kind::parallel;
    else
      throw config_error("backend.kind must be 'sequential' or 'parallel', got '" + kind + "'");
    detail::get_to_if(jb, "threads", c.backend.threads);
    detail::get_to_if(jb, "deterministic", c.backend.deterministic);
  }

  if (j.contains("output")) {
    const auto& jo = j.at("output");
    detail::reject_unknown_keys(
        jo, {"snapshot_interval", "vtk_pattern", "stats_csv", "config_echo", "per_step_timing"},
        "output");
    detail::get_to_if(jo, "snapshot_interval", c.output.snapshot_interval);
    detail::get_to_if(jo, "vtk_pattern", c.output.vtk_pattern);
    detail::get_to_if(jo, "stats_csv", c.output.stats_csv);
    detail::get_to_if(jo, "config_echo", c.output.config_echo);
    detail::get_to_if(jo, "per_step_timing", c.output.per_step_timing);
  }

  if (cli.threads) c.backend.threads = *cli.threads;
  if (cli.backend) {
    if (*cli.backend == "seq" || *cli.backend == "sequential")
      c.backend.kind = BackendSpec::Kind::sequential;
    else if (*cli.backend == "par" || *cli.backend == "parallel")
      c.backend.kind = BackendSpec::Kind::parallel;
    else
      throw config_error("--backend must be seq or par, got '" + *cli.backend + "'");
  }
  if (cli.t_end) c.scenario.t_end = *cli.t_end;

  validate_config(c);
  return c;
}

inline void validate_config(const Config& c) {
  const PhysParams& p = c.params;
  if (!(p.g > 0.0)) throw config_error("params.g must be > 0");
  if (!(p.cfl > 0.0 && p.cfl < 1.0))
    throw config_error("params.cfl must lie in (0,1), got " + format_double(p.cfl));
  if (!(p.h_dry > 0.0)) throw config_error("params.h_dry must be > 0");
  if (!(p.dt_max > 0.0)) throw config_error("params.dt_max must be > 0");
  if (c.backend.threads < 1) throw config_error("backend.threads must be >= 1");
  if (c.output.snapshot_interval < 0.0)
    throw config_error("output.snapshot_interval must be >= 0 (0 disables snapshots)");
  if (!(c.scenario.t_end > 0.0)) throw config_error("case.t_end must be > 0");
  if (c.output.snapshot_interval > 0.0 && c.output.vtk_pattern.empty())
    throw config_error("output.snapshot_interval set but output.vtk_pattern is empty");
}

/// Serialize the fully-resolved configuration. Re-running from this echo
/// reproduces the same trajectory and stats CSV.
inline std::string echo_config(const Config& c) {
  nlohmann::json j;
  j["case"] = {{"id", case_name(c.scenario.id)},
               {"lx", c.scenario.lx},
               {"ly", c.scenario.ly},
               {"eta0", c.scenario.eta0},
               {"amplitude", c.scenario.amplitude},
               {"sigma", c.scenario.sigma},
               {"manning", c.scenario.manning},
               {"h_left", c.scenario.h_left},
               {"h_right", c.scenario.h_right},
               {"x_dam", c.scenario.x_dam},
               {"t_end", c.scenario.t_end}};
  if (std::holds_alternative<std::string>(c.mesh_source)) {
    j["mesh"] = {{"file", std::get<std::string>(c.mesh_source)}};
  } else {
    const GeneratorSpec& g = std::get<GeneratorSpec>(c.mesh_source);
    j["mesh"] = {{"generate", {{"nx", g.nx}, {"ny", g.ny}}}};
  }
  j["params"] = {{"g", c.params.g},
                 {"cfl", c.params.cfl},
                 {"h_dry", c.params.h_dry},
                 {"dt_max", c.params.dt_max},
                 {"h_ref", c.params.h_ref}};
  j["backend"] = {{"kind", c.backend.kind == BackendSpec::Kind::parallel ? "parallel" : "sequential"},
                  {"threads", c.backend.threads},
                  {"deterministic", c.backend.deterministic}};
  j["output"] = {{"snapshot_interval", c.output.snapshot_interval},
                 {"vtk_pattern", c.output.vtk_pattern},
                 {"stats_csv", c.output.stats_csv},
                 {"config_echo", c.output.config_echo},
                 {"per_step_timing", c.output.per_step_timing}};
  return j.dump(2) + "\n";
}

/// Startup check that every referenced output directory is writable.
inline void check_output_dirs_writable(const OutputSpec& o) {
  const auto check = [](const std::string& path) {
    if (path.empty()) return;
    namespace fs = std::filesystem;
    fs::path dir = fs::path(path).parent_path();
    if (dir.empty()) dir = ".";
    if (!fs::exists(dir))
      throw config_error("output directory '" + dir.string() + "' does not exist");
    const fs::path probe = dir / ".swe_write_probe";
    std::ofstream f(probe);
    if (!f) throw config_error("output directory '" + dir.string() + "' is not writable");
    f.close();
    fs::remove(probe);
  };
  check(o.vtk_pattern);
  check(o.stats_csv);
  check(o.config_echo);
}

}  // namespace swe
