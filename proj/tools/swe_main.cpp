// Command line front end: run simulations, benchmark backends, run the
// Stoker convergence study, generate and validate meshes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swe/bench.hpp"
#include "swe/cases.hpp"
#include "swe/engine.hpp"
#include "swe/io.hpp"
#include "swe/kernels.hpp"
#include "swe/mesh.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw swe::io_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Accepts either a plain prefix or a pattern with exactly one %d / %0Nd slot.
std::string snapshot_path(const std::string& pattern, int counter) {
  const size_t pos = pattern.find('%');
  if (pos != std::string::npos) {
    size_t end = pos + 1;
    while (end < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[end]))) ++end;
    const bool single_int_slot = end < pattern.size() && pattern[end] == 'd' &&
                                 pattern.find('%', pos + 1) == std::string::npos;
    if (single_int_slot) {
      char buf[1024];
      std::snprintf(buf, sizeof(buf), pattern.c_str(), counter);
      return buf;
    }
    throw swe::config_error("vtk_pattern '" + pattern + "' must contain at most one %d slot");
  }
  return pattern + "." + std::to_string(counter) + ".vtk";
}

struct LoadedCase {
  swe::Mesh mesh;
  swe::FieldState state;
};

LoadedCase load_case(const swe::Config& cfg) {
  swe::RawMesh raw;
  if (std::holds_alternative<std::string>(cfg.mesh_source)) {
    raw = swe::read_mesh_native_file(std::get<std::string>(cfg.mesh_source)).raw;
  } else {
    const swe::GeneratorSpec g = std::get<swe::GeneratorSpec>(cfg.mesh_source);
    raw = swe::generate_square_mesh(g.nx, g.ny, cfg.scenario.lx, cfg.scenario.ly);
  }
  swe::CaseSetup setup = swe::setup_case(cfg.scenario, raw);
  return {std::move(setup.mesh), std::move(setup.state)};
}

int cmd_run(const std::string& config_path, const swe::CliOverrides& overrides) {
  swe::Config cfg = swe::parse_config(read_file(config_path), overrides);
  // every run leaves a reproducible record of its effective configuration
  if (cfg.output.config_echo.empty()) cfg.output.config_echo = "effective_config.json";
  swe::check_output_dirs_writable(cfg.output);

  {
    std::ofstream echo(cfg.output.config_echo);
    if (!echo) throw swe::io_error("cannot open '" + cfg.output.config_echo + "' for writing");
    echo << swe::echo_config(cfg);
  }

  LoadedCase lc = load_case(cfg);
  std::printf("case %s: %d cells, %d edges, backend %s threads %d\n",
              swe::case_name(cfg.scenario.id), lc.mesh.n_cells(), lc.mesh.n_edges(),
              cfg.backend.kind == swe::BackendSpec::Kind::parallel ? "parallel" : "sequential",
              cfg.backend.threads);

  swe::Simulation sim;
  sim.current = std::move(lc.state);
  sim.next.resize(sim.current.size());

  int snapshot_counter = 0;
  swe::RunOptions ro;
  ro.t_end = cfg.scenario.t_end;
  ro.snapshot_interval = cfg.output.snapshot_interval;
  ro.per_step_timing = cfg.output.per_step_timing;
  if (!cfg.output.vtk_pattern.empty())
    ro.on_snapshot = [&](const swe::FieldState& s, double t, long) {
      swe::write_vtk_snapshot(lc.mesh, s, t, snapshot_path(cfg.output.vtk_pattern, snapshot_counter++));
    };

  const swe::RunStats rs = swe::run(sim, lc.mesh, cfg.params, cfg.backend, ro);

  if (!cfg.output.stats_csv.empty())
    swe::write_stats_csv_file(cfg.output.stats_csv, rs.series, rs.mass_initial);

  std::printf("steps %ld, t = %.6f s\n", rs.steps, rs.t_final);
  std::printf("mass drift %.3e relative, %ld clip events (%.3e m^3 restored)\n",
              rs.mass_drift_rel, rs.clip_events, rs.clipped_volume);
  std::printf("dt min %.3e s, mean %.3e s\n", rs.min_dt, rs.mean_dt);
  std::printf("wall: flux %.3f s, update %.3f s, total %.3f s\n", rs.wall_flux_s,
              rs.wall_update_s, rs.wall_total_s);
  return 0;
}

int cmd_meshgen(int nx, int ny, double lx, double ly, const std::string& out_path) {
  const swe::RawMesh raw = swe::generate_square_mesh(nx, ny, lx, ly);
  const std::vector<double> zeros(raw.triangles.size(), 0.0);
  swe::write_mesh_native_file(out_path, raw, zeros, zeros);
  std::printf("wrote %zu nodes, %zu triangles to %s\n", raw.nodes.size(), raw.triangles.size(),
              out_path.c_str());
  return 0;
}

int cmd_validate(const std::string& mesh_path) {
  const swe::NativeMesh nm = swe::read_mesh_native_file(mesh_path);
  const swe::DiagnosticsReport r = swe::mesh_diagnostics(nm.raw);
  if (!r.built) {
    std::printf("INVALID: %s\n", r.structural_error.c_str());
    return 1;
  }
  std::printf("nodes %d, cells %d, edges %d (%d on the boundary)\n", r.nodes, r.cells, r.edges,
              r.boundary_edges);
  std::printf("area min %.6g max %.6g m^2, inradius min %.6g m\n", r.min_area, r.max_area,
              r.min_inradius);
  std::printf("V - E + F = %d (%s), closure residual %.3e (%s)\n", r.euler_characteristic,
              r.euler_ok ? "ok" : "NOT simply connected", r.max_closure_rel,
              r.closure_ok ? "ok" : "FAIL");
  if (!r.pass()) {
    std::printf("INVALID mesh\n");
    return 1;
  }
  std::printf("mesh is valid\n");
  return 0;
}

int cmd_bench(swe::BenchOptions opt, const std::string& out_path) {
  const swe::BenchReport report = swe::run_benchmark(opt);
  swe::write_bench_csv(std::cout, report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw swe::io_error("cannot open '" + out_path + "' for writing");
    swe::write_bench_csv(out, report);
    const std::string summary_path = out_path + ".summary.csv";
    std::ofstream sum(summary_path);
    if (!sum) throw swe::io_error("cannot open '" + summary_path + "' for writing");
    swe::write_bench_summary_csv(sum, report);
    std::printf("wrote %s and %s\n", out_path.c_str(), summary_path.c_str());
  }
  return 0;
}

int cmd_converge(swe::ConvergenceOptions opt, const std::string& out_path) {
  const auto rows = swe::convergence_study(opt);
  swe::write_convergence_csv(std::cout, rows);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw swe::io_error("cannot open '" + out_path + "' for writing");
    swe::write_convergence_csv(out, rows);
  }
  return 0;
}

std::vector<std::pair<int, int>> parse_resolutions(const std::vector<std::string>& specs) {
  std::vector<std::pair<int, int>> out;
  for (const std::string& s : specs) {
    const auto x = s.find('x');
    if (x == std::string::npos)
      throw swe::config_error("resolution '" + s + "' must look like 200x20");
    out.emplace_back(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D shallow water solver on unstructured triangular grids"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "run a simulation from a JSON config");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  swe::CliOverrides overrides;
  int threads_override = 0;
  std::string backend_override;
  double t_end_override = 0.0;
  auto* topt = run_cmd->add_option("--threads", threads_override, "override backend.threads");
  auto* bopt = run_cmd->add_option("--backend", backend_override, "override backend kind (seq|par)");
  auto* eopt = run_cmd->add_option("--t-end", t_end_override, "override case.t_end [s]");

  // meshgen
  auto* mesh_cmd = app.add_subcommand("meshgen", "generate a structured triangulation");
  int nx = 1, ny = 1;
  double lx = 1.0, ly = 1.0;
  std::string mesh_out;
  mesh_cmd->add_option("--nx", nx, "squares in x")->required();
  mesh_cmd->add_option("--ny", ny, "squares in y")->required();
  mesh_cmd->add_option("--lx", lx, "domain length in x [m]")->required();
  mesh_cmd->add_option("--ly", ly, "domain length in y [m]")->required();
  mesh_cmd->add_option("-o,--output", mesh_out, "output SWEMESH path")->required();

  // validate
  auto* val_cmd = app.add_subcommand("validate", "check a SWEMESH file and print diagnostics");
  std::string val_path;
  val_cmd->add_option("--mesh", val_path, "SWEMESH file")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "benchmark backends over a grid ladder");
  swe::BenchOptions bopts;
  std::string bench_out;
  bool rung4 = false, rung5 = false, seq_only = false, par_only = false;
  bench_cmd->add_option("--nx", bopts.nx_list, "grid ladder (nx values, cells = 2*nx^2)");
  bench_cmd->add_option("--threads", bopts.thread_counts, "thread counts for the parallel backend");
  bench_cmd->add_option("--reps", bopts.reps, "repetitions per configuration");
  bench_cmd->add_option("--steps", bopts.fixed_steps, "fixed step count (0 = run to --t-end)");
  bench_cmd->add_option("--t-end", bopts.t_end, "simulation time when --steps 0");
  bench_cmd->add_flag("--rung4", rung4, "add the ~1M cell rung");
  bench_cmd->add_flag("--rung5", rung5, "add the ~10M cell rung (needs several GB)");
  bench_cmd->add_flag("--seq-only", seq_only, "benchmark only the sequential backend");
  bench_cmd->add_flag("--par-only", par_only, "benchmark only the parallel backend");
  bench_cmd->add_option("-o,--output", bench_out, "CSV output path");

  // converge
  auto* conv_cmd = app.add_subcommand("converge", "dam-break convergence vs the Stoker solution");
  swe::ConvergenceOptions copts;
  std::vector<std::string> resolution_specs;
  std::string conv_out;
  conv_cmd->add_option("--hl", copts.scenario.h_left, "upstream depth [m]");
  conv_cmd->add_option("--hr", copts.scenario.h_right, "downstream depth [m]");
  conv_cmd->add_option("--t-eval", copts.t_eval, "evaluation time [s]");
  conv_cmd->add_option("--resolutions", resolution_specs, "grids like 100x10 200x20 400x40");
  conv_cmd->add_option("-o,--output", conv_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      if (*topt) overrides.threads = threads_override;
      if (*bopt) overrides.backend = backend_override;
      if (*eopt) overrides.t_end = t_end_override;
      return cmd_run(config_path, overrides);
    }
    if (*mesh_cmd) return cmd_meshgen(nx, ny, lx, ly, mesh_out);
    if (*val_cmd) return cmd_validate(val_path);
    if (*bench_cmd) {
      if (rung4) bopts.nx_list.push_back(727);
      if (rung5) bopts.nx_list.push_back(2265);
      if (seq_only) bopts.run_parallel = false;
      if (par_only) bopts.run_sequential = false;
      return cmd_bench(bopts, bench_out);
    }
    if (*conv_cmd) {
      if (!resolution_specs.empty()) copts.resolutions = parse_resolutions(resolution_specs);
      return cmd_converge(copts, conv_out);
    }
  } catch (const swe::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 2;
}
