#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "swe/cases.hpp"
#include "swe/core.hpp"
#include "swe/engine.hpp"
#include "swe/io.hpp"
#include "swe/mesh.hpp"

namespace swe {

// ---------------------------------------------------------------------------
// Throughput benchmark (grid ladder x backends x thread counts)
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string grid;
  long cells = 0;
  long edges = 0;
  std::string backend;
  int threads = 1;
  int rep = 0;
  long steps = 0;
  double wall_s = 0.0;            // flux+update phases only
  double cellsteps_per_s = 0.0;
  double speedup = 0.0;           // vs median sequential wall on the same grid
  bool skipped = false;
  std::string note;
};

struct BenchSummary {
  std::string grid;
  std::string backend;
  int threads = 1;
  int reps = 0;
  double speedup_mean = 0.0;
  double speedup_median = 0.0;
  double speedup_min = 0.0;
  double speedup_max = 0.0;
  double speedup_stddev = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
};

struct BenchOptions {
  std::vector<int> nx_list = {23, 71, 229};  // ~1k / ~10k / ~100k triangles
  std::vector<int> thread_counts = {2};      // for the parallel backend
  bool run_sequential = true;
  bool run_parallel = true;
  int reps = 3;
  long fixed_steps = 50;   // > 0: run exactly this many steps (throughput mode)
  double t_end = 0.0;      // T_s of the first rung when fixed_steps == 0; later
                           // rungs scale T_s down with 1/nx to stay desk-sized
  CaseSpec scenario = make_case(CaseId::water_drop);
  PhysParams params;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Time one run: a warmup step (excluded), then either a fixed number of
/// steps or the remaining time to t_end. Returns measured phase seconds.
struct TimedRun {
  long steps = 0;
  double wall_s = 0.0;
};

inline TimedRun timed_run(const Mesh& mesh, const FieldState& initial, const PhysParams& p,
                          const BackendSpec& backend, long fixed_steps, double t_end) {
  const double horizon = std::numeric_limits<double>::max();
  EdgeFluxes fluxes;
  fluxes.resize(mesh.n_edges());
  StepStats timing;

  {
    // warmup on a scratch copy: pages get touched and threads spun up without
    // consuming any of the measured run's simulated time
    Simulation warm;
    warm.current = initial;
    warm.next.resize(initial.size());
    advance_step(warm, mesh, p, backend, horizon, fluxes, &timing);
  }

  Simulation sim;
  sim.current = initial;
  sim.next.resize(initial.size());

  TimedRun out;
  if (fixed_steps > 0) {
    for (long s = 0; s < fixed_steps; ++s) {
      advance_step(sim, mesh, p, backend, horizon, fluxes, &timing);
      out.wall_s += (timing.wall_flux_ms + timing.wall_update_ms) / 1e3;
      ++out.steps;
    }
  } else {
    while (sim.t < t_end) {
      advance_step(sim, mesh, p, backend, t_end, fluxes, &timing);
      out.wall_s += (timing.wall_flux_ms + timing.wall_update_ms) / 1e3;
      ++out.steps;
    }
  }
  return out;
}

}  // namespace detail

inline BenchReport run_benchmark(const BenchOptions& opt) {
  BenchReport report;
  for (const int nx : opt.nx_list) {
    const std::string grid_label = std::to_string(nx) + "x" + std::to_string(nx);

    Mesh mesh;
    FieldState initial;
    try {
      CaseSpec spec = opt.scenario;
      const RawMesh raw = generate_square_mesh(nx, nx, spec.lx, spec.ly);
      CaseSetup setup = setup_case(spec, raw);
      mesh = std::move(setup.mesh);
      initial = std::move(setup.state);
    } catch (const std::bad_alloc&) {
      BenchRow row;
      row.grid = grid_label;
      row.skipped = true;
      row.note = "out of memory, rung skipped";
      report.rows.push_back(row);
      continue;
    }

    struct Variant {
      BackendSpec backend;
      std::string name;
    };
    std::vector<Variant> variants;
    if (opt.run_sequential) variants.push_back({{BackendSpec::Kind::sequential, 1, true}, "sequential"});
    if (opt.run_parallel)
      for (int t : opt.thread_counts)
        variants.push_back({{BackendSpec::Kind::parallel, t, true}, "parallel"});

    const int nx0 = opt.nx_list.front();
    const double rung_t_end = opt.fixed_steps > 0 ? 0.0 : opt.t_end * (double(nx0) / nx);

    std::vector<double> seq_walls;
    std::vector<BenchRow> grid_rows;
    for (const Variant& v : variants) {
      for (int rep = 0; rep < opt.reps; ++rep) {
        const detail::TimedRun tr =
            detail::timed_run(mesh, initial, opt.params, v.backend, opt.fixed_steps, rung_t_end);
        BenchRow row;
        row.grid = grid_label;
        row.cells = mesh.n_cells();
        row.edges = mesh.n_edges();
        row.backend = v.name;
        row.threads = v.backend.threads;
        row.rep = rep;
        row.steps = tr.steps;
        row.wall_s = tr.wall_s;
        row.cellsteps_per_s = tr.wall_s > 0.0 ? mesh.n_cells() * double(tr.steps) / tr.wall_s : 0.0;
        if (v.name == "sequential") seq_walls.push_back(tr.wall_s);
        grid_rows.push_back(row);
      }
    }

    const double seq_baseline = detail::median(seq_walls);
    for (BenchRow& row : grid_rows) {
      if (row.backend == "sequential")
        row.speedup = 1.0;
      else
        row.speedup = row.wall_s > 0.0 && seq_baseline > 0.0 ? seq_baseline / row.wall_s : 0.0;
      report.rows.push_back(row);
    }

    for (const Variant& v : variants) {
      std::vector<double> speedups;
      for (const BenchRow& row : grid_rows)
        if (row.backend == v.name && row.threads == v.backend.threads)
          speedups.push_back(row.speedup);
      if (speedups.empty()) continue;
      BenchSummary s;
      s.grid = grid_label;
      s.backend = v.name;
      s.threads = v.backend.threads;
      s.reps = static_cast<int>(speedups.size());
      s.speedup_mean = std::accumulate(speedups.begin(), speedups.end(), 0.0) / speedups.size();
      s.speedup_median = detail::median(speedups);
      s.speedup_min = *std::min_element(speedups.begin(), speedups.end());
      s.speedup_max = *std::max_element(speedups.begin(), speedups.end());
      double var = 0.0;
      for (double x : speedups) var += (x - s.speedup_mean) * (x - s.speedup_mean);
      s.speedup_stddev = speedups.size() > 1 ? std::sqrt(var / (speedups.size() - 1)) : 0.0;
      report.summary.push_back(s);
    }
  }
  return report;
}

inline void write_bench_csv(std::ostream& out, const BenchReport& r) {
  out << "grid,cells,edges,backend,threads,rep,steps,wall_s,cellsteps_per_s,speedup,note\n";
  for (const BenchRow& row : r.rows)
    out << row.grid << ',' << row.cells << ',' << row.edges << ',' << row.backend << ','
        << row.threads << ',' << row.rep << ',' << row.steps << ',' << format_double(row.wall_s)
        << ',' << format_double(row.cellsteps_per_s) << ',' << format_double(row.speedup) << ','
        << (row.skipped ? "skipped: " + row.note : row.note) << '\n';
}

inline void write_bench_summary_csv(std::ostream& out, const BenchReport& r) {
  out << "grid,backend,threads,reps,speedup_mean,speedup_median,speedup_min,speedup_max,"
         "speedup_stddev\n";
  for (const BenchSummary& s : r.summary)
    out << s.grid << ',' << s.backend << ',' << s.threads << ',' << s.reps << ','
        << format_double(s.speedup_mean) << ',' << format_double(s.speedup_median) << ','
        << format_double(s.speedup_min) << ',' << format_double(s.speedup_max) << ','
        << format_double(s.speedup_stddev) << '\n';
}

// ---------------------------------------------------------------------------
// Convergence study against the Stoker solution
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  std::string grid;
  long cells = 0;
  double l1_error = 0.0;   // integral |h - h_exact| over the domain [m^3]
  double ratio = 0.0;      // error of previous rung / this rung
  double order = 0.0;      // log2(ratio)
  bool monotone = true;
};

struct ConvergenceOptions {
  CaseSpec scenario = make_case(CaseId::dam_break_1d);
  std::vector<std::pair<int, int>> resolutions = {{100, 10}, {200, 20}, {400, 40}};
  double t_eval = 40.0;
  PhysParams params;
  BackendSpec backend;
};

/// L1(h) distance between a cell field and the Stoker solution at time t.
inline double stoker_l1_error(const Mesh& mesh, const FieldState& s, const CaseSpec& spec,
                              double t, double g) {
  double err = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const StokerSample ex = stoker_exact(spec.h_left, spec.h_right, mesh.cell_centroid[c].x, t,
                                         spec.x_dam, g);
    err += std::fabs(s.h[c] - ex.h) * mesh.cell_area[c];
  }
  return err;
}

inline std::vector<ConvergenceRow> convergence_study(const ConvergenceOptions& opt) {
  if (opt.resolutions.size() < 2)
    throw config_error("convergence_study needs at least two resolutions");

  std::vector<ConvergenceRow> rows;
  for (const auto& [nx, ny] : opt.resolutions) {
    CaseSpec spec = opt.scenario;
    spec.t_end = opt.t_eval;
    const RawMesh raw = generate_square_mesh(nx, ny, spec.lx, spec.ly);
    CaseSetup setup = setup_case(spec, raw);

    Simulation sim;
    sim.current = std::move(setup.state);
    sim.next.resize(sim.current.size());

    RunOptions ro;
    ro.t_end = opt.t_eval;
    ro.record_series = false;
    if (opt.t_eval > 0.0) run(sim, setup.mesh, opt.params, opt.backend, ro);

    ConvergenceRow row;
    row.grid = std::to_string(nx) + "x" + std::to_string(ny);
    row.cells = setup.mesh.n_cells();
    row.l1_error = stoker_l1_error(setup.mesh, sim.current, spec, opt.t_eval, opt.params.g);
    if (!rows.empty()) {
      row.ratio = row.l1_error > 0.0 ? rows.back().l1_error / row.l1_error : 0.0;
      row.order = row.ratio > 0.0 ? std::log2(row.ratio) : 0.0;
      row.monotone = row.l1_error < rows.back().l1_error;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "grid,cells,l1_error,ratio,order,monotone\n";
  for (const ConvergenceRow& r : rows)
    out << r.grid << ',' << r.cells << ',' << format_double(r.l1_error) << ','
        << format_double(r.ratio) << ',' << format_double(r.order) << ','
        << (r.monotone ? "yes" : "NON-MONOTONE") << '\n';
}

}  // namespace swe
