#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <omp.h>

#include "swe/core.hpp"
#include "swe/kernels.hpp"
#include "swe/mesh.hpp"

namespace swe {

/// Which implementation runs the per-edge and per-cell loops. Both produce
/// bitwise-identical results for any thread count: all loops write disjoint
/// locations and the only reductions are exact (min/max) or evaluated over
/// fixed-size blocks combined in block order.
struct BackendSpec {
  enum class Kind { sequential, parallel };
  Kind kind = Kind::sequential;
  int threads = 1;
  bool deterministic = true;

  bool is_parallel() const { return kind == Kind::parallel && threads > 1; }
};

namespace detail {

template <class F>
inline void parallel_for(const BackendSpec& b, int n, F&& f) {
  if (!b.is_parallel()) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
#pragma omp parallel for num_threads(b.threads) schedule(static)
  for (int i = 0; i < n; ++i) f(i);
}

// Block decomposition used for reductions; independent of the thread count
// so that ledger sums are identical across backends.
constexpr int kReduceBlock = 4096;

inline int n_blocks(int n) { return (n + kReduceBlock - 1) / kReduceBlock; }

}  // namespace detail

/// Cell-centered conservative fields, structure-of-arrays.
struct FieldState {
  std::vector<double> h, qx, qy;

  void resize(int n) {
    h.assign(n, 0.0);
    qx.assign(n, 0.0);
    qy.assign(n, 0.0);
  }
  int size() const { return static_cast<int>(h.size()); }

  ConservedState cell(int i) const { return {h[i], qx[i], qy[i]}; }
  void set_cell(int i, const ConservedState& u) {
    h[i] = u.h;
    qx[i] = u.qx;
    qy[i] = u.qy;
  }
};

/// Per-edge applied fluxes. left[e] is the outward flux for the left cell,
/// right[e] the outward flux for the right cell; their mass components are
/// exact negations of one another (single shared Riemann value), the
/// momentum components differ by the bed-source corrections. Boundary edges
/// carry only left[e].
struct EdgeFluxes {
  std::vector<Flux3> left, right;
  void resize(int n) {
    left.assign(n, {});
    right.assign(n, {});
  }
};

struct MassLedger {
  double initial_volume = 0.0;
  double clipped_volume = 0.0;  // total positive volume restored by clipping
  long clip_events = 0;
};

/// Double-buffered simulation state plus clock and conservation ledger.
struct Simulation {
  FieldState current, next;
  double t = 0.0;
  long step = 0;
  MassLedger ledger;
};

struct StepStats {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double max_speed = 0.0;
  double mass = 0.0;
  double wall_flux_ms = 0.0;
  double wall_update_ms = 0.0;
};

struct RunStats {
  long steps = 0;
  double t_final = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double mass_drift_rel = 0.0;
  double min_dt = 0.0;
  double mean_dt = 0.0;
  long clip_events = 0;
  double clipped_volume = 0.0;
  // phase wall times; benchmark throughput is based on these, not on I/O
  double wall_flux_s = 0.0;
  double wall_update_s = 0.0;
  double wall_total_s = 0.0;
  std::vector<StepStats> series;
};

/// Volume integral of the depth, summed in fixed cell order so the result
/// does not depend on the backend or thread count.
inline double total_mass(const FieldState& s, const Mesh& mesh) {
  double m = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) m += s.h[c] * mesh.cell_area[c];
  return m;
}

/// One flux evaluation per edge: hydrostatic reconstruction + HLLC inside,
/// mirror-state wall flux on the boundary. Writes are edge-disjoint, so the
/// loop parallelizes without synchronization and the output is identical
/// for both backends.
inline void compute_fluxes(const FieldState& s, const Mesh& mesh, const PhysParams& p,
                           const BackendSpec& backend, EdgeFluxes& out) {
  std::atomic<int> bad_edge{-1};
  detail::parallel_for(backend, mesh.n_edges(), [&](int e) {
    const int cl = mesh.edge_left[e];
    const Vec2 n = mesh.edge_normal[e];
    const ConservedState ul = s.cell(cl);
    const int cr = mesh.edge_right[e];

    if (ul.h < 0.0 || (cr != kBoundary && s.h[cr] < 0.0)) {
      int expected = -1;
      bad_edge.compare_exchange_strong(expected, e);
      out.left[e] = {};
      out.right[e] = {};
      return;
    }

    if (cr == kBoundary) {
      out.left[e] = wall_flux(ul, n, p);
      out.right[e] = {};
      return;
    }

    const ConservedState ur = s.cell(cr);
    const ReconstructedInterface ri =
        hydrostatic_reconstruct(ul, mesh.cell_bed[cl], ur, mesh.cell_bed[cr], n, p);
    const Flux3 f = hllc_flux(ri.left, ri.right, n, p);
    out.left[e] = {f.mass, f.momx + ri.corr_left.momx, f.momy + ri.corr_left.momy};
    out.right[e] = {-f.mass, -(f.momx + ri.corr_right.momx), -(f.momy + ri.corr_right.momy)};
  });
  if (bad_edge.load() >= 0)
    throw numeric_error("compute_fluxes: negative depth at edge " + std::to_string(bad_edge.load()));
}

namespace detail {

struct DtResult {
  double dt_stable = 0.0;
  double max_speed = 0.0;
};

inline DtResult stable_dt_blocks(const FieldState& s, const Mesh& mesh, const PhysParams& p,
                                 const BackendSpec& backend) {
  const int nb = n_blocks(mesh.n_cells());
  std::vector<double> block_min(nb, std::numeric_limits<double>::infinity());
  std::vector<double> block_max(nb, 0.0);
  std::atomic<int> bad_cell{-1};

  parallel_for(backend, nb, [&](int b) {
    const int begin = b * kReduceBlock;
    const int end = std::min(begin + kReduceBlock, mesh.n_cells());
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int c = begin; c < end; ++c) {
      if (s.h[c] < p.h_dry) continue;
      const double speed = cell_signal_speed(s.cell(c), p);
      if (!std::isfinite(speed)) {
        int expected = -1;
        bad_cell.compare_exchange_strong(expected, c);
        continue;
      }
      lo = std::min(lo, mesh.cell_inradius[c] / speed);
      hi = std::max(hi, speed);
    }
    block_min[b] = lo;
    block_max[b] = hi;
  });
  if (bad_cell.load() >= 0)
    throw numeric_error("stable_dt: non-finite velocity in cell " + std::to_string(bad_cell.load()));

  DtResult r;
  double dt = std::numeric_limits<double>::infinity();
  for (int b = 0; b < nb; ++b) {
    dt = std::min(dt, block_min[b]);
    r.max_speed = std::max(r.max_speed, block_max[b]);
  }
  r.dt_stable = std::isfinite(dt) ? p.cfl * dt : p.dt_max;
  return r;
}

}  // namespace detail

/// Advance one explicit Euler step, truncating dt to land exactly on t_end.
/// Phases: CFL reduction, edge flux loop, cell gather with friction and dry
/// clamping. The gather subtracts the cell's own hydrostatic pressure from
/// the momentum flux sum; the subtraction telescopes to zero analytically
/// and removes the cancellation noise that would otherwise disturb steady
/// states.
inline StepStats advance_step(Simulation& sim, const Mesh& mesh, const PhysParams& p,
                              const BackendSpec& backend, double t_end, EdgeFluxes& fluxes,
                              StepStats* timing = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  const auto t0 = clock::now();
  const detail::DtResult dtr = detail::stable_dt_blocks(sim.current, mesh, p, backend);
  const bool last = sim.t + dtr.dt_stable >= t_end;
  const double dt = last ? t_end - sim.t : dtr.dt_stable;

  const auto t1 = clock::now();
  compute_fluxes(sim.current, mesh, p, backend, fluxes);

  const auto t2 = clock::now();
  const int nb = detail::n_blocks(mesh.n_cells());
  std::vector<double> block_clip(nb, 0.0);
  std::vector<long> block_events(nb, 0);
  std::atomic<int> bad_cell{-1};

  detail::parallel_for(backend, nb, [&](int b) {
    const int begin = b * detail::kReduceBlock;
    const int end = std::min(begin + detail::kReduceBlock, mesh.n_cells());
    double clip = 0.0;
    long events = 0;
    for (int c = begin; c < end; ++c) {
      const double own_pressure = 0.5 * p.g * sim.current.h[c] * sim.current.h[c];
      double acc_mass = 0.0, acc_momx = 0.0, acc_momy = 0.0;
      for (const EdgeUse& eu : mesh.cell_edges[c]) {
        const Flux3& f = eu.sign > 0 ? fluxes.left[eu.edge] : fluxes.right[eu.edge];
        const double l = mesh.edge_length[eu.edge];
        const double ox = eu.sign * mesh.edge_normal[eu.edge].x;
        const double oy = eu.sign * mesh.edge_normal[eu.edge].y;
        acc_mass += f.mass * l;
        acc_momx += (f.momx - own_pressure * ox) * l;
        acc_momy += (f.momy - own_pressure * oy) * l;
      }
      const double scale = dt / mesh.cell_area[c];
      ConservedState u{sim.current.h[c] - scale * acc_mass,
                       sim.current.qx[c] - scale * acc_momx,
                       sim.current.qy[c] - scale * acc_momy};
      u = apply_friction(u, mesh.cell_manning[c], dt, p);

      // mirrors clamp_dry's positivity bound: nothing may throw inside the
      // parallel region, so the failing cell is flagged and reported after
      if (u.h < -1e-14 * p.h_ref || !std::isfinite(u.h) || !std::isfinite(u.qx) ||
          !std::isfinite(u.qy)) {
        int expected = -1;
        bad_cell.compare_exchange_strong(expected, c);
        sim.next.set_cell(c, u);  // keep the offending values for the abort message
        continue;
      }
      double clipped = 0.0;
      u = clamp_dry(u, p, &clipped);
      if (clipped > 0.0) {
        clip += clipped * mesh.cell_area[c];
        ++events;
      }
      sim.next.set_cell(c, u);
    }
    block_clip[b] = clip;
    block_events[b] = events;
  });

  if (bad_cell.load() >= 0) {
    const int c = bad_cell.load();
    throw numeric_error("advance_step: numeric blowup at step " + std::to_string(sim.step) +
                        ", cell " + std::to_string(c) + ", dt " + std::to_string(dt) +
                        " (h=" + std::to_string(sim.next.h[c]) + ")");
  }
  const auto t3 = clock::now();

  for (int b = 0; b < nb; ++b) {
    sim.ledger.clipped_volume += block_clip[b];
    sim.ledger.clip_events += block_events[b];
  }

  std::swap(sim.current, sim.next);
  sim.t = last ? t_end : sim.t + dt;
  ++sim.step;

  StepStats st;
  st.step = sim.step;
  st.t = sim.t;
  st.dt = dt;
  st.max_speed = dtr.max_speed;
  if (timing) {
    timing->wall_flux_ms = ms(t1, t2);
    timing->wall_update_ms = ms(t0, t1) + ms(t2, t3);
  }
  return st;
}

/// Per-run driver options. Snapshots are the only mid-run extraction of the
/// state; everything else stays inside the backend's buffers.
struct RunOptions {
  double t_end = 0.0;
  double snapshot_interval = 0.0;  // 0 disables periodic snapshots
  long max_steps = 100'000'000;
  bool record_series = true;      // keep per-step stats rows
  bool per_step_timing = false;   // fill wall-clock columns of the series
  std::function<void(const FieldState&, double t, long step)> on_snapshot;
};

/// Run the explicit time loop until t = t_end (the last step is truncated to
/// land exactly). Returns aggregate statistics and, when enabled, the
/// per-step series used for the stats CSV.
inline RunStats run(Simulation& sim, const Mesh& mesh, const PhysParams& p,
                    const BackendSpec& backend, const RunOptions& opt) {
  using clock = std::chrono::steady_clock;
  if (!(opt.t_end > 0.0)) throw config_error("run: t_end must be > 0");

  RunStats rs;
  rs.mass_initial = total_mass(sim.current, mesh);
  sim.ledger.initial_volume = rs.mass_initial;

  EdgeFluxes fluxes;
  fluxes.resize(mesh.n_edges());

  if (opt.on_snapshot) opt.on_snapshot(sim.current, sim.t, sim.step);
  double next_snapshot = opt.snapshot_interval > 0.0 ? sim.t + opt.snapshot_interval
                                                     : std::numeric_limits<double>::infinity();

  rs.min_dt = std::numeric_limits<double>::infinity();
  double dt_sum = 0.0;
  const auto run_start = clock::now();

  while (sim.t < opt.t_end) {
    if (sim.step >= opt.max_steps)
      throw numeric_error("run: exceeded max_steps=" + std::to_string(opt.max_steps) +
                          " before reaching t_end (t=" + std::to_string(sim.t) + ")");
    StepStats timing;
    StepStats st = advance_step(sim, mesh, p, backend, opt.t_end, fluxes, &timing);

    rs.wall_flux_s += timing.wall_flux_ms / 1e3;
    rs.wall_update_s += timing.wall_update_ms / 1e3;
    rs.min_dt = std::min(rs.min_dt, st.dt);
    dt_sum += st.dt;

    st.mass = total_mass(sim.current, mesh);
    if (opt.per_step_timing) {
      st.wall_flux_ms = timing.wall_flux_ms;
      st.wall_update_ms = timing.wall_update_ms;
    }
    if (opt.record_series) rs.series.push_back(st);

    if (opt.on_snapshot &&
        (sim.t >= opt.t_end || sim.t >= next_snapshot - 1e-12)) {
      opt.on_snapshot(sim.current, sim.t, sim.step);
      if (opt.snapshot_interval > 0.0)
        while (next_snapshot <= sim.t) next_snapshot += opt.snapshot_interval;
    }
  }

  rs.steps = sim.step;
  rs.t_final = sim.t;
  rs.mass_final = total_mass(sim.current, mesh);
  rs.mass_drift_rel = rs.mass_initial != 0.0
                          ? (rs.mass_final - rs.mass_initial) / rs.mass_initial
                          : rs.mass_final;
  rs.mean_dt = rs.steps > 0 ? dt_sum / rs.steps : 0.0;
  if (!std::isfinite(rs.min_dt)) rs.min_dt = 0.0;
  rs.clip_events = sim.ledger.clip_events;
  rs.clipped_volume = sim.ledger.clipped_volume;
  rs.wall_total_s = std::chrono::duration<double>(clock::now() - run_start).count();
  return rs;
}

}  // namespace swe
