#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "swe/core.hpp"
#include "swe/engine.hpp"
#include "swe/mesh.hpp"

namespace swe {

enum class CaseId { water_drop, three_mounds, lake_at_rest, dam_break_1d };

inline const char* case_name(CaseId id) {
  switch (id) {
    case CaseId::water_drop: return "water_drop";
    case CaseId::three_mounds: return "three_mounds";
    case CaseId::lake_at_rest: return "lake_at_rest";
    case CaseId::dam_break_1d: return "dam_break_1d";
  }
  return "?";
}

inline CaseId case_from_name(const std::string& s) {
  if (s == "water_drop") return CaseId::water_drop;
  if (s == "three_mounds") return CaseId::three_mounds;
  if (s == "lake_at_rest") return CaseId::lake_at_rest;
  if (s == "dam_break_1d") return CaseId::dam_break_1d;
  throw config_error("unknown case '" + s + "'");
}

/// Declarative description of one benchmark scenario. Unused parameters are
/// ignored by cases that do not need them.
struct CaseSpec {
  CaseId id = CaseId::water_drop;
  double lx = 1000.0, ly = 1000.0;  // domain extents [m]
  double eta0 = 1.0;                // base free-surface level [m]
  double amplitude = 0.5;           // water drop amplitude A [m]
  double sigma = 50.0;              // water drop width [m]
  double manning = 0.0;             // uniform Manning coefficient
  double h_left = 1.0, h_right = 0.1;  // dam break depths
  double x_dam = 500.0;             // dam position [m]
  double t_end = 2400.0;            // simulation time T_s [s]
};

/// Scenario defaults. The water drop is a Gaussian bump at rest in a large
/// closed basin; the three-mound dam break floods conical obstacles and
/// exercises wetting/drying; the lake at rest reuses the mound bathymetry
/// as a steady-state check; the 1D dam break runs against the Stoker
/// solution on a strip.
inline CaseSpec make_case(CaseId id) {
  CaseSpec c;
  c.id = id;
  switch (id) {
    case CaseId::water_drop:
      break;  // struct defaults
    case CaseId::three_mounds:
      c.lx = 75.0;
      c.ly = 30.0;
      c.eta0 = 1.875;
      c.x_dam = 16.0;
      c.manning = 0.018;
      c.t_end = 300.0;
      break;
    case CaseId::lake_at_rest:
      c.lx = 75.0;
      c.ly = 30.0;
      c.eta0 = 1.875;
      c.manning = 0.0;
      c.t_end = 10.0;
      break;
    case CaseId::dam_break_1d:
      c.lx = 400.0;
      c.ly = 40.0;
      c.x_dam = 200.0;
      c.h_left = 1.0;
      c.h_right = 0.1;
      c.eta0 = 0.0;
      c.t_end = 40.0;
      break;
  }
  return c;
}

namespace detail {

inline double cone(double x, double y, double cx, double cy, double radius, double height) {
  const double r = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
  return height * std::max(0.0, 1.0 - r / radius);
}

// Standard three-mound bathymetry on a 75 m x 30 m floodplain, scaled to the
// requested domain: two 1 m cones and one 3 m cone downstream of the dam.
inline double three_mound_bed(double x, double y, double lx, double ly) {
  const double sx = lx / 75.0, sy = ly / 30.0;
  double z = cone(x, y, 30.0 * sx, 6.0 * sy, 8.0 * sx, 1.0);
  z = std::max(z, cone(x, y, 30.0 * sx, 24.0 * sy, 8.0 * sx, 1.0));
  z = std::max(z, cone(x, y, 47.5 * sx, 15.0 * sy, 10.0 * sx, 3.0));
  return z;
}

}  // namespace detail

struct CaseFields {
  std::vector<double> bed;
  std::vector<double> manning;
  FieldState state;
};

/// Evaluate the case's bathymetry, Manning field and initial state at the
/// triangle centroids of a raw mesh.
inline CaseFields init_case(const CaseSpec& spec, const RawMesh& raw) {
  if (!raw.nodes.empty()) {
    double xmin = raw.nodes[0].x, xmax = xmin, ymin = raw.nodes[0].y, ymax = ymin;
    for (const Vec2& n : raw.nodes) {
      xmin = std::min(xmin, n.x);
      xmax = std::max(xmax, n.x);
      ymin = std::min(ymin, n.y);
      ymax = std::max(ymax, n.y);
    }
    if (xmin > 1e-9 * spec.lx || ymin > 1e-9 * spec.ly || xmax < spec.lx * (1.0 - 1e-9) ||
        ymax < spec.ly * (1.0 - 1e-9))
      throw case_error(std::string(case_name(spec.id)) + ": mesh extent [" +
                       std::to_string(xmin) + "," + std::to_string(xmax) + "]x[" +
                       std::to_string(ymin) + "," + std::to_string(ymax) +
                       "] does not cover the case domain " + std::to_string(spec.lx) + " x " +
                       std::to_string(spec.ly));
  }
  const std::vector<Vec2> centroids = cell_centroids(raw);
  const int nc = static_cast<int>(centroids.size());

  CaseFields f;
  f.bed.assign(nc, 0.0);
  f.manning.assign(nc, spec.manning);
  f.state.resize(nc);

  switch (spec.id) {
    case CaseId::water_drop: {
      if (!(spec.amplitude >= 0.0) || !(spec.sigma > 0.0))
        throw case_error("water_drop: amplitude must be >= 0 and sigma > 0");
      const double xc = spec.lx / 2.0, yc = spec.ly / 2.0;
      for (int c = 0; c < nc; ++c) {
        const double dx = centroids[c].x - xc, dy = centroids[c].y - yc;
        const double eta =
            spec.eta0 + spec.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * spec.sigma * spec.sigma));
        if (eta < 0.0)
          throw case_error("water_drop: free surface " + std::to_string(eta) +
                           " below the bed at cell " + std::to_string(c));
        f.state.h[c] = eta;
      }
      break;
    }
    case CaseId::three_mounds: {
      if (!(spec.eta0 > 0.0)) throw case_error("three_mounds: dam level eta0 must be > 0");
      for (int c = 0; c < nc; ++c) {
        const double z = detail::three_mound_bed(centroids[c].x, centroids[c].y, spec.lx, spec.ly);
        f.bed[c] = z;
        f.state.h[c] = centroids[c].x < spec.x_dam ? std::max(0.0, spec.eta0 - z) : 0.0;
      }
      break;
    }
    case CaseId::lake_at_rest: {
      for (int c = 0; c < nc; ++c) {
        const double z = detail::three_mound_bed(centroids[c].x, centroids[c].y, spec.lx, spec.ly);
        f.bed[c] = z;
        f.state.h[c] = std::max(0.0, spec.eta0 - z);
      }
      break;
    }
    case CaseId::dam_break_1d: {
      if (!(spec.h_left > spec.h_right) || spec.h_right < 0.0)
        throw case_error("dam_break_1d requires hL > hR >= 0");
      for (int c = 0; c < nc; ++c)
        f.state.h[c] = centroids[c].x < spec.x_dam ? spec.h_left : spec.h_right;
      break;
    }
  }
  return f;
}

/// Convenience: evaluate the case fields and build the mesh in one call.
struct CaseSetup {
  Mesh mesh;
  FieldState state;
};

inline CaseSetup setup_case(const CaseSpec& spec, const RawMesh& raw) {
  CaseFields f = init_case(spec, raw);
  CaseSetup s{build_mesh(raw, std::move(f.bed), std::move(f.manning)), std::move(f.state)};
  return s;
}

/// Closed-form wet-bed dam break solution (Stoker): undisturbed left state,
/// rarefaction fan, constant middle state and a shock moving into the
/// downstream water. The middle depth is the root of the depth function,
/// found by bisection.
struct StokerSample {
  double h = 0.0;
  double u = 0.0;
};

namespace detail {

inline double stoker_depth_function(double h, double hL, double hR, double g) {
  const double fL = 2.0 * (std::sqrt(g * h) - std::sqrt(g * hL));
  const double fR = (h - hR) * std::sqrt(0.5 * g * (h + hR) / (h * hR));
  return fL + fR;
}

}  // namespace detail

/// Middle-state depth of the Stoker problem, bisected to 1e-12 relative.
inline double stoker_middle_depth(double hL, double hR, double g) {
  if (!(hL > hR) || !(hR > 0.0))
    throw case_error("stoker_exact requires hL > hR > 0 (wet bed)");
  double a = hR, b = hL;
  double fa = detail::stoker_depth_function(a, hL, hR, g);
  if (!(fa < 0.0) || !(detail::stoker_depth_function(b, hL, hR, g) > 0.0))
    throw case_error("stoker_exact: depth function does not bracket a root");
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = detail::stoker_depth_function(m, hL, hR, g);
    if (fm < 0.0) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    if (b - a <= 1e-12 * hL) return 0.5 * (a + b);
  }
  throw case_error("stoker_exact: bisection failed to converge");
}

inline StokerSample stoker_exact(double hL, double hR, double x, double t, double x_dam,
                                 double g) {
  if (hL == hR) return {hL, 0.0};
  if (t <= 0.0) return {x < x_dam ? hL : hR, 0.0};

  const double hm = stoker_middle_depth(hL, hR, g);
  const double cL = std::sqrt(g * hL);
  const double cm = std::sqrt(g * hm);
  const double um = 2.0 * (cL - cm);
  const double shock_speed = hm * um / (hm - hR);  // Rankine-Hugoniot mass relation

  const double xi = (x - x_dam) / t;
  if (xi <= -cL) return {hL, 0.0};
  if (xi < um - cm) {
    // inside the fan: u + 2c = 2 cL and u - c = xi
    const double u = 2.0 / 3.0 * (xi + cL);
    const double c = (2.0 * cL - xi) / 3.0;
    return {c * c / g, u};
  }
  if (xi < shock_speed) return {hm, um};
  return {hR, 0.0};
}

}  // namespace swe
