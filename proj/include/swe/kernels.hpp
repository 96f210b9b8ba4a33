#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "swe/core.hpp"

namespace swe {

/// Velocity of an admissible state; cells below the dry threshold move with
/// zero velocity so near-zero depths never amplify round-off momenta.
inline Vec2 velocity(const ConservedState& u, double h_dry) {
  if (u.h < h_dry) return {0.0, 0.0};
  return {u.qx / u.h, u.qy / u.h};
}

/// Exact normal flux F(U).n = G(U)*nx + H(U)*ny of the shallow water system.
inline Flux3 physical_flux_normal(const ConservedState& u, Vec2 n, const PhysParams& p) {
  if (u.h < p.h_dry) return {};
  const Vec2 v = velocity(u, p.h_dry);
  const double un = v.x * n.x + v.y * n.y;
  const double pressure = 0.5 * p.g * u.h * u.h;
  return {u.h * un, u.h * v.x * un + pressure * n.x, u.h * v.y * un + pressure * n.y};
}

/// Outer and contact wave speed estimates for the 1D normal-frame Riemann
/// problem. Two-rarefaction estimates on wet/wet input, analytic dry-front
/// speeds when one side is dry. Guarantees SL <= Sstar <= SR.
struct WaveSpeeds {
  double SL = 0.0;
  double Sstar = 0.0;
  double SR = 0.0;
};

inline WaveSpeeds wave_speed_estimates(double hL, double uL, double hR, double uR,
                                       const PhysParams& p) {
  const double g = p.g;
  const bool dryL = hL < p.h_dry;
  const bool dryR = hR < p.h_dry;

  double SL, SR;
  if (dryR && !dryL) {
    const double cL = std::sqrt(g * hL);
    SL = uL - cL;
    SR = uL + 2.0 * cL;  // dry-front speed
  } else if (dryL && !dryR) {
    const double cR = std::sqrt(g * hR);
    SL = uR - 2.0 * cR;
    SR = uR + cR;
  } else {
    const double cL = std::sqrt(g * hL);
    const double cR = std::sqrt(g * hR);
    const double ustar = 0.5 * (uL + uR) + cL - cR;
    const double cstar = std::fabs(0.5 * (cL + cR) + 0.25 * (uL - uR));
    SL = std::min(uL - cL, ustar - cstar);
    SR = std::max(uR + cR, ustar + cstar);
  }

  const double num = SL * hR * (uR - SR) - SR * hL * (uL - SL);
  const double den = hR * (uR - SR) - hL * (uL - SL);
  const double Sstar = std::fabs(den) < 1e-14 ? 0.5 * (uL + uR) : num / den;
  return {SL, Sstar, SR};
}

/// HLLC approximate Riemann flux across an interface with unit normal n.
/// Both states are rotated into the normal frame; mass and normal momentum
/// use the HLL formula in the subsonic fan while the transverse momentum is
/// transported passively and upwinded by the contact speed.
inline Flux3 hllc_flux(const ConservedState& left, const ConservedState& right, Vec2 n,
                       const PhysParams& p) {
  if (left.h < 0.0 || right.h < 0.0)
    throw numeric_error("hllc_flux: negative depth (hL=" + std::to_string(left.h) +
                        ", hR=" + std::to_string(right.h) + ")");
  const bool dryL = left.h < p.h_dry;
  const bool dryR = right.h < p.h_dry;
  if (dryL && dryR) return {};

  // identical states reduce to the physical flux; keeping this exact makes
  // uniform regions bitwise steady
  if (left.h == right.h && left.qx == right.qx && left.qy == right.qy)
    return physical_flux_normal(left, n, p);

  const Vec2 vL = velocity(left, p.h_dry);
  const Vec2 vR = velocity(right, p.h_dry);
  const double unL = vL.x * n.x + vL.y * n.y, utL = -vL.x * n.y + vL.y * n.x;
  const double unR = vR.x * n.x + vR.y * n.y, utR = -vR.x * n.y + vR.y * n.x;
  const double hL = left.h, hR = right.h;

  const WaveSpeeds s = wave_speed_estimates(hL, unL, hR, unR, p);

  const double FL0 = hL * unL, FL1 = hL * unL * unL + 0.5 * p.g * hL * hL;
  const double FR0 = hR * unR, FR1 = hR * unR * unR + 0.5 * p.g * hR * hR;

  double f0, f1, ft;
  if (s.SL >= 0.0) {
    f0 = FL0;
    f1 = FL1;
    ft = f0 * utL;
  } else if (s.SR <= 0.0) {
    f0 = FR0;
    f1 = FR1;
    ft = f0 * utR;
  } else {
    const double inv = 1.0 / (s.SR - s.SL);
    f0 = (s.SR * FL0 - s.SL * FR0 + s.SL * s.SR * (hR - hL)) * inv;
    f1 = (s.SR * FL1 - s.SL * FR1 + s.SL * s.SR * (hR * unR - hL * unL)) * inv;
    ft = f0 * (s.Sstar >= 0.0 ? utL : utR);
  }
  // rotate back: momentum flux = f1 * n + ft * t with t = (-ny, nx)
  return {f0, f1 * n.x - ft * n.y, f1 * n.y + ft * n.x};
}

/// Interface states and per-side pressure corrections of the hydrostatic
/// (interface-bed) reconstruction. The corrections are the bed-slope source
/// contribution of this edge; adding corr_left to the flux applied to the
/// left cell (and -corr_right to the right cell) keeps a lake at rest
/// exactly steady for any bathymetry.
struct ReconstructedInterface {
  ConservedState left, right;
  Flux3 corr_left, corr_right;
};

inline ReconstructedInterface hydrostatic_reconstruct(const ConservedState& ul, double zl,
                                                      const ConservedState& ur, double zr,
                                                      Vec2 n, const PhysParams& p) {
  ReconstructedInterface r;
  // The higher side keeps its depth bitwise; only the lower side is cut.
  const double hl_star = zl >= zr ? ul.h : std::max(0.0, ul.h + (zl - zr));
  const double hr_star = zr >= zl ? ur.h : std::max(0.0, ur.h + (zr - zl));

  if (hl_star == ul.h) {
    r.left = ul;
  } else {
    const Vec2 v = velocity(ul, p.h_dry);
    r.left = {hl_star, hl_star * v.x, hl_star * v.y};
  }
  if (hr_star == ur.h) {
    r.right = ur;
  } else {
    const Vec2 v = velocity(ur, p.h_dry);
    r.right = {hr_star, hr_star * v.x, hr_star * v.y};
  }

  const double pl = 0.5 * p.g * (ul.h * ul.h - hl_star * hl_star);
  const double pr = 0.5 * p.g * (ur.h * ur.h - hr_star * hr_star);
  r.corr_left = {0.0, pl * n.x, pl * n.y};
  r.corr_right = {0.0, pr * n.x, pr * n.y};
  return r;
}

/// Reflective wall flux: Riemann problem against the mirror state. The mass
/// component is zero by symmetry and is pinned to keep walls watertight.
inline Flux3 wall_flux(const ConservedState& u, Vec2 n, const PhysParams& p) {
  const Vec2 v = velocity(u, p.h_dry);
  const double un = v.x * n.x + v.y * n.y;
  const Vec2 vm{v.x - 2.0 * un * n.x, v.y - 2.0 * un * n.y};
  const ConservedState mirror{u.h, u.h * vm.x, u.h * vm.y};
  Flux3 f = hllc_flux(u, mirror, n, p);
  f.mass = 0.0;
  return f;
}

/// Signal speed |v| + sqrt(g h) entering the CFL bound.
inline double cell_signal_speed(const ConservedState& u, const PhysParams& p) {
  const Vec2 v = velocity(u, p.h_dry);
  return std::sqrt(v.x * v.x + v.y * v.y) + std::sqrt(p.g * u.h);
}

/// CFL time step: cfl * min over wet cells of inradius / signal speed.
/// Returns dt_max when every cell is dry.
inline double stable_dt(std::span<const double> h, std::span<const double> qx,
                        std::span<const double> qy, std::span<const double> inradius,
                        const PhysParams& p) {
  double dt = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < h.size(); ++i) {
    if (h[i] < p.h_dry) continue;
    const double speed = cell_signal_speed({h[i], qx[i], qy[i]}, p);
    if (!std::isfinite(speed))
      throw numeric_error("stable_dt: non-finite velocity in cell " + std::to_string(i));
    dt = std::min(dt, inradius[i] / speed);
  }
  return std::isfinite(dt) ? p.cfl * dt : p.dt_max;
}

/// Semi-implicit Manning friction: divides the momentum by
/// 1 + dt g n^2 |v| / h^(4/3) using the post-update depth and velocity.
/// Never reverses the momentum direction, never increases its magnitude.
inline ConservedState apply_friction(const ConservedState& u, double n_manning, double dt,
                                     const PhysParams& p) {
  if (u.h < p.h_dry || n_manning == 0.0) return u;
  const Vec2 v = velocity(u, p.h_dry);
  const double speed = std::sqrt(v.x * v.x + v.y * v.y);
  if (speed == 0.0) return u;
  const double denom = 1.0 + dt * p.g * n_manning * n_manning * speed / std::pow(u.h, 4.0 / 3.0);
  return {u.h, u.qx / denom, u.qy / denom};
}

/// Wetting/drying guard: cells below the dry threshold lose their momentum
/// but keep their mass; round-off-negative depths are clipped to zero and
/// the clipped amount reported through *clipped_depth. Depths more negative
/// than the round-off tolerance indicate a scheme bug and throw.
inline ConservedState clamp_dry(const ConservedState& u, const PhysParams& p,
                                double* clipped_depth = nullptr) {
  if (u.h < -1e-14 * p.h_ref)
    throw numeric_error("clamp_dry: depth " + std::to_string(u.h) +
                        " below the positivity tolerance");
  if (u.h < 0.0) {
    if (clipped_depth) *clipped_depth += -u.h;
    return {0.0, 0.0, 0.0};
  }
  if (u.h < p.h_dry) return {u.h, 0.0, 0.0};
  return u;
}

}  // namespace swe
