#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace swe {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }

/// Conservative variables of one cell: depth and depth-scaled velocity.
struct ConservedState {
  double h = 0.0;   // water depth [m]
  double qx = 0.0;  // h*u [m^2/s]
  double qy = 0.0;  // h*v [m^2/s]
};

/// Edge flux per unit edge length: (mass, x-momentum, y-momentum).
struct Flux3 {
  double mass = 0.0;
  double momx = 0.0;
  double momy = 0.0;
};

/// Physical and numerical parameters shared by all kernels.
struct PhysParams {
  double g = 9.81;      // gravity [m/s^2]
  double h_dry = 1e-6;  // depths below this are treated as dry [m]
  double cfl = 0.7;     // Courant number, must lie in (0,1)
  double dt_max = 1.0;  // time step used when every cell is dry [s]
  double h_ref = 1.0;   // reference depth for positivity tolerances [m]
};

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structural problem in mesh input or connectivity.
struct mesh_error : error {
  using error::error;
};

/// Invalid or contradictory run configuration.
struct config_error : error {
  using error::error;
};

/// File parse/write failure, message carries the location.
struct io_error : error {
  using error::error;
};

/// NaN/Inf, negative depth or other numerical breakdown at runtime.
struct numeric_error : error {
  using error::error;
};

/// Physically inconsistent case definition.
struct case_error : error {
  using error::error;
};

}  // namespace swe
