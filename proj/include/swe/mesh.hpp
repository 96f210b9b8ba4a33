#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "swe/core.hpp"

namespace swe {

/// Plain triangulation as read from a file or produced by the generator.
struct RawMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
};

/// One (edge, orientation) incidence of a cell. sign = +1 when the cell is
/// the left cell of the edge, -1 when it is the right cell; sign * normal
/// is the outward normal for this cell.
struct EdgeUse {
  int edge = -1;
  int sign = 0;
};

constexpr int kBoundary = -1;

/// Immutable triangular mesh with edge-based connectivity and the geometric
/// quantities used by the finite volume update (cell area, inradius, edge
/// unit normal and length). Normals point from the left cell to the right
/// cell; boundary edges keep the outside on their right.
struct Mesh {
  std::vector<Vec2> nodes;

  // per cell
  std::vector<std::array<int, 3>> cell_nodes;  // CCW
  std::vector<double> cell_area;               // [m^2]
  std::vector<Vec2> cell_centroid;
  std::vector<double> cell_inradius;           // 2*area/perimeter [m]
  std::vector<double> cell_bed;                // bathymetry z_i [m]
  std::vector<double> cell_manning;            // n_i [s m^-1/3]
  std::vector<std::array<EdgeUse, 3>> cell_edges;

  // per edge
  std::vector<std::array<int, 2>> edge_nodes;
  std::vector<int> edge_left;
  std::vector<int> edge_right;      // kBoundary for boundary edges
  std::vector<Vec2> edge_normal;    // unit, left -> right
  std::vector<double> edge_length;  // [m]

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_cells() const { return static_cast<int>(cell_nodes.size()); }
  int n_edges() const { return static_cast<int>(edge_nodes.size()); }

  int n_boundary_edges() const {
    int n = 0;
    for (int r : edge_right) n += (r == kBoundary);
    return n;
  }
};

/// Structured triangulation of an Lx x Ly rectangle: (nx+1)*(ny+1) nodes,
/// 2*nx*ny triangles. Every grid square is split along the same diagonal
/// (lower-left to upper-right), which makes the triangulation invariant
/// under a 180-degree rotation about the domain center.
inline RawMesh generate_square_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw mesh_error("generate_square_mesh: nx and ny must be >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw mesh_error("generate_square_mesh: Lx and Ly must be > 0");

  RawMesh raw;
  const double dx = lx / nx;
  const double dy = ly / ny;
  raw.nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      raw.nodes.push_back({i == nx ? lx : i * dx, j == ny ? ly : j * dy});

  auto node = [nx](int i, int j) { return j * (nx + 1) + i; };
  raw.triangles.reserve(static_cast<size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      raw.triangles.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1)});
      raw.triangles.push_back({node(i, j), node(i + 1, j + 1), node(i, j + 1)});
    }
  return raw;
}

/// Cell index the 180-degree rotation maps cell c to, for meshes produced
/// by generate_square_mesh(nx, ny, ...). Lower and upper triangles of
/// mirrored squares swap roles.
inline int rotated_cell_index(int c, int nx, int ny) {
  const int square = c / 2;
  const int upper = c % 2;
  const int i = square % nx;
  const int j = square / nx;
  return 2 * ((ny - 1 - j) * nx + (nx - 1 - i)) + (1 - upper);
}

inline std::vector<Vec2> cell_centroids(const RawMesh& raw) {
  std::vector<Vec2> c(raw.triangles.size());
  for (size_t t = 0; t < raw.triangles.size(); ++t) {
    const auto& tri = raw.triangles[t];
    const Vec2 p0 = raw.nodes[tri[0]], p1 = raw.nodes[tri[1]], p2 = raw.nodes[tri[2]];
    c[t] = {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
  }
  return c;
}

namespace detail {

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

}  // namespace detail

/// Build the edge-based mesh: canonical CCW orientation, deduplicated edges
/// with left->right normals, per-cell geometry and incidence signs.
/// bathymetry and manning are per-cell arrays sized to the triangle count.
inline Mesh build_mesh(const RawMesh& raw, std::vector<double> bathymetry,
                       std::vector<double> manning) {
  const int nn = static_cast<int>(raw.nodes.size());
  const int nc = static_cast<int>(raw.triangles.size());
  if (static_cast<int>(bathymetry.size()) != nc || static_cast<int>(manning.size()) != nc)
    throw mesh_error("build_mesh: bathymetry/manning arrays must have one entry per triangle (got " +
                     std::to_string(bathymetry.size()) + "/" + std::to_string(manning.size()) +
                     " for " + std::to_string(nc) + " triangles)");
  for (int c = 0; c < nc; ++c)
    if (manning[c] < 0.0)
      throw mesh_error("build_mesh: negative Manning coefficient at cell " + std::to_string(c));

  Mesh m;
  m.nodes = raw.nodes;
  m.cell_nodes.resize(nc);
  m.cell_area.resize(nc);
  m.cell_centroid.resize(nc);
  m.cell_inradius.resize(nc);
  m.cell_bed = std::move(bathymetry);
  m.cell_manning = std::move(manning);
  m.cell_edges.assign(nc, {});

  for (int c = 0; c < nc; ++c) {
    auto tri = raw.triangles[c];
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= nn)
        throw mesh_error("build_mesh: node index " + std::to_string(tri[k]) +
                         " out of range in triangle " + std::to_string(c));
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw mesh_error("build_mesh: degenerate triangle " + std::to_string(c) +
                       " repeats a node index");

    // canonical CCW reordering
    double area = detail::signed_area(raw.nodes[tri[0]], raw.nodes[tri[1]], raw.nodes[tri[2]]);
    if (area < 0.0) {
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    if (!(area > 0.0))
      throw mesh_error("build_mesh: triangle " + std::to_string(c) + " has zero area");

    const Vec2 p0 = raw.nodes[tri[0]], p1 = raw.nodes[tri[1]], p2 = raw.nodes[tri[2]];
    const double perimeter = norm(p1 - p0) + norm(p2 - p1) + norm(p0 - p2);
    m.cell_nodes[c] = tri;
    m.cell_area[c] = area;
    m.cell_centroid[c] = {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
    m.cell_inradius[c] = 2.0 * area / perimeter;
  }

  // Deduplicate edges by sorted node pair. Sorting the incidence list gives a
  // reproducible edge numbering independent of container details.
  struct Incidence {
    std::uint64_t key;
    int cell;
    int local;  // directed edge (nodes[local], nodes[(local+1)%3]) in CCW order
  };
  std::vector<Incidence> inc;
  inc.reserve(static_cast<size_t>(3) * nc);
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < 3; ++k) {
      const int a = m.cell_nodes[c][k];
      const int b = m.cell_nodes[c][(k + 1) % 3];
      const std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
      const std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
      inc.push_back({lo * static_cast<std::uint64_t>(nn) + hi, c, k});
    }
  std::sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
    return x.key != y.key ? x.key < y.key : x.cell < y.cell;
  });

  auto directed = [&m](const Incidence& e) {
    return std::array<int, 2>{m.cell_nodes[e.cell][e.local], m.cell_nodes[e.cell][(e.local + 1) % 3]};
  };

  for (size_t i = 0; i < inc.size();) {
    size_t j = i;
    while (j < inc.size() && inc[j].key == inc[i].key) ++j;
    const auto ab = directed(inc[i]);
    if (j - i > 2)
      throw mesh_error("build_mesh: non-manifold edge (" + std::to_string(ab[0]) + "," +
                       std::to_string(ab[1]) + ") shared by " + std::to_string(j - i) +
                       " triangles");

    const int e = m.n_edges();
    const Vec2 d = m.nodes[ab[1]] - m.nodes[ab[0]];
    const double len = norm(d);
    m.edge_nodes.push_back(ab);
    m.edge_normal.push_back({d.y / len, -d.x / len});  // outward from the CCW left cell
    m.edge_length.push_back(len);
    m.edge_left.push_back(inc[i].cell);
    m.edge_right.push_back(kBoundary);
    m.cell_edges[inc[i].cell][inc[i].local] = {e, +1};

    if (j - i == 2) {
      const auto ba = directed(inc[i + 1]);
      if (ba[0] != ab[1] || ba[1] != ab[0])
        throw mesh_error("build_mesh: non-manifold edge (" + std::to_string(ab[0]) + "," +
                         std::to_string(ab[1]) + ") traversed twice in the same direction; " +
                         "triangles " + std::to_string(inc[i].cell) + " and " +
                         std::to_string(inc[i + 1].cell) + " overlap or are inconsistently oriented");
      m.edge_right[e] = inc[i + 1].cell;
      m.cell_edges[inc[i + 1].cell][inc[i + 1].local] = {e, -1};
    }
    i = j;
  }

  // closed-polygon check: the outward-signed edge vectors of every cell sum to zero
  for (int c = 0; c < nc; ++c) {
    Vec2 s{0.0, 0.0};
    double perimeter = 0.0;
    for (const EdgeUse& eu : m.cell_edges[c]) {
      s = s + (eu.sign * m.edge_length[eu.edge]) * m.edge_normal[eu.edge];
      perimeter += m.edge_length[eu.edge];
    }
    if (norm(s) > 1e-10 * perimeter)
      throw mesh_error("build_mesh: cell " + std::to_string(c) +
                       " fails the closed-polygon identity (residual " + std::to_string(norm(s)) + ")");
  }
  return m;
}

/// Read-only health report; pass() mirrors the build invariants.
struct DiagnosticsReport {
  bool built = false;
  std::string structural_error;

  int nodes = 0, cells = 0, edges = 0, boundary_edges = 0;
  double min_area = 0.0, max_area = 0.0;
  double min_inradius = 0.0;
  int euler_characteristic = 0;  // V - E + F, 1 for a simply-connected surface with boundary
  bool euler_ok = false;
  double max_closure_rel = 0.0;  // max over cells of |sum sign*n*l| / perimeter
  bool closure_ok = false;

  bool pass() const { return built && euler_ok && closure_ok && min_area > 0.0; }
};

inline DiagnosticsReport mesh_diagnostics(const Mesh& m) {
  DiagnosticsReport r;
  r.built = true;
  r.nodes = m.n_nodes();
  r.cells = m.n_cells();
  r.edges = m.n_edges();
  r.boundary_edges = m.n_boundary_edges();
  r.euler_characteristic = r.nodes - r.edges + r.cells;
  r.euler_ok = (r.euler_characteristic == 1);

  r.min_area = r.max_area = m.cell_area.empty() ? 0.0 : m.cell_area[0];
  r.min_inradius = m.cell_inradius.empty() ? 0.0 : m.cell_inradius[0];
  for (int c = 0; c < m.n_cells(); ++c) {
    r.min_area = std::min(r.min_area, m.cell_area[c]);
    r.max_area = std::max(r.max_area, m.cell_area[c]);
    r.min_inradius = std::min(r.min_inradius, m.cell_inradius[c]);
    Vec2 s{0.0, 0.0};
    double perimeter = 0.0;
    for (const EdgeUse& eu : m.cell_edges[c]) {
      s = s + (eu.sign * m.edge_length[eu.edge]) * m.edge_normal[eu.edge];
      perimeter += m.edge_length[eu.edge];
    }
    r.max_closure_rel = std::max(r.max_closure_rel, norm(s) / perimeter);
  }
  r.closure_ok = (r.max_closure_rel <= 1e-10);
  return r;
}

/// Diagnose a raw triangulation: attempts the build and captures structural
/// errors in the report instead of throwing.
inline DiagnosticsReport mesh_diagnostics(const RawMesh& raw) {
  try {
    const int nc = static_cast<int>(raw.triangles.size());
    Mesh m = build_mesh(raw, std::vector<double>(nc, 0.0), std::vector<double>(nc, 0.0));
    return mesh_diagnostics(m);
  } catch (const mesh_error& e) {
    DiagnosticsReport r;
    r.built = false;
    r.structural_error = e.what();
    r.nodes = static_cast<int>(raw.nodes.size());
    r.cells = static_cast<int>(raw.triangles.size());
    return r;
  }
}

}  // namespace swe
