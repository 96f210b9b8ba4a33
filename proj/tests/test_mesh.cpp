#include <doctest.h>

#include <random>

#include "swe/mesh.hpp"

using namespace swe;

namespace {

Mesh build_flat(const RawMesh& raw) {
  const int nc = static_cast<int>(raw.triangles.size());
  return build_mesh(raw, std::vector<double>(nc, 0.0), std::vector<double>(nc, 0.0));
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("generator: smallest mesh") {
  const RawMesh raw = generate_square_mesh(1, 1, 1.0, 1.0);
  CHECK(raw.nodes.size() == 4);
  CHECK(raw.triangles.size() == 2);
  const Mesh m = build_flat(raw);
  CHECK(m.n_edges() == 5);
  CHECK(m.n_boundary_edges() == 4);
}

TEST_CASE("generator: 2x2 counts and Euler characteristic") {
  const RawMesh raw = generate_square_mesh(2, 2, 1.0, 1.0);
  CHECK(raw.nodes.size() == 9);
  CHECK(raw.triangles.size() == 8);
  const Mesh m = build_flat(raw);
  CHECK(m.n_edges() == 16);
  CHECK(m.n_nodes() - m.n_edges() + m.n_cells() == 1);
  CHECK(m.n_boundary_edges() == 8);
}

TEST_CASE("generator: the ~1k-cell benchmark rung") {
  const RawMesh raw = generate_square_mesh(23, 23, 75.0, 75.0);
  CHECK(raw.triangles.size() == 1058);
}

TEST_CASE("generator rejects bad dimensions") {
  CHECK_THROWS_AS(generate_square_mesh(0, 1, 1.0, 1.0), mesh_error);
  CHECK_THROWS_AS(generate_square_mesh(1, 1, 0.0, 1.0), mesh_error);
  CHECK_THROWS_AS(generate_square_mesh(1, 1, 1.0, -2.0), mesh_error);
}

TEST_CASE("build: interior edge has one left and one right cell") {
  const Mesh m = build_flat(generate_square_mesh(1, 1, 1.0, 1.0));
  int interior = 0;
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_right[e] == kBoundary) continue;
    ++interior;
    CHECK(m.edge_left[e] != m.edge_right[e]);
    CHECK(m.edge_left[e] >= 0);
    CHECK(m.edge_right[e] >= 0);
  }
  CHECK(interior == 1);
}

TEST_CASE("build: polygon closure and unit normals on assorted meshes") {
  for (const auto& [nx, ny, lx, ly] :
       {std::tuple{1, 1, 1.0, 1.0}, {5, 3, 2.5, 7.0}, {23, 23, 75.0, 75.0}}) {
    const Mesh m = build_flat(generate_square_mesh(nx, ny, lx, ly));
    for (int e = 0; e < m.n_edges(); ++e)
      CHECK(std::fabs(norm(m.edge_normal[e]) - 1.0) <= 1e-12);
    for (int c = 0; c < m.n_cells(); ++c) {
      Vec2 s{0, 0};
      double perimeter = 0.0;
      for (const EdgeUse& eu : m.cell_edges[c]) {
        s = s + (eu.sign * m.edge_length[eu.edge]) * m.edge_normal[eu.edge];
        perimeter += m.edge_length[eu.edge];
      }
      CHECK(norm(s) <= 1e-10 * perimeter);
      CHECK(m.cell_area[c] > 0.0);
    }
  }
}

TEST_CASE("build: interior edges carry opposite incidence signs") {
  const Mesh m = build_flat(generate_square_mesh(4, 5, 2.0, 3.0));
  std::vector<int> sign_sum(m.n_edges(), 0);
  std::vector<int> refs(m.n_edges(), 0);
  for (int c = 0; c < m.n_cells(); ++c)
    for (const EdgeUse& eu : m.cell_edges[c]) {
      sign_sum[eu.edge] += eu.sign;
      ++refs[eu.edge];
    }
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_right[e] == kBoundary) {
      CHECK(refs[e] == 1);
      CHECK(sign_sum[e] == 1);
    } else {
      CHECK(refs[e] == 2);
      CHECK(sign_sum[e] == 0);
    }
  }
}

TEST_CASE("build: outward normal points from left to right cell") {
  const Mesh m = build_flat(generate_square_mesh(3, 3, 1.0, 1.0));
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_right[e] == kBoundary) continue;
    const Vec2 d = m.cell_centroid[m.edge_right[e]] - m.cell_centroid[m.edge_left[e]];
    CHECK(dot(d, m.edge_normal[e]) > 0.0);
  }
}

TEST_CASE("build is idempotent and fixes clockwise input") {
  RawMesh raw = generate_square_mesh(3, 2, 1.0, 1.0);
  std::swap(raw.triangles[2][0], raw.triangles[2][1]);  // make one triangle CW
  const Mesh a = build_flat(raw);
  CHECK(a.cell_area[2] > 0.0);

  RawMesh canonical = raw;
  canonical.triangles = a.cell_nodes;
  const Mesh b = build_flat(canonical);
  CHECK(a.cell_nodes == b.cell_nodes);
  CHECK(a.edge_nodes == b.edge_nodes);
  CHECK(a.edge_left == b.edge_left);
  CHECK(a.edge_right == b.edge_right);
}

TEST_CASE("build: Euler count V - E + F = 1 across generator sizes") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = dim(rng), ny = dim(rng);
    const Mesh m = build_flat(generate_square_mesh(nx, ny, 1.0 + nx, 0.5 + ny));
    CHECK(m.n_nodes() - m.n_edges() + m.n_cells() == 1);
  }
}

TEST_CASE("build rejects structural problems") {
  RawMesh raw = generate_square_mesh(2, 2, 1.0, 1.0);

  SUBCASE("inconsistent array lengths") {
    CHECK_THROWS_AS(build_mesh(raw, std::vector<double>(3, 0.0),
                               std::vector<double>(raw.triangles.size(), 0.0)),
                    mesh_error);
  }
  SUBCASE("negative manning") {
    std::vector<double> z(raw.triangles.size(), 0.0);
    std::vector<double> n(raw.triangles.size(), 0.0);
    n[4] = -0.01;
    CHECK_THROWS_AS(build_mesh(raw, z, n), mesh_error);
  }
  SUBCASE("out-of-range node index") {
    raw.triangles[0][1] = 99;
    CHECK_THROWS_AS(build_flat(raw), mesh_error);
  }
  SUBCASE("degenerate triangle") {
    raw.triangles[0][1] = raw.triangles[0][0];
    CHECK_THROWS_AS(build_flat(raw), mesh_error);
  }
  SUBCASE("non-manifold edge from a duplicated triangle") {
    raw.triangles.push_back(raw.triangles[0]);
    CHECK_THROWS_WITH_AS(build_flat(raw), doctest::Contains("non-manifold"), mesh_error);
  }
}

TEST_CASE("diagnostics: unit square values") {
  const Mesh m = build_flat(generate_square_mesh(1, 1, 1.0, 1.0));
  const DiagnosticsReport r = mesh_diagnostics(m);
  CHECK(r.pass());
  // two right triangles, each half of the unit square
  CHECK(r.min_area == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.max_area == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.boundary_edges == 4);
  CHECK(r.euler_characteristic == 1);
  CHECK(r.max_closure_rel <= 1e-10);
}

TEST_CASE("diagnostics surface structural errors from raw input") {
  RawMesh raw = generate_square_mesh(2, 2, 1.0, 1.0);
  raw.triangles.push_back(raw.triangles[3]);  // duplicate triangle
  const DiagnosticsReport r = mesh_diagnostics(raw);
  CHECK(!r.built);
  CHECK(!r.pass());
  CHECK(r.structural_error.find("non-manifold") != std::string::npos);
}

TEST_CASE("rotated_cell_index pairs cells with mirrored centroids") {
  const int nx = 6, ny = 4;
  const double lx = 3.0, ly = 2.0;
  const Mesh m = build_flat(generate_square_mesh(nx, ny, lx, ly));
  for (int c = 0; c < m.n_cells(); ++c) {
    const int rc = rotated_cell_index(c, nx, ny);
    CHECK(rotated_cell_index(rc, nx, ny) == c);
    CHECK(m.cell_centroid[rc].x == doctest::Approx(lx - m.cell_centroid[c].x).epsilon(1e-12));
    CHECK(m.cell_centroid[rc].y == doctest::Approx(ly - m.cell_centroid[c].y).epsilon(1e-12));
    CHECK(m.cell_area[rc] == doctest::Approx(m.cell_area[c]).epsilon(1e-12));
  }
}

}  // TEST_SUITE
