#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hvi/mesh.hpp"

using namespace hvi;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& text) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const std::string& s) { return s.find(text) != std::string::npos; });
}

}  // namespace

TEST(UnitSquare, Counts) {
  for (int n : {1, 2, 3, 8}) {
    const Mesh m = generate_unit_square_mesh(n);
    EXPECT_EQ(m.num_vertices(), static_cast<std::size_t>((n + 1) * (n + 1)));
    EXPECT_EQ(m.num_triangles(), static_cast<std::size_t>(2 * n * n));
    EXPECT_EQ(count_edges(m, BoundaryTag::Gamma1), static_cast<std::size_t>(n));
    EXPECT_EQ(count_edges(m, BoundaryTag::Gamma2), static_cast<std::size_t>(2 * n));
    EXPECT_EQ(count_edges(m, BoundaryTag::Gamma3), static_cast<std::size_t>(n));
    EXPECT_EQ(gamma3_resolution(m), n);
    EXPECT_NEAR(boundary_measure(m, BoundaryTag::Gamma1), 1.0, 1e-14);
    EXPECT_NEAR(boundary_measure(m, BoundaryTag::Gamma2), 2.0, 1e-14);
    EXPECT_NEAR(boundary_measure(m, BoundaryTag::Gamma3), 1.0, 1e-14);
    EXPECT_TRUE(validate_mesh(m).empty());
  }
}

TEST(UnitSquare, OrientationAndArea) {
  const Mesh m = generate_unit_square_mesh(5);
  double total = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    EXPECT_GT(signed_area(m, t), 0.0);
    total += signed_area(m, t);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(UnitSquare, VertexNumbering) {
  const int n = 4;
  const Mesh m = generate_unit_square_mesh(n);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const Point2 p = m.vertices[static_cast<std::size_t>(j * (n + 1) + i)];
      EXPECT_DOUBLE_EQ(p.x, static_cast<double>(i) / n);
      EXPECT_DOUBLE_EQ(p.y, static_cast<double>(j) / n);
    }
  }
}

TEST(UnitSquare, RejectsEmptyResolution) {
  EXPECT_THROW(generate_unit_square_mesh(0), std::invalid_argument);
  EXPECT_THROW(generate_unit_square_mesh(-3), std::invalid_argument);
}

TEST(Classify, DirichletDominantCorners) {
  const int n = 2;
  const Mesh m = generate_unit_square_mesh(n);
  const auto cls = classify_vertices(m);
  auto at = [&](int i, int j) { return cls[static_cast<std::size_t>(j * (n + 1) + i)]; };
  EXPECT_EQ(at(0, 0), VertexClass::Gamma1);
  EXPECT_EQ(at(0, 2), VertexClass::Gamma1);
  EXPECT_EQ(at(2, 0), VertexClass::Gamma3);
  EXPECT_EQ(at(2, 2), VertexClass::Gamma3);
  EXPECT_EQ(at(1, 0), VertexClass::Gamma2);
  EXPECT_EQ(at(1, 2), VertexClass::Gamma2);
  EXPECT_EQ(at(1, 1), VertexClass::Interior);
}

TEST(Validate, FlippedTriangleNamed) {
  Mesh m = generate_unit_square_mesh(1);
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  const auto issues = validate_mesh(m);
  EXPECT_TRUE(mentions(issues, "triangle 0: non-positive signed area"));
}

TEST(Validate, MissingGamma3) {
  Mesh m = generate_unit_square_mesh(2);
  for (auto& e : m.boundary_edges) {
    if (e.tag == BoundaryTag::Gamma3) e.tag = BoundaryTag::Gamma2;
  }
  EXPECT_TRUE(mentions(validate_mesh(m), "G3 empty"));
}

TEST(Validate, Gamma1Gamma3ContactNeedsInterface) {
  // One triangle: edge (0,1) on G1, edge (1,2) on G3 share vertex 1.
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{{0, 1}, BoundaryTag::Gamma1}, {{1, 2}, BoundaryTag::Gamma3}, {{2, 0}, BoundaryTag::Gamma2}};
  EXPECT_FALSE(validate_mesh(m).empty());
  m.interface_vertices = {1};
  EXPECT_TRUE(validate_mesh(m).empty());
}

TEST(Validate, UntaggedBoundaryEdge) {
  Mesh m = generate_unit_square_mesh(2);
  m.boundary_edges.pop_back();
  EXPECT_TRUE(mentions(validate_mesh(m), "carries no tag"));
}

TEST(MeshFormat, RoundTrip) {
  const Mesh m = generate_unit_square_mesh(3);
  const std::string text = save_mesh(m);
  EXPECT_EQ(load_mesh(text), m);
  EXPECT_EQ(save_mesh(load_mesh(text)), text);
}

TEST(MeshFormat, CommentsAndInterface) {
  const std::string text =
      "meshfmt 1  # header\n"
      "vertices 3\n0 0\n1 0\n0 1\n"
      "triangles 1\n0 1 2\n"
      "# tags\n"
      "boundary 3\n0 1 G1\n1 2 G3\n2 0 G2\n"
      "interface 1\n1\n";
  const Mesh m = load_mesh(text);
  EXPECT_EQ(m.interface_vertices, std::vector<int>{1});
}

TEST(MeshFormat, MissingBoundarySection) {
  const std::string text = "meshfmt 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\n";
  try {
    load_mesh(text);
    FAIL() << "expected MeshParseError";
  } catch (const MeshParseError& e) {
    EXPECT_NE(std::string(e.what()).find("boundary tags required"), std::string::npos);
  }
}

TEST(MeshFormat, IndexOutOfRangeReportsLine) {
  const std::string text =
      "meshfmt 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 7\nboundary 3\n0 1 G1\n1 2 G3\n2 0 G2\n";
  try {
    load_mesh(text);
    FAIL() << "expected MeshParseError";
  } catch (const MeshParseError& e) {
    EXPECT_EQ(e.line(), 7);
    EXPECT_NE(std::string(e.what()).find("mesh line 7"), std::string::npos);
  }
}

TEST(MeshFormat, InvalidMeshRejected) {
  const std::string text =
      "meshfmt 1\nvertices 3\n0 0\n0 1\n1 0\ntriangles 1\n0 1 2\nboundary 3\n0 1 G1\n1 2 G3\n2 0 G2\n";
  EXPECT_THROW(load_mesh(text), MeshValidationError);
}

TEST(MeshFormat, UnknownTag) {
  const std::string text =
      "meshfmt 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 3\n0 1 G1\n1 2 G4\n2 0 G2\n";
  EXPECT_THROW(load_mesh(text), MeshParseError);
}
