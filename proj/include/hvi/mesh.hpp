#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hvi {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Portion of the boundary an edge belongs to: Dirichlet (Gamma1),
/// prescribed flux (Gamma2), nonsmooth/Robin condition (Gamma3).
enum class BoundaryTag { Gamma1, Gamma2, Gamma3 };

/// "G1", "G2" or "G3".
std::string_view tag_name(BoundaryTag tag);

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Gamma2;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Straight-edged triangulation of a planar domain. Triangles are
/// counter-clockwise; every topological boundary edge appears exactly once in
/// `boundary_edges`. Vertices listed in `interface_vertices` may touch both
/// Gamma1 and Gamma3 edges.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> interface_vertices;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Degree-of-freedom class of a vertex under the Dirichlet-dominant corner
/// rule: any incident Gamma1 edge wins, then Gamma3, then Gamma2.
enum class VertexClass { Interior, Gamma1, Gamma2, Gamma3 };

std::vector<VertexClass> classify_vertices(const Mesh& mesh);

double signed_area(const Mesh& mesh, std::size_t triangle);
double edge_length(const Mesh& mesh, const BoundaryEdge& edge);
double boundary_measure(const Mesh& mesh, BoundaryTag tag);
std::size_t count_edges(const Mesh& mesh, BoundaryTag tag);

/// Structured triangulation of [0,1]^2 with n cells per side. Each cell is
/// split along the diagonal (i,j)-(i+1,j+1). Gamma1 = {x=0}, Gamma3 = {x=1},
/// Gamma2 = {y=0} u {y=1}. Vertex (i,j) has index j*(n+1)+i.
Mesh generate_unit_square_mesh(int n);

/// Lists every violated mesh invariant; empty iff the mesh is valid.
std::vector<std::string> validate_mesh(const Mesh& mesh);

class MeshParseError : public std::runtime_error {
 public:
  MeshParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

class MeshValidationError : public std::runtime_error {
 public:
  explicit MeshValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses the "meshfmt 1" text format. Throws MeshParseError on malformed
/// input and MeshValidationError when the parsed mesh violates an invariant.
Mesh load_mesh(std::string_view text);
std::string save_mesh(const Mesh& mesh);

Mesh load_mesh_file(const std::filesystem::path& path);
void save_mesh_file(const Mesh& mesh, const std::filesystem::path& path);

/// Number of Gamma3 edges; equals n for generate_unit_square_mesh(n).
int gamma3_resolution(const Mesh& mesh);

}  // namespace hvi
