#include "hvi/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

namespace hvi {

std::string_view tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Gamma1: return "G1";
    case BoundaryTag::Gamma2: return "G2";
    case BoundaryTag::Gamma3: return "G3";
  }
  return "G?";
}

std::vector<VertexClass> classify_vertices(const Mesh& mesh) {
  std::vector<VertexClass> cls(mesh.num_vertices(), VertexClass::Interior);
  auto rank = [](VertexClass c) {
    switch (c) {
      case VertexClass::Interior: return 0;
      case VertexClass::Gamma2: return 1;
      case VertexClass::Gamma3: return 2;
      case VertexClass::Gamma1: return 3;
    }
    return 0;
  };
  for (const auto& e : mesh.boundary_edges) {
    VertexClass c = VertexClass::Gamma2;
    if (e.tag == BoundaryTag::Gamma1) c = VertexClass::Gamma1;
    if (e.tag == BoundaryTag::Gamma3) c = VertexClass::Gamma3;
    for (int v : e.v) {
      if (v < 0 || static_cast<std::size_t>(v) >= cls.size()) continue;
      if (rank(c) > rank(cls[v])) cls[v] = c;
    }
  }
  return cls;
}

double signed_area(const Mesh& mesh, std::size_t triangle) {
  const auto& t = mesh.triangles[triangle];
  const Point2& a = mesh.vertices[t[0]];
  const Point2& b = mesh.vertices[t[1]];
  const Point2& c = mesh.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double edge_length(const Mesh& mesh, const BoundaryEdge& edge) {
  const Point2& a = mesh.vertices[edge.v[0]];
  const Point2& b = mesh.vertices[edge.v[1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

double boundary_measure(const Mesh& mesh, BoundaryTag tag) {
  double total = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == tag) total += edge_length(mesh, e);
  }
  return total;
}

std::size_t count_edges(const Mesh& mesh, BoundaryTag tag) {
  return static_cast<std::size_t>(std::count_if(
      mesh.boundary_edges.begin(), mesh.boundary_edges.end(),
      [tag](const BoundaryEdge& e) { return e.tag == tag; }));
}

int gamma3_resolution(const Mesh& mesh) {
  return static_cast<int>(count_edges(mesh, BoundaryTag::Gamma3));
}

Mesh generate_unit_square_mesh(int n) {
  if (n < 1) {
    throw std::invalid_argument("generate_unit_square_mesh: n must be >= 1");
  }
  Mesh mesh;
  const int stride = n + 1;
  auto id = [stride](int i, int j) { return j * stride + i; };
  mesh.vertices.reserve(static_cast<std::size_t>(stride) * stride);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  // Boundary edges are listed counter-clockwise around the square.
  for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::Gamma2});
  for (int j = 0; j < n; ++j) mesh.boundary_edges.push_back({{id(n, j), id(n, j + 1)}, BoundaryTag::Gamma3});
  for (int i = n; i > 0; --i) mesh.boundary_edges.push_back({{id(i, n), id(i - 1, n)}, BoundaryTag::Gamma2});
  for (int j = n; j > 0; --j) mesh.boundary_edges.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::Gamma1});
  return mesh;
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey make_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::string edge_str(const EdgeKey& k) {
  return "(" + std::to_string(k.first) + "," + std::to_string(k.second) + ")";
}

}  // namespace

std::vector<std::string> validate_mesh(const Mesh& mesh) {
  std::vector<std::string> issues;
  const int nv = static_cast<int>(mesh.num_vertices());
  auto in_range = [nv](int v) { return v >= 0 && v < nv; };

  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto& p = mesh.vertices[v];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      issues.push_back("vertex " + std::to_string(v) + ": non-finite coordinate");
    }
  }

  bool indices_ok = true;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (!in_range(v)) {
        issues.push_back("triangle " + std::to_string(t) + ": vertex index " + std::to_string(v) +
                         " out of range");
        indices_ok = false;
      }
    }
  }
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    for (int v : mesh.boundary_edges[e].v) {
      if (!in_range(v)) {
        issues.push_back("boundary edge " + std::to_string(e) + ": vertex index " +
                         std::to_string(v) + " out of range");
        indices_ok = false;
      }
    }
  }
  for (int v : mesh.interface_vertices) {
    if (!in_range(v)) {
      issues.push_back("interface vertex " + std::to_string(v) + " out of range");
      indices_ok = false;
    }
  }
  if (!indices_ok) return issues;

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double area = signed_area(mesh, t);
    if (!(area > 0.0)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", area);
      issues.push_back("triangle " + std::to_string(t) + ": non-positive signed area " + buf);
    }
  }

  std::map<EdgeKey, int> uses;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++uses[make_key(t[k], t[(k + 1) % 3])];
  }
  std::set<EdgeKey> topological;
  for (const auto& [key, count] : uses) {
    if (count == 1) topological.insert(key);
    if (count > 2) {
      issues.push_back("edge " + edge_str(key) + " shared by " + std::to_string(count) +
                       " triangles");
    }
  }

  std::map<EdgeKey, std::size_t> tagged;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto key = make_key(mesh.boundary_edges[e].v[0], mesh.boundary_edges[e].v[1]);
    if (auto [it, inserted] = tagged.emplace(key, e); !inserted) {
      issues.push_back("boundary edge " + std::to_string(e) + " " + edge_str(key) +
                       " duplicates boundary edge " + std::to_string(it->second));
      continue;
    }
    if (!topological.contains(key)) {
      issues.push_back("boundary edge " + std::to_string(e) + " " + edge_str(key) +
                       " is not on the topological boundary");
    }
  }
  for (const auto& key : topological) {
    if (!tagged.contains(key)) {
      issues.push_back("topological boundary edge " + edge_str(key) + " carries no tag");
    }
  }

  for (auto tag : {BoundaryTag::Gamma1, BoundaryTag::Gamma2, BoundaryTag::Gamma3}) {
    if (count_edges(mesh, tag) == 0) {
      issues.push_back(std::string(tag_name(tag)) + " empty");
    }
  }

  std::vector<unsigned> touches(mesh.num_vertices(), 0u);
  for (const auto& e : mesh.boundary_edges) {
    const unsigned bit = e.tag == BoundaryTag::Gamma1 ? 1u : e.tag == BoundaryTag::Gamma3 ? 2u : 0u;
    for (int v : e.v) touches[v] |= bit;
  }
  const std::set<int> declared(mesh.interface_vertices.begin(), mesh.interface_vertices.end());
  for (std::size_t v = 0; v < touches.size(); ++v) {
    if (touches[v] == 3u && !declared.contains(static_cast<int>(v))) {
      issues.push_back("vertex " + std::to_string(v) +
                       " touches both G1 and G3 edges but is not a declared interface vertex");
    }
  }
  return issues;
}

MeshParseError::MeshParseError(int line, const std::string& message)
    : std::runtime_error("mesh line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid mesh:";
  for (const auto& s : issues) out += "\n  " + s;
  return out;
}

}  // namespace

MeshValidationError::MeshValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

namespace {

struct Line {
  int number;
  std::vector<std::string> tokens;
};

class LineReader {
 public:
  explicit LineReader(std::string_view text) {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++number;
      std::string_view raw = text.substr(pos, end - pos);
      if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      std::istringstream in{std::string(raw)};
      Line line{number, {}};
      for (std::string tok; in >> tok;) line.tokens.push_back(tok);
      if (!line.tokens.empty()) lines_.push_back(std::move(line));
      pos = end + 1;
    }
    last_line_ = number;
  }

  bool done() const { return next_ >= lines_.size(); }
  const Line& peek() const { return lines_[next_]; }
  const Line& take() { return lines_[next_++]; }
  int last_line() const { return last_line_; }

 private:
  std::vector<Line> lines_;
  std::size_t next_ = 0;
  int last_line_ = 0;
};

template <typename T>
T parse_number(const std::string& tok, int line, const char* what) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw MeshParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  }
  return value;
}

std::size_t expect_section(LineReader& reader, const char* name) {
  if (reader.done()) {
    if (std::string_view(name) == "boundary") {
      throw MeshParseError(reader.last_line(), "boundary tags required");
    }
    throw MeshParseError(reader.last_line(), std::string("missing section '") + name + "'");
  }
  const Line& line = reader.take();
  if (line.tokens.size() != 2 || line.tokens[0] != name) {
    throw MeshParseError(line.number, std::string("expected '") + name + " <count>'");
  }
  const long count = parse_number<long>(line.tokens[1], line.number, "a count");
  if (count < 0) throw MeshParseError(line.number, "negative count");
  return static_cast<std::size_t>(count);
}

const Line& expect_row(LineReader& reader, std::size_t width, const char* section) {
  if (reader.done()) {
    throw MeshParseError(reader.last_line(), std::string("unexpected end of ") + section + " section");
  }
  const Line& line = reader.take();
  if (line.tokens.size() != width) {
    throw MeshParseError(line.number, std::string(section) + " row needs " + std::to_string(width) +
                                          " fields");
  }
  return line;
}

int parse_vertex_ref(const std::string& tok, int line, std::size_t nv) {
  const long v = parse_number<long>(tok, line, "a vertex index");
  if (v < 0 || static_cast<std::size_t>(v) >= nv) {
    throw MeshParseError(line, "vertex index " + tok + " out of range [0," + std::to_string(nv) + ")");
  }
  return static_cast<int>(v);
}

}  // namespace

Mesh load_mesh(std::string_view text) {
  LineReader reader(text);
  if (reader.done()) throw MeshParseError(1, "empty mesh file");
  {
    const Line& header = reader.take();
    if (header.tokens.size() != 2 || header.tokens[0] != "meshfmt" || header.tokens[1] != "1") {
      throw MeshParseError(header.number, "expected header 'meshfmt 1'");
    }
  }

  Mesh mesh;
  const std::size_t nv = expect_section(reader, "vertices");
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const Line& line = expect_row(reader, 2, "vertices");
    mesh.vertices.push_back({parse_number<double>(line.tokens[0], line.number, "a coordinate"),
                             parse_number<double>(line.tokens[1], line.number, "a coordinate")});
  }

  const std::size_t nt = expect_section(reader, "triangles");
  mesh.triangles.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const Line& line = expect_row(reader, 3, "triangles");
    mesh.triangles.push_back({parse_vertex_ref(line.tokens[0], line.number, nv),
                              parse_vertex_ref(line.tokens[1], line.number, nv),
                              parse_vertex_ref(line.tokens[2], line.number, nv)});
  }

  const std::size_t nb = expect_section(reader, "boundary");
  mesh.boundary_edges.reserve(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const Line& line = expect_row(reader, 3, "boundary");
    BoundaryEdge edge;
    edge.v = {parse_vertex_ref(line.tokens[0], line.number, nv),
              parse_vertex_ref(line.tokens[1], line.number, nv)};
    const std::string& tag = line.tokens[2];
    if (tag == "G1") edge.tag = BoundaryTag::Gamma1;
    else if (tag == "G2") edge.tag = BoundaryTag::Gamma2;
    else if (tag == "G3") edge.tag = BoundaryTag::Gamma3;
    else throw MeshParseError(line.number, "unknown boundary tag '" + tag + "' (expected G1, G2 or G3)");
    mesh.boundary_edges.push_back(edge);
  }

  if (!reader.done() && reader.peek().tokens[0] == "interface") {
    const std::size_t ni = expect_section(reader, "interface");
    for (std::size_t i = 0; i < ni; ++i) {
      const Line& line = expect_row(reader, 1, "interface");
      mesh.interface_vertices.push_back(parse_vertex_ref(line.tokens[0], line.number, nv));
    }
  }
  if (!reader.done()) {
    throw MeshParseError(reader.peek().number, "unexpected trailing content");
  }

  if (auto issues = validate_mesh(mesh); !issues.empty()) {
    throw MeshValidationError(std::move(issues));
  }
  return mesh;
}

std::string save_mesh(const Mesh& mesh) {
  std::string out = "meshfmt 1\n";
  char buf[96];
  out += "vertices " + std::to_string(mesh.vertices.size()) + "\n";
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
  out += "triangles " + std::to_string(mesh.triangles.size()) + "\n";
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "%d %d %d\n", t[0], t[1], t[2]);
    out += buf;
  }
  out += "boundary " + std::to_string(mesh.boundary_edges.size()) + "\n";
  for (const auto& e : mesh.boundary_edges) {
    std::snprintf(buf, sizeof buf, "%d %d %s\n", e.v[0], e.v[1], std::string(tag_name(e.tag)).c_str());
    out += buf;
  }
  if (!mesh.interface_vertices.empty()) {
    out += "interface " + std::to_string(mesh.interface_vertices.size()) + "\n";
    for (int v : mesh.interface_vertices) out += std::to_string(v) + "\n";
  }
  return out;
}

Mesh load_mesh_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_mesh(buffer.str());
}

void save_mesh_file(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
  out << save_mesh(mesh);
}

}  // namespace hvi
