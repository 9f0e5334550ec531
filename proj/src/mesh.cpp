#include "avem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace avem {

Mesh::Mesh(std::vector<Point2d> vertices, std::vector<std::vector<int>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), generation_(cells_.size(), 0) {
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int v : cells_[c])
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
        throw InvalidMesh("cell " + std::to_string(c) + " references a missing vertex");
    attach(static_cast<int>(c));
  }
}

Polygon2d Mesh::polygon(int c) const {
  std::vector<Point2d> pts;
  pts.reserve(cells_[c].size());
  for (int v : cells_[c]) pts.push_back(vertices_[v]);
  return Polygon2d(std::move(pts));
}

void Mesh::attach(int c) {
  const auto& loop = cells_[c];
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const int a = loop[i], b = loop[(i + 1) % loop.size()];
    if (a == b) throw InvalidMesh("cell " + std::to_string(c) + " repeats a vertex");
    auto& slots = edges_[key(a, b)];
    int& slot = a < b ? slots.forward : slots.backward;
    if (slot >= 0)
      throw InvalidMesh("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") claimed twice with the same orientation");
    slot = c;
  }
}

void Mesh::detach(int c) {
  const auto& loop = cells_[c];
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const int a = loop[i], b = loop[(i + 1) % loop.size()];
    auto it = edges_.find(key(a, b));
    if (it == edges_.end()) continue;
    int& slot = a < b ? it->second.forward : it->second.backward;
    if (slot == c) slot = -1;
    if (it->second.forward < 0 && it->second.backward < 0) edges_.erase(it);
  }
}

std::vector<EdgeRecord> Mesh::edges() const {
  std::vector<EdgeRecord> out;
  out.reserve(edges_.size());
  for (const auto& [k, s] : edges_) {
    if (s.forward >= 0)
      out.push_back({k.first, k.second, s.forward, s.backward});
    else
      out.push_back({k.second, k.first, s.backward, -1});
  }
  return out;
}

int Mesh::neighbor(int cell, int a, int b) const {
  auto [first, second] = edge_cells(a, b);
  if (first == cell) return second;
  if (second == cell) return first;
  return -1;
}

std::pair<int, int> Mesh::edge_cells(int a, int b) const {
  auto it = edges_.find(key(a, b));
  if (it == edges_.end()) return {-1, -1};
  const auto& s = it->second;
  if (s.forward < 0) return {s.backward, -1};
  return {s.forward, s.backward};
}

std::vector<bool> Mesh::boundary_vertices() const {
  std::vector<bool> flags(vertices_.size(), false);
  for (const auto& [k, s] : edges_)
    if (s.forward < 0 || s.backward < 0) flags[k.first] = flags[k.second] = true;
  return flags;
}

std::vector<std::vector<int>> Mesh::vertex_cells() const {
  std::vector<std::vector<int>> out(vertices_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c)
    for (int v : cells_[c]) out[v].push_back(static_cast<int>(c));
  return out;
}

SplitResult Mesh::split_cell(int cell, const Point2d& point, const Point2d& direction) {
  const Polygon2d poly = polygon(cell);
  const auto cx = line_crossings(poly, point, direction);
  const auto& loop = cells_[cell];
  const std::size_t n = loop.size();

  SplitResult result;
  std::array<int, 2> ids{-1, -1};
  for (int k = 0; k < 2; ++k)
    if (!cx[k].at_vertex) {
      ids[k] = static_cast<int>(vertices_.size() + result.new_vertices.size());
      result.new_vertices.push_back(ids[k]);
    }
  auto [left, right] = split_loop(loop, cx[0], cx[1], ids[0], ids[1]);
  // Both parts must be proper polygons before anything is mutated.
  std::vector<Point2d> fresh;
  for (int k = 0; k < 2; ++k)
    if (!cx[k].at_vertex) fresh.push_back(cx[k].point);
  const auto coords = [&](const std::vector<int>& ids_) {
    std::vector<Point2d> pts;
    for (int v : ids_)
      pts.push_back(v < static_cast<int>(vertices_.size()) ? vertices_[v]
                                                           : fresh[v - vertices_.size()]);
    return pts;
  };
  try {
    Polygon2d check_left(coords(left)), check_right(coords(right));
  } catch (const DegenerateElement& e) {
    throw ClipFailed(std::string("cut produced a degenerate part: ") + e.what());
  }

  // Mutation starts here; nothing below throws for a valid mesh.
  for (const auto& p : fresh) vertices_.push_back(p);
  for (int k = 0; k < 2; ++k) {
    if (cx[k].at_vertex) continue;
    const int a = loop[cx[k].index], b = loop[(cx[k].index + 1) % n];
    const int nb = neighbor(cell, a, b);
    if (nb < 0) continue;
    detach(nb);
    auto& nloop = cells_[nb];
    for (std::size_t i = 0; i < nloop.size(); ++i)
      if (nloop[i] == b && nloop[(i + 1) % nloop.size()] == a) {
        nloop.insert(nloop.begin() + static_cast<std::ptrdiff_t>(i + 1), ids[k]);
        break;
      }
    attach(nb);
    result.touched_neighbors.push_back(nb);
  }
  detach(cell);
  cells_[cell] = std::move(left);
  cells_.push_back(std::move(right));
  const int fresh_cell = static_cast<int>(cells_.size() - 1);
  generation_[cell] += 1;
  generation_.push_back(generation_[cell]);
  attach(cell);
  attach(fresh_cell);
  result.kept_cell = cell;
  result.new_cell = fresh_cell;
  return result;
}

void Mesh::validate(double expected_area) const {
  double total = 0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& loop = cells_[c];
    std::set<int> uniq(loop.begin(), loop.end());
    if (uniq.size() != loop.size())
      throw InvalidMesh("cell " + std::to_string(c) + " repeats a vertex");
    Polygon2d poly;
    try {
      poly = polygon(static_cast<int>(c));
    } catch (const DegenerateElement& e) {
      throw InvalidMesh("cell " + std::to_string(c) + ": " + e.what());
    }
    if (!is_convex(poly)) throw InvalidMesh("cell " + std::to_string(c) + " is not convex");
    if (!is_simple(poly)) throw InvalidMesh("cell " + std::to_string(c) + " is not simple");
    total += poly.area();
  }

  // Rebuilding the edge table from the cells must reproduce it exactly.
  Mesh rebuilt(vertices_, cells_);
  if (rebuilt.edges_.size() != edges_.size())
    throw InvalidMesh("edge table out of sync with cells");
  for (const auto& [k, s] : edges_) {
    auto it = rebuilt.edges_.find(k);
    if (it == rebuilt.edges_.end() || it->second.forward != s.forward ||
        it->second.backward != s.backward)
      throw InvalidMesh("edge table out of sync with cells");
  }

  // A boundary edge must lie on the outer boundary: every vertex strictly
  // inside a boundary edge would indicate a non-conforming T-junction.
  for (const auto& [k, s] : edges_) {
    if (s.forward >= 0 && s.backward >= 0) continue;
    const Point2d p = vertices_[k.first], q = vertices_[k.second];
    const double len = (q - p).norm();
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      if (static_cast<int>(v) == k.first || static_cast<int>(v) == k.second) continue;
      const Point2d& x = vertices_[v];
      const double t = (x - p).dot(q - p) / (len * len);
      if (t <= 1e-12 || t >= 1 - 1e-12) continue;
      if (std::abs(cross<double>(q - p, x - p)) / len < 1e-12 * len)
        throw InvalidMesh("hanging vertex " + std::to_string(v) + " on a boundary edge");
    }
  }

  if (expected_area >= 0 && std::abs(total - expected_area) > 1e-10 * std::max(1.0, expected_area))
    throw InvalidMesh("cells cover area " + std::to_string(total) + ", expected " +
                      std::to_string(expected_area));
}

Mesh initial_mesh(int n) {
  if (n < 1) throw InvalidMesh("grid size must be >= 1");
  std::vector<Point2d> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  std::vector<std::vector<int>> cells;
  cells.reserve(n * n);
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return Mesh(std::move(vertices), std::move(cells));
}

Patch vertex_patch(const Mesh& mesh, int v) {
  Patch p{v, {}};
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& loop = mesh.cell(static_cast<int>(c));
    if (std::find(loop.begin(), loop.end(), v) != loop.end())
      p.members.push_back(static_cast<int>(c));
  }
  return p;
}

Patch cell_patch(const Mesh& mesh, int c) {
  const auto vc = mesh.vertex_cells();
  std::set<int> members;
  for (int v : mesh.cell(c)) members.insert(vc[v].begin(), vc[v].end());
  return {c, std::vector<int>(members.begin(), members.end())};
}

std::vector<std::vector<int>> cell_patches(const Mesh& mesh) {
  const auto vc = mesh.vertex_cells();
  std::vector<std::vector<int>> out(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    auto& m = out[c];
    for (int v : mesh.cell(static_cast<int>(c))) m.insert(m.end(), vc[v].begin(), vc[v].end());
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
  }
  return out;
}

}  // namespace avem
