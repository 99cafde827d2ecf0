#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sandpile {

using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

// A cell of the bounding box. x counts columns from the left, y counts rows
// from the top (image order, which is also the order of every file format).
struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Lattice coordinates relative to the origin cell: i grows to the right,
// j grows upward.
struct LatticePoint {
  std::int64_t i = 0;
  std::int64_t j = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

// Neighbor slots in a fixed order.
enum Direction : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };
inline constexpr std::array<Direction, 4> kDirections{kEast, kWest, kNorth, kSouth};

// Finite subset of Z^2 with 4-neighborhood. Immutable after construction;
// shared between configurations through shared_ptr<const Domain>.
//
// Vertices are numbered 0..size()-1 in row-major order over masked-in cells.
class Domain {
 public:
  // Full width x height rectangle.
  static Domain rectangle(int width, int height);
  // Cells with i^2 + j^2 < (diameter/2)^2 in a diameter x diameter box.
  static Domain disk(int diameter);
  // Rectangle with a centered rectangular hole of hole_width x hole_height.
  static Domain rectangle_with_hole(int width, int height, int hole_width, int hole_height);
  // C-shaped domain: keep cells with i < -arm or |j| > arm.
  static Domain c_shape(int width, int height, int arm);
  // Explicit mask, row-major, y from the top.
  static Domain from_mask(int width, int height, std::vector<bool> mask);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  // Origin cell (the lattice point (0,0)) in bounding-box coordinates.
  Cell origin() const { return origin_; }

  bool contains(Cell c) const;
  bool in_box(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  // kNoVertex for cells outside the box or masked out.
  VertexId vertex_at(Cell c) const;
  Cell cell(VertexId v) const { return cells_[static_cast<std::size_t>(v)]; }

  LatticePoint coords(VertexId v) const { return coords_of(cell(v)); }
  LatticePoint coords_of(Cell c) const { return {c.x - origin_.x, origin_.y - c.y}; }
  Cell cell_of(LatticePoint p) const {
    return {static_cast<int>(p.i + origin_.x), static_cast<int>(origin_.y - p.j)};
  }

  // Neighbor in direction d, or kNoVertex.
  VertexId neighbor(VertexId v, Direction d) const {
    return neighbors_[static_cast<std::size_t>(v)][static_cast<std::size_t>(d)];
  }
  const std::array<VertexId, 4>& neighbors(VertexId v) const { return neighbors_[static_cast<std::size_t>(v)]; }
  int degree(VertexId v) const { return degree_[static_cast<std::size_t>(v)]; }
  bool is_boundary(VertexId v) const { return degree(v) < 4; }
  std::size_t boundary_count() const { return boundary_count_; }
  const std::vector<VertexId>& boundary_vertices() const { return boundary_; }
  const std::vector<bool>& mask() const { return mask_; }

  // Stable content hash (FNV-1a over size, mask and origin).
  std::uint64_t hash() const;
  // Short human-readable tag, e.g. "rect:255x255" when known.
  const std::string& name() const { return name_; }

  friend bool operator==(const Domain& a, const Domain& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.origin_ == b.origin_ && a.mask_ == b.mask_;
  }

 private:
  Domain(int width, int height, std::vector<bool> mask, std::string name);

  int width_ = 0;
  int height_ = 0;
  std::vector<bool> mask_;
  Cell origin_;
  std::vector<Cell> cells_;
  std::vector<VertexId> index_;  // per box cell, kNoVertex when masked out
  std::vector<std::array<VertexId, 4>> neighbors_;
  std::vector<std::uint8_t> degree_;
  std::vector<VertexId> boundary_;
  std::size_t boundary_count_ = 0;
  std::string name_;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Parses a domain descriptor:
//   rect:WxH          disk:D           holed:WxH:hwxhh
//   cshape:WxH:A      pbm:PATH (mask, set bit = vertex)
Domain parse_domain(std::string_view descriptor);
DomainPtr make_domain(std::string_view descriptor);

inline DomainPtr share(Domain d) { return std::make_shared<const Domain>(std::move(d)); }

}  // namespace sandpile
