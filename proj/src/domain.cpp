#include "sandpile/domain.hpp"

#include <charconv>
#include <cstdlib>

#include "sandpile/error.hpp"
#include "sandpile/io.hpp"

namespace sandpile {
namespace {

Cell centered_origin(int width, int height) {
  // zero-based (ceil(N/2)-1, ceil(M/2)-1) with rows counted from the bottom
  int ox = (width + 1) / 2 - 1;
  int oy_from_bottom = (height + 1) / 2 - 1;
  return {ox, height - 1 - oy_from_bottom};
}

void check_dims(int width, int height) {
  if (width < 1 || height < 1)
    throw Error("domain dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
}

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("bad number '" + std::string(s) + "' in domain descriptor '" + std::string(whole) + "'");
  return v;
}

std::pair<int, int> parse_dims(std::string_view s, std::string_view whole) {
  auto x = s.find('x');
  if (x == std::string_view::npos)
    throw ParseError("expected WxH in domain descriptor '" + std::string(whole) + "'");
  return {parse_int(s.substr(0, x), whole), parse_int(s.substr(x + 1), whole)};
}

}  // namespace

Domain::Domain(int width, int height, std::vector<bool> mask, std::string name)
    : width_(width), height_(height), mask_(std::move(mask)), origin_(centered_origin(width, height)),
      name_(std::move(name)) {
  check_dims(width, height);
  if (mask_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("domain mask size does not match dimensions");

  index_.assign(mask_.size(), kNoVertex);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      std::size_t k = static_cast<std::size_t>(y) * width_ + x;
      if (mask_[k]) {
        index_[k] = static_cast<VertexId>(cells_.size());
        cells_.push_back({x, y});
      }
    }
  }
  if (cells_.empty()) throw Error("empty domain");

  neighbors_.resize(cells_.size());
  degree_.resize(cells_.size());
  constexpr std::array<std::array<int, 2>, 4> step{{{1, 0}, {-1, 0}, {0, -1}, {0, 1}}};  // E W N S
  for (std::size_t v = 0; v < cells_.size(); ++v) {
    int deg = 0;
    for (Direction d : kDirections) {
      Cell n{cells_[v].x + step[d][0], cells_[v].y + step[d][1]};
      VertexId u = vertex_at(n);
      neighbors_[v][d] = u;
      if (u != kNoVertex) ++deg;
    }
    degree_[v] = static_cast<std::uint8_t>(deg);
    if (deg < 4) boundary_.push_back(static_cast<VertexId>(v));
  }
  boundary_count_ = boundary_.size();
}

Domain Domain::rectangle(int width, int height) {
  check_dims(width, height);
  return Domain(width, height, std::vector<bool>(static_cast<std::size_t>(width) * height, true),
                "rect:" + std::to_string(width) + "x" + std::to_string(height));
}

Domain Domain::disk(int diameter) {
  check_dims(diameter, diameter);
  std::vector<bool> mask(static_cast<std::size_t>(diameter) * diameter, false);
  Cell o = centered_origin(diameter, diameter);
  // i^2 + j^2 < (D/2)^2  <=>  4 (i^2 + j^2) < D^2
  const std::int64_t limit = static_cast<std::int64_t>(diameter) * diameter;
  for (int y = 0; y < diameter; ++y) {
    for (int x = 0; x < diameter; ++x) {
      std::int64_t i = x - o.x;
      std::int64_t j = o.y - y;
      mask[static_cast<std::size_t>(y) * diameter + x] = 4 * (i * i + j * j) < limit;
    }
  }
  return Domain(diameter, diameter, std::move(mask), "disk:" + std::to_string(diameter));
}

Domain Domain::rectangle_with_hole(int width, int height, int hole_width, int hole_height) {
  check_dims(width, height);
  if (hole_width < 0 || hole_height < 0 || hole_width > width || hole_height > height)
    throw Error("hole does not fit into the rectangle");
  std::vector<bool> mask(static_cast<std::size_t>(width) * height, true);
  int x0 = (width - hole_width) / 2;
  int y0 = (height - hole_height) / 2;
  for (int y = y0; y < y0 + hole_height; ++y)
    for (int x = x0; x < x0 + hole_width; ++x) mask[static_cast<std::size_t>(y) * width + x] = false;
  return Domain(width, height, std::move(mask),
                "holed:" + std::to_string(width) + "x" + std::to_string(height) + ":" +
                    std::to_string(hole_width) + "x" + std::to_string(hole_height));
}

Domain Domain::c_shape(int width, int height, int arm) {
  check_dims(width, height);
  std::vector<bool> mask(static_cast<std::size_t>(width) * height, false);
  Cell o = centered_origin(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int i = x - o.x;
      int j = o.y - y;
      mask[static_cast<std::size_t>(y) * width + x] = i < -arm || std::abs(j) > arm;
    }
  }
  return Domain(width, height, std::move(mask),
                "cshape:" + std::to_string(width) + "x" + std::to_string(height) + ":" + std::to_string(arm));
}

Domain Domain::from_mask(int width, int height, std::vector<bool> mask) {
  return Domain(width, height, std::move(mask), "mask:" + std::to_string(width) + "x" + std::to_string(height));
}

bool Domain::contains(Cell c) const { return vertex_at(c) != kNoVertex; }

VertexId Domain::vertex_at(Cell c) const {
  if (!in_box(c)) return kNoVertex;
  return index_[static_cast<std::size_t>(c.y) * width_ + c.x];
}

std::uint64_t Domain::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t value) {
    for (int k = 0; k < 8; ++k) {
      h ^= (value >> (8 * k)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(static_cast<std::uint64_t>(width_));
  mix(static_cast<std::uint64_t>(height_));
  mix(static_cast<std::uint64_t>(origin_.x));
  mix(static_cast<std::uint64_t>(origin_.y));
  std::uint64_t word = 0;
  int bits = 0;
  for (bool b : mask_) {
    word = (word << 1) | (b ? 1u : 0u);
    if (++bits == 64) {
      mix(word);
      word = 0;
      bits = 0;
    }
  }
  if (bits > 0) mix(word);
  return h;
}

Domain parse_domain(std::string_view descriptor) {
  auto colon = descriptor.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("domain descriptor needs a kind prefix: '" + std::string(descriptor) + "'");
  std::string_view kind = descriptor.substr(0, colon);
  std::string_view rest = descriptor.substr(colon + 1);

  if (kind == "rect") {
    auto [w, h] = parse_dims(rest, descriptor);
    return Domain::rectangle(w, h);
  }
  if (kind == "disk") return Domain::disk(parse_int(rest, descriptor));
  if (kind == "holed" || kind == "cshape") {
    auto c2 = rest.find(':');
    if (c2 == std::string_view::npos)
      throw ParseError("missing second field in domain descriptor '" + std::string(descriptor) + "'");
    auto [w, h] = parse_dims(rest.substr(0, c2), descriptor);
    if (kind == "holed") {
      auto [hw, hh] = parse_dims(rest.substr(c2 + 1), descriptor);
      return Domain::rectangle_with_hole(w, h, hw, hh);
    }
    return Domain::c_shape(w, h, parse_int(rest.substr(c2 + 1), descriptor));
  }
  if (kind == "pbm" || kind == "mask") {
    Bitmap bm = read_pbm(std::string(rest));
    return Domain::from_mask(bm.width, bm.height, std::move(bm.bits));
  }
  throw ParseError("unknown domain kind '" + std::string(kind) + "' (rect, disk, holed, cshape, pbm)");
}

DomainPtr make_domain(std::string_view descriptor) { return share(parse_domain(descriptor)); }

}  // namespace sandpile
