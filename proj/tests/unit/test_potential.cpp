#include <doctest.h>

#include <numeric>

#include "sandpile/error.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/relax.hpp"

using namespace sandpile;

namespace {

std::vector<std::int64_t> row_major(const Potential& p) { return p.x; }

// Independent route: min-shift and gcd over the extended grid, then x = -Laplacian(h~) with the
// zero-outside convention, i.e. 4 h~(v) minus the in-domain neighbors.
std::vector<std::int64_t> oracle_potential(const Polynomial& h, const Domain& d) {
  std::vector<std::pair<std::int64_t, std::int64_t>> grid;
  for (std::size_t v = 0; v < d.size(); ++v) {
    auto p = d.coords(static_cast<VertexId>(v));
    grid.emplace_back(p.i, p.j);
    const std::int64_t di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k)
      if (d.vertex_at(d.cell_of({p.i + di[k], p.j + dj[k]})) == kNoVertex) grid.emplace_back(p.i + di[k], p.j + dj[k]);
  }
  std::int64_t lo = INT64_MAX;
  for (auto [i, j] : grid) lo = std::min(lo, h.eval(i, j));
  std::int64_t g = 0;
  for (auto [i, j] : grid) g = std::gcd(g, h.eval(i, j) - lo);
  if (g == 0) g = 1;
  auto ht = [&](std::int64_t i, std::int64_t j) { return (h.eval(i, j) - lo) / g; };
  std::vector<std::int64_t> x;
  for (std::size_t v = 0; v < d.size(); ++v) {
    auto p = d.coords(static_cast<VertexId>(v));
    std::int64_t s = 4 * ht(p.i, p.j);
    for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) s -= ht(d.coords(u).i, d.coords(u).j);
    x.push_back(s);
  }
  return x;
}

}  // namespace

TEST_CASE("linear harmonic on a 3x3 square") {
  auto d = make_domain("rect:3x3");
  Potential p = build_potential(basis("1a"), d);
  CHECK(row_major(p) == std::vector<std::int64_t>{1, 2, 7, 0, 0, 4, 1, 2, 7});
  CHECK(p.total == 24);
  CHECK(p.minimum == -2);
  CHECK(p.divisor == 1);
  CHECK(p.support() == 7);
  auto dir = directional_potentials(basis("1a"), d);
  CHECK(dir.east.x == std::vector<std::int64_t>{0, 0, 4, 0, 0, 4, 0, 0, 4});
  CHECK(dir.north.x == std::vector<std::int64_t>{1, 2, 3, 0, 0, 0, 0, 0, 0});
  CHECK(dir.south.x == std::vector<std::int64_t>{0, 0, 0, 0, 0, 0, 1, 2, 3});
  CHECK(dir.west.x == std::vector<std::int64_t>(9, 0));
}

TEST_CASE("ij on a 5x5 square") {
  auto d = make_domain("rect:5x5");
  Potential p = build_potential(basis("2a"), d);
  CHECK(p.minimum == -6);
  CHECK(p.x == oracle_potential(basis("2a"), *d));
}

TEST_CASE("fold equals minus the Laplacian of the normalized field") {
  for (int n : {3, 4, 7, 16, 31, 63})
    for (const auto& id : basis_ids()) {
      auto d = make_domain("rect:" + std::to_string(n) + "x" + std::to_string(n));
      Polynomial h = basis(id);
      Potential p = build_potential(h, d);
      CHECK(p.x == oracle_potential(h, *d));
      std::int64_t sum = 0;
      for (auto v : p.x) {
        CHECK(v >= 0);
        sum += v;
      }
      CHECK(sum == p.total);
    }
  for (const char* desc : {"disk:21", "holed:15x13:5x3", "cshape:17x17:3"}) {
    auto d = make_domain(desc);
    for (const char* id : {"1a", "2a", "3b", "4a"}) CHECK(build_potential(basis(id), d).x == oracle_potential(basis(id), *d));
  }
}

TEST_CASE("normalization divides by the gcd of the extended field") {
  auto d = make_domain("rect:5x5");
  Potential one = build_potential(basis("2a"), d);
  Potential six = build_potential(linear_combine({{6, basis("2a")}}), d);
  CHECK(six.divisor == 6 * one.divisor);
  CHECK(six.x == one.x);
  Potential c = build_potential(basis("0"), d);
  CHECK(c.total == 0);
}

TEST_CASE("the extended-grid gcd can be smaller than the gcd of X") {
  auto gcd_of = [](const Potential& p) {
    std::int64_t g = 0;
    for (auto v : p.x) g = std::gcd(g, v);
    return g;
  };
  for (int n : {3, 5, 7, 9, 11})
    for (const auto& id : basis_ids()) {
      if (id == "H0") continue;
      Potential p = build_potential(basis(id), make_domain("rect:" + std::to_string(n) + "x" + std::to_string(n)));
      CHECK(gcd_of(p) >= 1);
    }
  CHECK(gcd_of(build_potential(basis("2a"), make_domain("rect:5x5"))) == 3);
  CHECK(gcd_of(build_potential(basis("2a"), make_domain("rect:9x9"))) == 5);
  CHECK(gcd_of(build_potential(basis("2b"), make_domain("rect:3x3"))) == 8);
  CHECK(build_potential(basis("4a"), make_domain("rect:7x7")).divisor == 6);
}

TEST_CASE("Creutz potential and directional sums") {
  auto d = make_domain("rect:6x4");
  Potential c = creutz_potential(d);
  CHECK(c.x == boundary_deficit(*d));
  CHECK(c.total == 2 * 6 + 2 * 4);
  for (const char* id : {"1b", "2b", "3a", "5a"}) {
    auto d2 = make_domain("rect:9x8");
    Potential full = build_potential(basis(id), d2);
    auto dir = directional_potentials(basis(id), d2);
    for (std::size_t v = 0; v < d2->size(); ++v)
      CHECK(dir.north.x[v] + dir.east.x[v] + dir.south.x[v] + dir.west.x[v] == full.x[v]);
  }
}

TEST_CASE("super-harmonic sources") {
  auto d = make_domain("rect:31x31");
  Potential q = build_potential(parse_field_source("quadrant", *d), d);
  for (auto v : q.x) CHECK(v >= 0);
  CHECK(q.total > 0);
  CHECK_THROWS_AS(directional_potentials(parse_field_source("quadrant", *d), d), Error);
  CHECK_THROWS_AS(build_potential(parse_polynomial("i^2"), d), Error);
}
