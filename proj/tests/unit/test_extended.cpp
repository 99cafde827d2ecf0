#include <doctest.h>

#include <numeric>
#include <sstream>

#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/extended.hpp"
#include "sandpile/group.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/rng.hpp"

using namespace sandpile;

namespace {

Rational random_weight(Rng& rng) {
  auto num = static_cast<std::int64_t>(rng.below(41)) - 20;
  auto den = static_cast<std::int64_t>(rng.below(12)) + 1;
  return Rational(num, den);
}

RationalHarmonic random_harmonic(Rng& rng) {
  RationalHarmonic h;
  for (const char* id : {"1a", "1b", "2a", "2b"}) h.parts.emplace_back(random_weight(rng), basis(id));
  return h;
}

RationalHarmonic scaled(const RationalHarmonic& h, const Rational& s) {
  RationalHarmonic out = h;
  for (auto& [w, p] : out.parts) w *= s;
  return out;
}

RationalHarmonic sum(const RationalHarmonic& a, const RationalHarmonic& b) {
  RationalHarmonic out = a;
  out.parts.insert(out.parts.end(), b.parts.begin(), b.parts.end());
  return out;
}

}  // namespace

TEST_CASE("extended relaxation example") {
  auto d = make_domain("rect:2x1");
  ExtendedConfiguration c(d, {Rational::parse("4.25"), Rational(3)});
  ExtendedConfiguration s = extended_relax(c);
  CHECK(s[0] == Rational(5, 4));
  CHECK(s[1] == Rational(0));
  CHECK(s.is_stable());
  auto d3 = make_domain("rect:3x3");
  ExtendedConfiguration bad(d3);
  bad[4] = Rational(1, 2);
  CHECK_THROWS_AS(extended_relax(bad), Error);
}

TEST_CASE("integral inputs relax like the integer model") {
  Rng rng(8);
  auto d = make_domain("rect:6x5");
  for (int trial = 0; trial < 20; ++trial) {
    Configuration c(d);
    for (std::size_t v = 0; v < d->size(); ++v) c[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(12));
    ExtendedConfiguration e = extended_relax(ExtendedConfiguration::from_integer(c));
    CHECK(e == ExtendedConfiguration::from_integer(relax(c).stable));
  }
}

TEST_CASE("real potential") {
  auto d = make_domain("rect:5x5");
  RationalHarmonic h = parse_rational_harmonic("1/3:H1a");
  RealPotential rp = real_potential(h, *d);
  for (std::size_t v = 0; v < d->size(); ++v) {
    CHECK(rp.x[v] >= Rational(0));
    if (!d->is_boundary(static_cast<VertexId>(v))) CHECK(rp.x[v] == Rational(0));
  }
  // Integer weights reproduce the normalized integer fold up to adding multiples of 4 - degree.
  RealPotential ri = real_potential(parse_rational_harmonic("1:H2a"), *d);
  Potential pi = build_potential(basis("2a"), d);
  auto deficit = boundary_deficit(*d);
  Configuration a = Configuration(d, std::vector<std::int64_t>(pi.x.begin(), pi.x.end()));
  for (std::size_t v = 0; v < d->size(); ++v) CHECK(ri.x[v].is_integer());
  // Both equal -Laplacian of an integer-valued function, so they agree modulo the Laplacian lattice.
  Configuration id = identity(d);
  Configuration left = id, right = id;
  for (std::size_t v = 0; v < d->size(); ++v) {
    left[static_cast<VertexId>(v)] += ri.x[v].num();
    right[static_cast<VertexId>(v)] += a[static_cast<VertexId>(v)];
  }
  CHECK(relax(left).stable == relax(right).stable);
}

TEST_CASE("eta kills integer harmonics and is additive") {
  Rng rng(99);
  for (const char* desc : {"rect:2x1", "rect:3x2", "rect:4x4"}) {
    auto d = make_domain(desc);
    Configuration id = identity(d);
    ExtendedConfiguration eid = ExtendedConfiguration::from_integer(id);
    for (const char* h : {"1:H1a", "1:H2a", "-2:H2b;3:H1b", "1:H3a"}) CHECK(eta(parse_rational_harmonic(h), id) == eid);
    int pairs = std::string(desc) == "rect:2x1" ? 100 : 20;
    for (int trial = 0; trial < pairs; ++trial) {
      RationalHarmonic a = random_harmonic(rng), b = random_harmonic(rng);
      ExtendedConfiguration ea = eta(a, id), eb = eta(b, id);
      CHECK(ea.is_stable());
      CHECK(ea.interior_integral());
      CHECK(eta(sum(a, b), id) == extended_relax(ea + eb));
    }
  }
}

TEST_CASE("geodesics close after the common denominator") {
  Rng rng(4);
  auto d = make_domain("rect:4x3");
  Configuration id = identity(d);
  ExtendedConfiguration eid = ExtendedConfiguration::from_integer(id);
  for (int trial = 0; trial < 10; ++trial) {
    auto den = static_cast<std::int64_t>(rng.below(6)) + 2;
    RationalHarmonic h = scaled(parse_rational_harmonic("1:H2a;1:H1b"), Rational(1, den));
    RealPotential rp = real_potential(h, *d);
    CHECK(geodesic_frame(eid, rp.x, Rational(1)) == eta(h, id));
    CHECK(geodesic_frame(eid, rp.x, Rational(den)) == eid);
    CHECK(geodesic_frame(eid, rp.x, Rational(2)) == eta(scaled(h, Rational(2)), id));
  }
}

TEST_CASE("floor projection") {
  Rng rng(5);
  auto d = make_domain("rect:5x4");
  Configuration id = identity(d);
  for (int trial = 0; trial < 20; ++trial) {
    ExtendedConfiguration e = eta(random_harmonic(rng), id);
    Configuration f = floor_project(e);
    CHECK(f.is_stable());
    for (std::size_t v = 0; v < d->size(); ++v) {
      CHECK(Rational(f[static_cast<VertexId>(v)]) <= e[static_cast<VertexId>(v)]);
      CHECK(e[static_cast<VertexId>(v)] < Rational(f[static_cast<VertexId>(v)] + 1));
    }
  }
  auto two = make_domain("rect:2x1");
  CHECK_THROWS_AS(floor_project(ExtendedConfiguration(two, {Rational(9, 2), Rational(0)})), Error);
}

TEST_CASE("renormalization") {
  auto outer = make_domain("rect:4x4");
  Configuration oid = identity(outer);
  // Same domain: every recurrent configuration maps to itself.
  Rng rng(13);
  auto rec = recurrent_configurations(make_domain("rect:2x2"));
  auto small = make_domain("rect:2x2");
  Configuration sid = identity(small);
  for (const auto& c : rec) CHECK(renormalize(c, sid, sid) == c);
  for (int trial = 0; trial < 10; ++trial) {
    Configuration c = oid;
    for (int k = 0; k < 5; ++k) c = drop_and_relax(c, static_cast<VertexId>(rng.below(outer->size()))).first;
    CHECK(renormalize(c, oid, oid) == c);
  }
  CHECK(renormalize(oid, oid, sid) == sid);

  // Frames of an integer potential at times t with t X integral are eta(t h~).
  auto big = make_domain("rect:6x6");
  auto mid = make_domain("rect:4x4");
  Configuration bid = identity(big), mid_id = identity(mid);
  for (const char* h : {"1a", "2a", "2b", "1b"}) {
    Potential p = build_potential(basis(h), big);
    std::int64_t g = 0;
    for (auto x : p.x) g = std::gcd(g, x);
    if (g < 2) continue;
    Rational t(1, g);
    Configuration c = frame(bid, p, t);
    RationalHarmonic th;
    th.parts.emplace_back(Rational(1, g * p.divisor), basis(h));
    th.parts.emplace_back(Rational(-p.minimum, g * p.divisor), basis("0"));
    CHECK(ExtendedConfiguration::from_integer(c) == eta(th, bid));
    CHECK(renormalize(c, bid, mid_id) == floor_project(eta(th, mid_id)));
  }
  Configuration not_rec(outer);
  CHECK_THROWS_AS(renormalize(not_rec, oid, sid), Error);
}

TEST_CASE("SPILE-X round trip") {
  Rng rng(6);
  auto d = make_domain("rect:5x3");
  ExtendedConfiguration e = eta(random_harmonic(rng), identity(d));
  std::stringstream ss;
  write_spile_x(ss, e);
  CHECK(read_spile_x(ss, d) == e);
  std::stringstream bad("SPILE-X 1\n2 1\n1/0 3\n");
  CHECK_THROWS_AS(read_spile_x(bad), Error);
}

TEST_CASE("preimage cubes of the floor map on 1x2") {
  auto d = make_domain("rect:2x1");
  auto rec = recurrent_configurations(d);
  REQUIRE(rec.size() == 15);
  for (const auto& phi : rec)
    for (int e0 = 0; e0 < 2; ++e0)
      for (int e1 = 0; e1 < 2; ++e1) {
        Configuration corner = phi;
        corner[0] += e0;
        corner[1] += e1;
        Configuration c = relax(corner).stable;
        CHECK(is_recurrent(c));
        ExtendedConfiguration inside(d, {Rational(phi[0]) + Rational(999 * e0, 1000), Rational(phi[1]) + Rational(999 * e1, 1000)});
        CHECK(extended_relax(inside) == inside);
        CHECK(floor_project(inside) == phi);
        CHECK(extended_relax(ExtendedConfiguration::from_integer(corner)) == ExtendedConfiguration::from_integer(c));
      }
}
