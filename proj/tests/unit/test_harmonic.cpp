#include <doctest.h>

#include "sandpile/error.hpp"
#include "sandpile/harmonic.hpp"
#include "sandpile/rng.hpp"

using namespace sandpile;

namespace {

__int128 neighbor_laplacian(const Polynomial& p, std::int64_t i, std::int64_t j) {
  return p.eval_wide(i + 1, j) + p.eval_wide(i - 1, j) + p.eval_wide(i, j + 1) + p.eval_wide(i, j - 1) -
         4 * p.eval_wide(i, j);
}

}  // namespace

TEST_CASE("basis elements are discrete harmonic") {
  CHECK(basis_ids().size() == 10);
  for (const auto& id : basis_ids()) {
    Polynomial p = basis(id);
    CHECK(p.harmonic());
    CHECK(check_harmonic(p, 40));
    for (std::int64_t i = -40; i <= 40; i += 7)
      for (std::int64_t j = -40; j <= 40; j += 5) CHECK(neighbor_laplacian(p, i, j) == 0);
  }
  CHECK(basis("2a") == basis("H2a"));
  CHECK_THROWS_AS(basis("H9z"), Error);
}

TEST_CASE("continuous harmonics need a lattice correction") {
  Polynomial quartic({{1, 4, 0}, {-6, 2, 2}, {1, 0, 4}});
  // (i+1)^4 + (i-1)^4 - 2 i^4 = 12 i^2 + 2, and the mixed term cancels the i^2, j^2 parts.
  CHECK(quartic.laplacian_at(0, 0) == 4);
  CHECK(neighbor_laplacian(quartic, 0, 0) == 4);
  CHECK(quartic.laplacian_at(13, -9) == 4);
  CHECK_FALSE(check_harmonic(quartic, 3));
  CHECK(check_harmonic(Polynomial({{3, 5, 0}, {-30, 3, 2}, {15, 1, 4}, {-10, 3, 0}}), 30));
  CHECK_FALSE(check_harmonic(Polynomial({{1, 5, 0}, {-10, 3, 2}, {5, 1, 4}}), 3));
}

TEST_CASE("integer combinations stay harmonic") {
  Rng rng(2024);
  const auto& ids = basis_ids();
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::pair<std::int64_t, Polynomial>> parts;
    int n = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < n; ++k)
      parts.emplace_back(static_cast<std::int64_t>(rng.below(21)) - 10, basis(ids[rng.below(ids.size())]));
    Polynomial p = linear_combine(parts);
    CHECK(p.harmonic());
    auto i = static_cast<std::int64_t>(rng.below(101)) - 50;
    auto j = static_cast<std::int64_t>(rng.below(101)) - 50;
    CHECK(p.laplacian_at(i, j) == 0);
    __int128 direct = 0;
    for (const auto& [w, q] : parts) direct += w * q.eval_wide(i, j);
    CHECK(p.eval_wide(i, j) == direct);
  }
}

TEST_CASE("polynomial parsing") {
  CHECK(parse_polynomial("i") == basis("1a"));
  CHECK(parse_polynomial("1*i^3*j^0,-3*i^1*j^2") == basis("3a"));
  CHECK(parse_polynomial("i^2,-j^2") == basis("2b"));
  Polynomial two = parse_polynomial("2*H1a,-H1b");
  CHECK(two == Polynomial({{2, 1, 0}, {-1, 0, 1}}));
  CHECK(two.harmonic());
  CHECK_FALSE(parse_polynomial("i^2").harmonic());
  CHECK(parse_polynomial("i,i,-2*i").is_zero());
  CHECK(parse_polynomial(basis("4a").str()) == basis("4a"));
  CHECK_THROWS_AS(parse_polynomial("i^"), ParseError);
  CHECK_THROWS_AS(parse_polynomial("k^2"), ParseError);
  CHECK_THROWS_AS(parse_polynomial(""), ParseError);
}

TEST_CASE("64-bit evaluation bounds") {
  for (const auto& id : basis_ids()) {
    Polynomial p = basis(id);
    for (std::int64_t i : {-512, 0, 512})
      for (std::int64_t j : {-512, 0, 512}) CHECK(static_cast<__int128>(p.eval(i, j)) == p.eval_wide(i, j));
  }
  Polynomial huge({{INT64_MAX, 5, 0}});
  CHECK_THROWS_AS(huge.eval(1000, 0), OverflowError);
}

TEST_CASE("rational harmonics") {
  RationalHarmonic h = parse_rational_harmonic("1/2:H2a;-3/7:i");
  CHECK(h.harmonic());
  CHECK(h.eval(2, 3) == Rational(3) - Rational(6, 7));
  CHECK_FALSE(parse_rational_harmonic("1:i^2").harmonic());
  CHECK_THROWS_AS(parse_rational_harmonic("1/2"), ParseError);
}

TEST_CASE("tropical minimum is super-harmonic") {
  Window w{-5, 5, -4, 4};
  auto field = tropical_min({{Polynomial({{1, 1, 0}}), 0}, {Polynomial({{-1, 1, 0}}), 0}}, w);
  CHECK(field.at(3, 0) == -3);
  CHECK(field.laplacian_at(0, 0) == -2);
  CHECK(field.laplacian_at(2, 1) == 0);
  CHECK(field.is_super_harmonic());
  auto quad = tropical_min(quadrant_terms(default_quadrant_constants(*make_domain("rect:31x31"))),
                           extended_window(*make_domain("rect:31x31")));
  CHECK(quad.is_super_harmonic());
}

TEST_CASE("field sources") {
  auto d = make_domain("rect:9x7");
  Window w = extended_window(*d);
  CHECK(w.i0 == -5);
  CHECK(w.i1 == 5);
  CHECK(w.j0 == -4);
  CHECK(w.j1 == 4);
  CHECK(std::holds_alternative<Polynomial>(parse_field_source("H3a", *d)));
  auto q = parse_field_source("quadrant:4,0,10,20,-3", *d);
  REQUIRE(std::holds_alternative<DiscreteField>(q));
  const auto& f = std::get<DiscreteField>(q);
  CHECK(f.at(2, 3) == std::min({6LL, -18LL + 10, 8LL + 20, -24LL - 3}));
  auto m = parse_field_source("min:i@0;-1*i@2", *d);
  CHECK(std::get<DiscreteField>(m).at(1, 0) == 1);
  CHECK(std::get<DiscreteField>(m).at(2, 0) == 0);
  CHECK_THROWS_AS(parse_field_source("quadrant:1,2", *d), ParseError);
}
