#include <doctest.h>

#include <cmath>

#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/group.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/rng.hpp"

using namespace sandpile;

namespace {

Configuration plain_frame(const Configuration& start, const Potential& p, const Rational& t, Rounding r) {
  Configuration c = start;
  c.add(drops_at(p, t, r));
  return relax(c).stable;
}

Rational random_time(Rng& rng, std::int64_t den) {
  return Rational(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * den + 1))), den);
}

}  // namespace

TEST_CASE("rounding modes") {
  CHECK(rounded_drops(Rational(1, 2), 3, Rounding::kFloor) == 1);
  CHECK(rounded_drops(Rational(1, 2), 3, Rounding::kCeil) == 2);
  CHECK(rounded_drops(Rational(1, 2), 3, Rounding::kRound) == 2);
  CHECK(rounded_drops(Rational(1, 3), 4, Rounding::kRound) == 1);
  CHECK(rounded_drops(Rational(1, 2), 4, Rounding::kCeil) == 2);
  CHECK(parse_rounding("ceil") == Rounding::kCeil);
  CHECK(to_string(Rounding::kRound) == "round");
  CHECK_THROWS_AS(parse_rounding("up"), ParseError);
  CHECK(uniform_times(4).size() == 5);
  CHECK(uniform_times(4)[3] == Rational(3, 4));
}

TEST_CASE("warm start does not change frames") {
  Rng rng(19);
  for (const char* desc : {"rect:15x15", "rect:16x9", "disk:17", "holed:15x15:5x5"}) {
    auto d = make_domain(desc);
    Configuration id = identity(d);
    for (const char* h : {"1a", "2a", "3b", "4a"}) {
      Potential p = build_potential(basis(h), d);
      for (Rounding r : {Rounding::kFloor, Rounding::kCeil, Rounding::kRound}) {
        Rational t = random_time(rng, 37);
        FrameOptions fast{r, true};
        CHECK(frame(id, p, t, fast) == plain_frame(id, p, t, r));
        Odometer lb = odometer_lower_bound(p, t);
        Configuration c = id;
        c.add(drops_at(p, t, r));
        Relaxation full = relax(c);
        for (std::size_t v = 0; v < d->size(); ++v)
          CHECK(lb[static_cast<VertexId>(v)] <= full.odometer[static_cast<VertexId>(v)]);
      }
    }
  }
}

TEST_CASE("incremental trajectory matches direct frames") {
  auto d = make_domain("rect:21x21");
  Configuration id = identity(d);
  Potential p = build_potential(basis("2a"), d);
  auto times = uniform_times(12, Rational(3, 2));
  for (Rounding r : {Rounding::kFloor, Rounding::kCeil}) {
    Trajectory tr = trajectory(id, p, times, r);
    REQUIRE(tr.frames.size() == times.size());
    for (std::size_t k = 0; k < times.size(); k += 3) CHECK(tr.frames[k].second == plain_frame(id, p, times[k], r));
    auto par = frames_parallel(id, p, times, r, 3, Rational(1, 5));
    REQUIRE(par.size() == times.size());
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(par[k] == tr.frames[k].second);
  }
  CHECK_THROWS_AS(trajectory(id, p, {Rational(1), Rational(1, 2)}), Error);
}

TEST_CASE("sparse high-order frames match plain frames") {
  auto d = make_domain("rect:25x25");
  Configuration id = identity(d);
  Potential p = build_potential(basis("4a"), d);
  std::vector<Rational> times{Rational(1, 7), Rational(2, 5), Rational(5, 6)};
  auto par = frames_parallel(id, p, times, Rounding::kFloor, 2, Rational(1, 50));
  REQUIRE(par.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(par[k] == plain_frame(id, p, times[k], Rounding::kFloor));
}

TEST_CASE("identity is periodic and frames shift in time") {
  for (const char* desc : {"rect:13x13", "rect:10x7", "disk:15"}) {
    auto d = make_domain(desc);
    Configuration id = identity(d);
    for (const char* h : {"1a", "2b", "3a", "5a"}) {
      Potential p = build_potential(basis(h), d);
      PeriodicityReport rep = verify_periodicity(id, p);
      CHECK(rep.periodic);
      CHECK(rep.mismatches == 0);
      PeriodicityReport plain = verify_periodicity(id, p, false);
      CHECK(plain.periodic);
      CHECK(plain.topplings == rep.topplings);
      Rational t(2, 7);
      CHECK(frame(frame(id, p, Rational(1)), p, t) == frame(id, p, t));
    }
  }
  auto d = make_domain("rect:9x9");
  Potential p = build_potential(basis("1a"), d);
  CHECK_FALSE(verify_periodicity(Configuration(d), p).periodic);
}

TEST_CASE("grain schedule enumerates every drop once") {
  auto d = make_domain("rect:7x5");
  Potential p = build_potential(basis("3a"), d);
  for (Rounding r : {Rounding::kFloor, Rounding::kCeil, Rounding::kRound}) {
    GrainSchedule s(p, r);
    std::vector<std::int64_t> got(d->size(), 0);
    GrainSchedule::Batch b;
    Rational last(-1);
    // With ceil the batch at time 1 belongs to the interval after it.
    while (s.next(b) && (r == Rounding::kCeil ? b.time < Rational(1) : b.time <= Rational(1))) {
      CHECK(last < b.time);
      last = b.time;
      for (VertexId v : b.vertices) ++got[static_cast<std::size_t>(v)];
      // For floor and round the cumulative count is the drop field at that time.
      if (r != Rounding::kCeil) CHECK(got == drops_at(p, b.time, r));
      else CHECK(got == drops_at(p, b.time + Rational(1, 1000000), r));
    }
    CHECK(got == drops_at(p, Rational(1), r));
  }
}

TEST_CASE("near-linearity of the odometer") {
  auto d = make_domain("rect:25x25");
  Configuration id = identity(d);
  Potential p = build_potential(basis("2a"), d);
  for (Rational t : {Rational(1, 4), Rational(1, 2), Rational(5, 6)}) {
    Configuration c = id;
    c.add(drops_at(p, t, Rounding::kFloor));
    Relaxation r = relax(c);
    for (std::size_t v = 0; v < d->size(); ++v) {
      double expect = t.to_double() * static_cast<double>(p.field[v]);
      // |u - t h~| <= 4f with 4f <= 2 * 13^2 on this square.
      CHECK(std::abs(static_cast<double>(r.odometer[static_cast<VertexId>(v)]) - expect) <= 2.0 * 13 * 13 + 1);
    }
  }
}

TEST_CASE("directional drops differ only where two sides meet") {
  auto d = make_domain("rect:9x9");
  for (const char* h : {"2a", "3a", "4b"}) {
    Potential p = build_potential(basis(h), d);
    DirectionalPotentials parts = directional_potentials(basis(h), d);
    CHECK(drops_at(parts, Rational(1), Rounding::kFloor) == p.x);
    for (std::int64_t k = 1; k < 30; ++k) {
      Rational t(k, 30);
      auto split = drops_at(parts, t, Rounding::kFloor);
      auto whole = drops_at(p, t, Rounding::kFloor);
      for (std::size_t v = 0; v < whole.size(); ++v) {
        int sides = 4 - d->degree(static_cast<VertexId>(v));
        CHECK(split[v] <= whole[v]);
        CHECK(split[v] >= whole[v] - 1);
        if (sides < 2) CHECK(split[v] == whole[v]);
      }
    }
    Configuration id = identity(d);
    Configuration c = id;
    c.add(drops_at(parts, Rational(1), Rounding::kFloor));
    CHECK(relax(c).stable == id);
  }
}
