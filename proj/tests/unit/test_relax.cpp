#include <doctest.h>

#include <sstream>

#include "sandpile/error.hpp"
#include "sandpile/io.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/rng.hpp"

using namespace sandpile;

namespace {

Configuration random_config(DomainPtr d, Rng& rng, std::int64_t max_count) {
  Configuration c(d);
  for (std::size_t v = 0; v < d->size(); ++v)
    c[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_count + 1)));
  return c;
}

// Toppling one grain at a time on plain vectors, lowest unstable index first.
std::pair<std::vector<std::int64_t>, std::uint64_t> brute_relax(const Domain& d, std::vector<std::int64_t> c) {
  std::uint64_t topplings = 0;
  for (bool again = true; again;) {
    again = false;
    for (std::size_t v = 0; v < c.size(); ++v) {
      if (c[v] < 4) continue;
      c[v] -= 4;
      for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
        if (u != kNoVertex) c[static_cast<std::size_t>(u)] += 1;
      ++topplings;
      again = true;
      break;
    }
  }
  return {c, topplings};
}

}  // namespace

TEST_CASE("tiny relaxation examples") {
  auto one = make_domain("rect:1x1");
  Relaxation r = relax(Configuration(one, {4}));
  CHECK(r.stable[0] == 0);
  CHECK(r.odometer[0] == 1);

  auto two = make_domain("rect:2x1");
  r = relax(Configuration(two, {6, 6}));
  CHECK(r.stable.counts()[0] == 3);
  CHECK(r.stable.counts()[1] == 3);
  CHECK(r.odometer[0] == 1);
  CHECK(r.odometer[1] == 1);

  Configuration s(two, {3, 2});
  r = relax(s);
  CHECK(r.stable == s);
  CHECK(r.odometer.is_zero());
}

TEST_CASE("drop_and_relax on tiny domains matches brute force") {
  auto one = make_domain("rect:1x1");
  auto [c1, rec1] = drop_and_relax(Configuration(one, {3}), 0);
  CHECK(c1[0] == 0);
  CHECK(rec1.size == 1);

  auto two = make_domain("rect:2x1");
  for (std::int64_t a = 0; a < 4; ++a)
    for (std::int64_t b = 0; b < 4; ++b)
      for (VertexId v : {0, 1}) {
        Configuration c(two, {a, b});
        auto [out, rec] = drop_and_relax(c, v);
        std::vector<std::int64_t> raw{a, b};
        raw[static_cast<std::size_t>(v)] += 1;
        auto [expect, topplings] = brute_relax(*two, raw);
        CHECK(std::vector<std::int64_t>(out.counts().begin(), out.counts().end()) == expect);
        CHECK(rec.size == topplings);
      }
  // (3,3) + grain on the left: left topples to (0,4), right topples to (1,0).
  auto [out, rec] = drop_and_relax(Configuration(two, {3, 3}), 0);
  CHECK(out.counts()[0] == 1);
  CHECK(out.counts()[1] == 0);
  CHECK(rec.size == 2);

  CHECK_THROWS_AS(drop_and_relax(Configuration(two, {0, 0}), 5), Error);
  CHECK_THROWS_AS(drop_and_relax(Configuration(two, {0, 0}), 0, 0), Error);
}

TEST_CASE("odometer identity and mass balance") {
  Rng rng(7);
  auto d = make_domain("rect:17x17");
  const auto deficit = boundary_deficit(*d);
  for (int trial = 0; trial < 100; ++trial) {
    Configuration c = random_config(d, rng, 40);
    Relaxation r = relax(c);
    CHECK(r.stable.is_stable());
    auto lap = laplacian(*d, r.odometer.values());
    std::int64_t lost = 0;
    for (std::size_t v = 0; v < d->size(); ++v) {
      CHECK(r.stable.counts()[v] == c.counts()[v] + lap[v]);
      lost += r.odometer.values()[v] * deficit[v];
    }
    CHECK(c.total() - r.stable.total() == lost);
  }
}

TEST_CASE("abelian property across toppling orders") {
  Rng rng(11);
  auto d = make_domain("rect:9x9");
  for (int trial = 0; trial < 30; ++trial) {
    Configuration c = random_config(d, rng, 12);
    Relaxation base = relax(c);
    for (ToppleOrder o : {ToppleOrder::kFifo, ToppleOrder::kLifo, ToppleOrder::kRandomPick, ToppleOrder::kSweep}) {
      RelaxOptions opt;
      opt.order = o;
      opt.seed = static_cast<std::uint64_t>(trial);
      Relaxation other = relax(c, opt);
      CHECK(other.stable == base.stable);
      CHECK(other.odometer == base.odometer);
    }
  }
}

TEST_CASE("drops commute") {
  Rng rng(3);
  auto d = make_domain("rect:9x9");
  for (int trial = 0; trial < 30; ++trial) {
    Configuration c = relax(random_config(d, rng, 3)).stable;
    auto u = static_cast<VertexId>(rng.below(d->size()));
    auto v = static_cast<VertexId>(rng.below(d->size()));
    auto a = drop_and_relax(drop_and_relax(c, u).first, v).first;
    auto b = drop_and_relax(drop_and_relax(c, v).first, u).first;
    CHECK(a == b);
  }
}

TEST_CASE("warm start from a lower bound") {
  Rng rng(5);
  auto d = make_domain("rect:11x11");
  for (int trial = 0; trial < 20; ++trial) {
    Configuration c = random_config(d, rng, 60);
    Relaxation full = relax(c);
    Odometer lb(d);
    for (std::size_t v = 0; v < d->size(); ++v)
      lb[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(full.odometer[static_cast<VertexId>(v)] + 1)));
    Relaxation warm = relax_from(c, lb);
    CHECK(warm.stable == full.stable);
    CHECK(warm.odometer == full.odometer);
  }
}

TEST_CASE("budget and overflow are reported") {
  auto d = make_domain("rect:5x5");
  RelaxOptions opt;
  opt.max_topplings = 10;
  CHECK_THROWS_AS(relax(Configuration::constant(d, 100), opt), BudgetError);
  auto two = make_domain("rect:2x1");
  Configuration big(two, {INT64_MAX, INT64_MAX});
  CHECK_THROWS_AS(relax(big), OverflowError);
}

TEST_CASE("SPILE and PGM round trips") {
  auto d = make_domain("holed:6x5:2x1");
  Rng rng(1);
  Configuration c = random_config(d, rng, 3);
  std::stringstream ss;
  write_spile(ss, c);
  CHECK(read_spile(ss, d) == c);
  std::stringstream again;
  write_spile(again, c);
  Configuration free_read = read_spile(again);
  CHECK(free_read.domain() == *d);
  auto r = make_domain("rect:4x3");
  Configuration g = random_config(r, rng, 3);
  for (bool binary : {true, false}) {
    std::stringstream pg;
    write_pgm(pg, g, binary);
    CHECK(read_pgm(pg, r) == g);
  }
}
