#include "sandpile/verify.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "sandpile/codec.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/extended.hpp"
#include "sandpile/group.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/render.hpp"
#include "sandpile/stochastic.hpp"

namespace sandpile {
namespace {

using Check = std::function<std::string(Rng&)>;

void expect(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

Configuration random_counts(DomainPtr d, Rng& rng, std::uint64_t bound) {
  Configuration c(d);
  for (std::size_t v = 0; v < d->size(); ++v) c[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(bound));
  return c;
}

std::string group_orders(Rng&) {
  std::ostringstream out;
  for (const char* desc : {"rect:1x1", "rect:2x1", "rect:2x2", "rect:3x2"}) {
    auto d = make_domain(desc);
    BigInt det = group_order(*d);
    std::size_t n = recurrent_configurations(d).size();
    expect(det == BigInt(n), std::string(desc) + ": determinant " + det.str() + " vs " + std::to_string(n) + " recurrent");
    out << desc << "=" << n << " ";
  }
  return out.str();
}

std::string identities(Rng&) {
  for (const char* desc : {"rect:5x5", "rect:6x3", "disk:9", "holed:7x7:3x1", "cshape:9x9:2"}) {
    auto d = make_domain(desc);
    Configuration id = identity(d);
    expect(is_recurrent(id), std::string(desc) + ": identity not recurrent");
    expect(group_add(id, id) == id, std::string(desc) + ": identity not idempotent");
  }
  return "5 domains";
}

std::string relaxation(Rng& rng) {
  auto d = make_domain("rect:6x5");
  for (int trial = 0; trial < 50; ++trial) {
    Configuration c = random_counts(d, rng, 20);
    Relaxation base = relax(c);
    auto lap = laplacian(*d, base.odometer.values());
    for (std::size_t v = 0; v < d->size(); ++v)
      expect(base.stable.counts()[v] == c.counts()[v] + lap[v], "odometer identity");
    for (ToppleOrder o : {ToppleOrder::kFifo, ToppleOrder::kLifo, ToppleOrder::kRandomPick, ToppleOrder::kSweep}) {
      RelaxOptions opt;
      opt.order = o;
      opt.seed = rng.next();
      Relaxation other = relax(c, opt);
      expect(other.stable == base.stable && other.odometer == base.odometer, "toppling order changed the result");
    }
  }
  return "50 configurations, 5 orders";
}

std::string potentials(Rng&) {
  for (const char* desc : {"rect:3x3", "rect:7x4", "disk:11", "holed:9x9:3x3"}) {
    auto d = make_domain(desc);
    for (const auto& h : basis_ids()) {
      Potential p = build_potential(basis(h), d);
      auto lap = laplacian(*d, p.field);
      for (std::size_t v = 0; v < d->size(); ++v)
        expect(p.x[v] == -lap[v] && p.x[v] >= 0, std::string(desc) + " " + h + ": x != -Laplacian(h~)");
    }
  }
  return "4 domains x 10 harmonics";
}

std::string periodicity(Rng&) {
  for (const char* desc : {"rect:7x7", "rect:8x5", "disk:9"}) {
    auto d = make_domain(desc);
    Configuration id = identity(d);
    for (const auto& h : basis_ids()) {
      Potential p = build_potential(basis(h), d);
      expect(verify_periodicity(id, p).periodic, std::string(desc) + " " + h + ": not periodic");
      if (p.total < 1'000'000) expect(verify_periodicity(id, p, false).periodic, std::string(desc) + " " + h + ": plain relax");
    }
  }
  return "3 domains x 10 harmonics";
}

std::string warm_start(Rng& rng) {
  auto d = make_domain("rect:9x9");
  Configuration id = identity(d);
  for (const char* h : {"1a", "2a", "3a", "4b"}) {
    Potential p = build_potential(basis(h), d);
    for (Rounding r : {Rounding::kFloor, Rounding::kCeil, Rounding::kRound}) {
      Rational t(static_cast<std::int64_t>(rng.below(100)), 37);
      FrameOptions cold{r, false};
      FrameOptions warm{r, true};
      expect(frame(id, p, t, cold) == frame(id, p, t, warm), std::string("warm start differs for H") + h);
    }
  }
  return "12 frames";
}

std::string extended(Rng& rng) {
  auto d = make_domain("rect:2x1");
  Configuration id = identity(d);
  auto eid = ExtendedConfiguration::from_integer(id);
  for (const auto& h : basis_ids()) {
    RationalHarmonic rh;
    rh.parts.emplace_back(Rational(1), basis(h));
    expect(eta(rh, id) == eid, "eta of " + h + " is not the identity");
  }
  for (int trial = 0; trial < 30; ++trial) {
    RationalHarmonic a, b, ab;
    for (const char* h : {"1a", "1b", "2a"}) {
      Rational wa(static_cast<std::int64_t>(rng.below(21)) - 10, static_cast<std::int64_t>(rng.below(9)) + 1);
      Rational wb(static_cast<std::int64_t>(rng.below(21)) - 10, static_cast<std::int64_t>(rng.below(9)) + 1);
      a.parts.emplace_back(wa, basis(h));
      b.parts.emplace_back(wb, basis(h));
      ab.parts.emplace_back(wa + wb, basis(h));
    }
    expect(eta(ab, id) == extended_relax(eta(a, id) + eta(b, id)), "eta is not additive");
  }
  auto d7 = make_domain("rect:7x7");
  Configuration id7 = identity(d7);
  auto e7 = ExtendedConfiguration::from_integer(id7);
  for (const auto& h : basis_ids()) {
    Potential p = build_potential(basis(h), d7);
    expect(geodesic_frame(e7, to_rational(p), Rational(1)) == e7, "geodesic of " + h + " not closed");
  }
  return "kernel, 30 additive pairs, 10 closed geodesics";
}

std::string chain(Rng& rng) {
  auto d = make_domain("rect:2x1");
  Potential p = build_potential(basis("1a"), d);
  StochasticChain c(Configuration(d), p, rng.next());
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (int k = 0; k < 10000; ++k) {
    c.step();
    seen.emplace(c.state()[0], c.state()[1]);
  }
  // The first states may be transient; all 15 recurrent ones must appear.
  std::size_t recurrent = 0;
  for (const auto& [a, b] : seen) recurrent += is_recurrent(Configuration(d, {a, b}));
  expect(recurrent == 15, "chain visited " + std::to_string(recurrent) + " of 15 recurrent states");
  auto d5 = make_domain("rect:7x7");
  Configuration id = identity(d5);
  Potential p5 = build_potential(basis("2a"), d5);
  auto seed = rng.next();
  expect(run_stochastic(id, p5, Rational(2), seed).sizes == run_stochastic(id, p5, Rational(2), seed).sizes,
         "runs with one seed differ");
  return "ergodic on 1x2, reproducible";
}

std::string codec(Rng& rng) {
  // Small domains can pass through unrelated all-{2,3} frames before the payload.
  auto d = make_domain("rect:21x21");
  for (const char* h : {"2a", "3a"}) {
    Potential pot = build_potential(basis(h), d);
    for (int k = 0; k < 5; ++k) {
      Bitmap b{21, 21, std::vector<bool>(441)};
      for (std::size_t q = 0; q < b.bits.size(); ++q) b.bits[q] = rng.below(2) == 1;
      Rational t(static_cast<std::int64_t>(rng.below(99)) + 1, 100);
      Configuration s = scramble(encode(b, d), pot, t, CodecMode::deterministic());
      DecodeOptions opt;
      opt.time_grid = 100;
      expect(decode(s, pot, CodecMode::deterministic(), opt).bits.bits == b.bits,
             std::string("round trip failed for H") + h);
    }
  }
  return "10 round trips";
}

std::string rendering(Rng& rng) {
  auto d = make_domain("disk:9");
  Configuration c = random_counts(d, rng, 4);
  std::stringstream ss;
  write_ppm(ss, render(c));
  expect(configuration_from_image(read_ppm(ss), d) == c, "PPM round trip");
  return "PPM round trip";
}

}  // namespace

std::vector<CheckResult> verify_suite(std::uint64_t seed) {
  const std::vector<std::pair<const char*, Check>> checks = {
      {"group order", group_orders}, {"identity", identities},     {"relaxation", relaxation},
      {"potential", potentials},     {"periodicity", periodicity}, {"warm start", warm_start},
      {"extended", extended},        {"stochastic", chain},        {"codec", codec},
      {"render", rendering},
  };
  std::vector<CheckResult> out;
  Rng rng(seed);
  for (const auto& [name, fn] : checks) {
    CheckResult r{name, false, {}};
    try {
      r.detail = fn(rng);
      r.pass = true;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sandpile
