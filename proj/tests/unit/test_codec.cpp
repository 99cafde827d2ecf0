#include <doctest.h>

#include "sandpile/codec.hpp"
#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/group.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/rng.hpp"

using namespace sandpile;

namespace {

Bitmap random_bitmap(int w, int h, Rng& rng) {
  Bitmap b{w, h, std::vector<bool>(static_cast<std::size_t>(w) * h)};
  for (std::size_t k = 0; k < b.bits.size(); ++k) b.bits[k] = rng.below(2) == 1;
  return b;
}

Bitmap disc_bitmap(int n) {
  Bitmap b{n, n, std::vector<bool>(static_cast<std::size_t>(n) * n)};
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) b.bits[static_cast<std::size_t>(y) * n + x] = (x - n / 2) * (x - n / 2) + (y - n / 3) * (y - n / 3) < n * n / 9;
  return b;
}

}  // namespace

TEST_CASE("encoding is recurrent and invertible") {
  Rng rng(2);
  auto d = make_domain("rect:12x9");
  Bitmap b = random_bitmap(12, 9, rng);
  Configuration c = encode(b, d);
  CHECK(is_recurrent(c));
  CHECK(payload_of(c).bits == b.bits);
  Detector det;
  CHECK(det.score(c) == doctest::Approx(1.0));
  CHECK(det.score(Configuration(d)) == doctest::Approx(-1.0));
  CHECK(pixel_accuracy(b, payload_of(c), *d) == 1.0);
  CHECK_THROWS_AS(encode(random_bitmap(3, 3, rng), d), Error);
}

TEST_CASE("deterministic scramble and decode") {
  auto d = make_domain("rect:33x33");
  Bitmap b = disc_bitmap(33);
  Configuration p = encode(b, d);
  for (const char* h : {"2a", "3a"}) {
    Potential pot = build_potential(basis(h), d);
    for (Rational t : {Rational(1, 3), Rational(7, 10)}) {
      Configuration s = scramble(p, pot, t, CodecMode::deterministic());
      CHECK(Detector{}.score(s) < 0.95);
      DecodeOptions opt;
      opt.time_grid = 30;
      DecodeResult r = decode(s, pot, CodecMode::deterministic(), opt);
      CHECK(r.score == doctest::Approx(1.0));
      CHECK(r.bits.bits == b.bits);
      CHECK(r.time >= Rational(1) - t);
      CHECK(r.candidates >= 1);
    }
  }
}

TEST_CASE("stochastic scramble and decode mechanics") {
  auto d = make_domain("rect:31x31");
  Bitmap b = disc_bitmap(31);
  Configuration p = encode(b, d);
  Potential pot = build_potential(basis("3a"), d);
  const Rational t = Rational::parse("0.075");
  Configuration s = scramble(p, pot, t, CodecMode::chain(5));
  CHECK(s == scramble(p, pot, t, CodecMode::chain(5)));
  CHECK_FALSE(s == scramble(p, pot, t, CodecMode::chain(6)));
  CHECK(Detector{}.score(s) < 0.95);
  CHECK(scramble(p, pot, Rational(0), CodecMode::chain(5)) == p);
  // An unscrambled payload is read at time zero.
  DecodeResult r = decode(p, pot, CodecMode::chain(6));
  CHECK(r.time == Rational(0));
  CHECK(r.bits.bits == b.bits);
  DecodeOptions quick;
  quick.max_periods = Rational(1, 20);
  quick.stride = 1000;
  CHECK_THROWS_WITH_AS(decode(s, pot, CodecMode::chain(6), quick), doctest::Contains("payload not detected"), Error);
}

TEST_CASE("undetectable payloads are reported") {
  auto d = make_domain("rect:9x9");
  Configuration empty(d);
  Potential pot = build_potential(basis("1a"), d);
  DecodeOptions opt;
  opt.max_periods = Rational(1, 10);
  CHECK_THROWS_WITH_AS(decode(empty, pot, CodecMode::deterministic(), opt), doctest::Contains("payload not detected"), Error);
}

TEST_CASE("perfect runs are ambiguous without a time prior") {
  // Every state of the perfect run scrambles back to the input at its own time.
  auto d = make_domain("rect:33x33");
  Configuration p = encode(disc_bitmap(33), d);
  Potential pot = build_potential(basis("2a"), d);
  Configuration s = scramble(p, pot, Rational(1, 3), CodecMode::deterministic());
  Relaxer r(d);
  r.load(s);
  GrainSchedule schedule(pot, Rounding::kCeil);
  GrainSchedule::Batch batch;
  int perfect = 0;
  while (schedule.next(batch) && batch.time < Rational(1)) {
    for (VertexId v : batch.vertices) r.add(v, 1);
    r.stabilize();
    Configuration q = r.snapshot();
    if (Detector{}.score(q) < 1.0) {
      if (perfect) break;
      continue;
    }
    ++perfect;
    CHECK(frame(q, pot, Rational(1) - schedule.peek_time()) == s);
  }
  CHECK(perfect > 1);
}
