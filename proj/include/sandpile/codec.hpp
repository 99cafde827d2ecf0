#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "sandpile/configuration.hpp"
#include "sandpile/io.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

// counts(v) = 2 + bit(v). The bitmap must match the domain's bounding box.
Configuration encode(const Bitmap& bits, DomainPtr domain);
// counts - 2 clipped to {0, 1}; masked-out cells read as 0.
Bitmap payload_of(const Configuration& c);

// Either the deterministic schedule or the stochastic chain with a seed.
struct CodecMode {
  bool stochastic = false;
  std::uint64_t seed = 0;
  static CodecMode deterministic() { return {}; }
  static CodecMode chain(std::uint64_t seed) { return {true, seed}; }
};

// frame(p, pot, t) or floor(t |X|) steps of the chain.
Configuration scramble(const Configuration& p, const Potential& pot, const Rational& t, const CodecMode& mode);

// Additive legibility score: the mean over vertices of weight[symbol], with
// symbols 0..3 and 4 for anything else. The default rewards 2 and 3 and
// penalizes 0 and 1, so an encoded payload scores exactly 1.
struct Detector {
  std::array<double, 5> weight{-1.0, -1.0, 1.0, 1.0, -1.0};
  double threshold = 0.95;
  double score(const Configuration& c) const;
};

struct DecodeOptions {
  Detector detector;
  Rational max_periods = Rational(2);
  // Stochastic mode: drops between scored states; 0 means max(1, |X| / 1024).
  std::uint64_t stride = 0;
  // Deterministic mode: scramble times are known multiples of 1 / time_grid
  // (0: unknown).
  std::int64_t time_grid = 0;
};

struct DecodeResult {
  Bitmap bits;
  Rational time;  // dynamics time of the chosen frame, relative to the input
  double score = 0;
  std::uint64_t events = 0;  // grain batches (deterministic) or drops (stochastic) processed
  std::size_t candidates = 0;  // deterministic: length of the perfect run the result was taken from
};

// Continues the dynamics from c and returns the payload of the best-scoring
// state. The deterministic scan visits every state of the rounded-up
// schedule relax(c + ceil(s X)), which contains the exact payload at
// s = 1 - t for a frame scrambled to time t. It stops after the first run of
// perfect scores. Every state of that run scrambles back to c at its own
// time, so the choice is a prior: the state held for the longest time
// interval, restricted to intervals that contain a grid time when
// options.time_grid is set. Throws "payload not detected" when nothing
// reaches the threshold.
DecodeResult decode(const Configuration& c, const Potential& pot, const CodecMode& mode,
                    const DecodeOptions& options = {});

// Fraction of in-domain pixels on which two payloads agree.
double pixel_accuracy(const Bitmap& a, const Bitmap& b, const Domain& d);

}  // namespace sandpile
