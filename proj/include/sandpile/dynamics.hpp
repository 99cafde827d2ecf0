#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

enum class Rounding { kFloor, kCeil, kRound };

Rounding parse_rounding(std::string_view text);
std::string to_string(Rounding r);

// round_mode(t * x) for one vertex.
std::int64_t rounded_drops(const Rational& t, std::int64_t x, Rounding r);
// Per-vertex grains added by time t.
std::vector<std::int64_t> drops_at(const Potential& p, const Rational& t, Rounding r);
// Variant with one schedule per side of the domain: the sum of the rounded
// drops of the four directional parts. Equals the plain drops at integer t.
std::vector<std::int64_t> drops_at(const DirectionalPotentials& p, const Rational& t, Rounding r);

struct FrameOptions {
  Rounding rounding = Rounding::kFloor;
  // Start the relaxation from a provable lower bound of the odometer. Does not
  // change the result, only the work.
  bool warm_start = true;
  std::uint64_t max_topplings = 1'000'000'000'000ull;
};

// relax(start + round_mode(t * X)).
Configuration frame(const Configuration& start, const Potential& p, const Rational& t, const FrameOptions& options = {});

// Odometer lower bound used by the warm start: max(0, floor(t h~ - 4 f)) where
// f >= 0 on the domain and Laplacian(f) <= -1.
Odometer odometer_lower_bound(const Potential& p, const Rational& t);

struct Trajectory {
  Configuration start;
  Rounding rounding = Rounding::kFloor;
  std::vector<std::pair<Rational, Configuration>> frames;
};

// Frames at ascending times, each obtained from the previous one by adding
// the grain increments and relaxing once.
Trajectory trajectory(const Configuration& start, const Potential& p, const std::vector<Rational>& times,
                      Rounding rounding = Rounding::kFloor);

// Same frames as trajectory(), computed on `jobs` threads by the cheaper of
// two routes, judged from the expected toppling counts: checkpoints every
// `checkpoint` periods built sequentially, each frame then relaxed from the
// closest checkpoint at or before its time; or every frame relaxed on its own
// from the warm start (see frame).
std::vector<Configuration> frames_parallel(const Configuration& start, const Potential& p,
                                           const std::vector<Rational>& times, Rounding rounding, unsigned jobs,
                                           const Rational& checkpoint = Rational(1, 64));
// Streaming form: sink(index, frame) is called once per time, in completion
// order, never concurrently.
using FrameSink = std::function<void(std::size_t, const Configuration&)>;
void frames_parallel(const Configuration& start, const Potential& p, const std::vector<Rational>& times,
                     Rounding rounding, unsigned jobs, const Rational& checkpoint, const FrameSink& sink);

// Uniform schedule k/F for k = 0..F (both ends included).
std::vector<Rational> uniform_times(std::int64_t frames_per_period, const Rational& periods = Rational(1));

struct PeriodicityReport {
  bool periodic = false;
  std::size_t mismatches = 0;  // vertices where relax(start + X) differs from start
  std::uint64_t topplings = 0;
  std::string describe() const;
};

// Adds one full period of drops and relaxes. The warm start (see frame) gives
// the same result; turn it off to relax from a zero odometer.
PeriodicityReport verify_periodicity(const Configuration& start, const Potential& p, bool warm_start = true);

// Enumerates the times at which round_mode(t * X) changes, in increasing
// order, each with the vertices that gain one grain. With kFloor and kRound
// the state after a batch is the frame at exactly `time`; with kCeil it is
// the frame on the half-open interval (time, next batch time].
class GrainSchedule {
 public:
  GrainSchedule(const Potential& p, Rounding rounding, const Rational& from = Rational(0));

  struct Batch {
    Rational time;
    std::vector<VertexId> vertices;
  };
  bool next(Batch& out);
  // Time of the next batch; only valid while events remain.
  Rational peek_time() const;
  bool done() const { return heap_.empty(); }

 private:
  struct Event {
    std::int64_t num;
    std::int64_t den;
    VertexId v;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return static_cast<__int128>(a.num) * b.den > static_cast<__int128>(b.num) * a.den;
    }
  };
  Event event_for(VertexId v, std::int64_t grain) const;

  const Potential* p_;
  Rounding rounding_;
  std::vector<std::int64_t> next_grain_;
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
};

}  // namespace sandpile
