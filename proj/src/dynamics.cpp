#include "sandpile/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "sandpile/error.hpp"
#include "sandpile/relax.hpp"

namespace sandpile {
namespace {

void require_start(const Configuration& start, const Potential& p, const char* what) {
  require_same_domain(start.domain(), *p.domain, what);
  if (!start.is_stable() || !start.is_non_negative())
    throw Error(std::string(what) + ": start configuration must be stable and non-negative");
}

}  // namespace

Rounding parse_rounding(std::string_view text) {
  if (text == "floor") return Rounding::kFloor;
  if (text == "ceil") return Rounding::kCeil;
  if (text == "round") return Rounding::kRound;
  throw ParseError("unknown rounding '" + std::string(text) + "' (floor, ceil, round)");
}

std::string to_string(Rounding r) {
  switch (r) {
    case Rounding::kFloor:
      return "floor";
    case Rounding::kCeil:
      return "ceil";
    case Rounding::kRound:
      return "round";
  }
  return "?";
}

std::int64_t rounded_drops(const Rational& t, std::int64_t x, Rounding r) {
  switch (r) {
    case Rounding::kFloor:
      return floor_mul(t, x);
    case Rounding::kCeil:
      return ceil_mul(t, x);
    case Rounding::kRound:
      return round_mul(t, x);
  }
  return 0;
}

std::vector<std::int64_t> drops_at(const Potential& p, const Rational& t, Rounding r) {
  std::vector<std::int64_t> d(p.x.size());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = rounded_drops(t, p.x[v], r);
  return d;
}

std::vector<std::int64_t> drops_at(const DirectionalPotentials& p, const Rational& t, Rounding r) {
  std::vector<std::int64_t> d(p.north.x.size(), 0);
  for (const Potential* part : {&p.north, &p.east, &p.south, &p.west})
    for (std::size_t v = 0; v < d.size(); ++v) d[v] += rounded_drops(t, part->x[v], r);
  return d;
}

Odometer odometer_lower_bound(const Potential& p, const Rational& t) {
  const Domain& d = *p.domain;
  std::int64_t a = 0, b = 0;
  for (std::size_t v = 0; v < d.size(); ++v) {
    LatticePoint q = d.coords(static_cast<VertexId>(v));
    a = std::max(a, std::abs(q.i) + 1);
    b = std::max(b, std::abs(q.j) + 1);
  }
  Odometer lb(p.domain);
  for (std::size_t v = 0; v < d.size(); ++v) {
    LatticePoint q = d.coords(static_cast<VertexId>(v));
    // 4 f = 2 min(a^2 - i^2, b^2 - j^2)
    std::int64_t four_f = 2 * std::min(a * a - q.i * q.i, b * b - q.j * q.j);
    std::int64_t u = floor_mul(t, p.field[v]) - four_f;
    lb[static_cast<VertexId>(v)] = std::max<std::int64_t>(0, u);
  }
  return lb;
}

Configuration frame(const Configuration& start, const Potential& p, const Rational& t, const FrameOptions& options) {
  if (t < Rational(0)) throw Error("frame: negative time " + t.str());
  require_start(start, p, "frame");
  Configuration input = start;
  input.add(drops_at(p, t, options.rounding));
  if (!options.warm_start) {
    RelaxOptions ro;
    ro.max_topplings = options.max_topplings;
    return relax(input, ro).stable;
  }
  return relax_from(input, odometer_lower_bound(p, t), options.max_topplings).stable;
}

Trajectory trajectory(const Configuration& start, const Potential& p, const std::vector<Rational>& times,
                      Rounding rounding) {
  require_start(start, p, "trajectory");
  if (!std::is_sorted(times.begin(), times.end())) throw Error("trajectory: times must be sorted ascending");
  if (!times.empty() && times.front() < Rational(0)) throw Error("trajectory: negative time");
  Trajectory traj{start, rounding, {}};
  Relaxer r(start.domain_ptr());
  r.load(start);
  std::vector<std::int64_t> have(p.x.size(), 0);
  std::vector<std::int64_t> inc(p.x.size());
  for (const Rational& t : times) {
    for (std::size_t v = 0; v < inc.size(); ++v) {
      std::int64_t want = rounded_drops(t, p.x[v], rounding);
      inc[v] = want - have[v];
      have[v] = want;
    }
    r.add(inc);
    r.stabilize();
    traj.frames.emplace_back(t, r.snapshot());
  }
  return traj;
}

namespace {

template <class Work>
void run_pool(std::size_t count, unsigned jobs, const Work& work) {
  std::atomic<std::size_t> next{0};
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      try {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) work(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Topplings to expect from each route. The odometer of relax(start +
// floor(t X)) is about t h~; the warm start skips its lower bound.
struct RouteCost {
  double checkpoints = 0;
  double direct = 0;
};

RouteCost route_cost(const Potential& p, const std::vector<Rational>& times, const Rational& checkpoint,
                     unsigned jobs) {
  double sum_h = 0;
  for (std::int64_t v : p.field) sum_h += static_cast<double>(v);
  RouteCost c;
  double incremental = 0;
  for (const Rational& t : times) {
    const Rational tc = Rational((t / checkpoint).floor()) * checkpoint;
    incremental += (t - tc).to_double() * sum_h;
    double bound = 0;
    Odometer lb = odometer_lower_bound(p, t);
    for (std::size_t v = 0; v < p.x.size(); ++v) bound += static_cast<double>(lb[static_cast<VertexId>(v)]);
    c.direct += std::max(0.0, t.to_double() * sum_h - bound);
  }
  const double last = std::max_element(times.begin(), times.end())->to_double();
  c.checkpoints = last * sum_h + incremental / jobs;
  c.direct /= jobs;
  return c;
}

}  // namespace

void frames_parallel(const Configuration& start, const Potential& p, const std::vector<Rational>& times,
                     Rounding rounding, unsigned jobs, const Rational& checkpoint, const FrameSink& sink) {
  require_start(start, p, "frames_parallel");
  if (checkpoint <= Rational(0)) throw Error("checkpoint spacing must be positive");
  if (times.empty()) return;
  for (const Rational& t : times)
    if (t < Rational(0)) throw Error("frames_parallel: negative time");
  std::mutex sink_mutex;
  auto deliver = [&](std::size_t k, const Configuration& f) {
    std::lock_guard lock(sink_mutex);
    sink(k, f);
  };

  // Few frames of a high-order field: relax each one directly from its warm
  // start instead of walking the whole trajectory.
  const RouteCost cost = route_cost(p, times, checkpoint, jobs);
  if (cost.direct < cost.checkpoints) {
    FrameOptions fo;
    fo.rounding = rounding;
    run_pool(times.size(), jobs, [&](std::size_t k) { deliver(k, frame(start, p, times[k], fo)); });
    return;
  }

  // Sequential checkpoints at k * spacing.
  const Rational last = *std::max_element(times.begin(), times.end());
  std::vector<Rational> cp_times;
  for (std::int64_t k = 0; Rational(k) * checkpoint <= last; ++k) cp_times.push_back(Rational(k) * checkpoint);
  Trajectory cps = trajectory(start, p, cp_times, rounding);
  run_pool(times.size(), jobs, [&](std::size_t k) {
    const Rational& t = times[k];
    auto idx = static_cast<std::size_t>((t / checkpoint).floor());
    idx = std::min(idx, cps.frames.size() - 1);
    const auto& [tc, base] = cps.frames[idx];
    Configuration input = base;
    for (std::size_t v = 0; v < p.x.size(); ++v)
      input[static_cast<VertexId>(v)] += rounded_drops(t, p.x[v], rounding) - rounded_drops(tc, p.x[v], rounding);
    deliver(k, relax(input).stable);
  });
}

std::vector<Configuration> frames_parallel(const Configuration& start, const Potential& p,
                                           const std::vector<Rational>& times, Rounding rounding, unsigned jobs,
                                           const Rational& checkpoint) {
  std::vector<Configuration> out(times.size(), start);
  frames_parallel(start, p, times, rounding, jobs, checkpoint,
                  [&](std::size_t k, const Configuration& f) { out[k] = f; });
  return out;
}

std::vector<Rational> uniform_times(std::int64_t frames_per_period, const Rational& periods) {
  if (frames_per_period < 1) throw Error("frames per period must be >= 1");
  std::vector<Rational> t;
  const std::int64_t count = floor_mul(periods, frames_per_period);
  for (std::int64_t k = 0; k <= count; ++k) t.emplace_back(k, frames_per_period);
  return t;
}

std::string PeriodicityReport::describe() const {
  if (periodic) return "periodic (" + std::to_string(topplings) + " topplings per period)";
  return "NOT periodic: " + std::to_string(mismatches) + " vertices differ after one period";
}

PeriodicityReport verify_periodicity(const Configuration& start, const Potential& p, bool warm_start) {
  require_start(start, p, "verify_periodicity");
  Configuration input = start;
  input.add(p.x);
  Relaxation r = warm_start ? relax_from(input, odometer_lower_bound(p, Rational(1))) : relax(input);
  PeriodicityReport rep;
  rep.topplings = r.odometer.total();
  for (std::size_t v = 0; v < start.size(); ++v)
    if (r.stable[static_cast<VertexId>(v)] != start[static_cast<VertexId>(v)]) ++rep.mismatches;
  rep.periodic = rep.mismatches == 0;
  return rep;
}

GrainSchedule::GrainSchedule(const Potential& p, Rounding rounding, const Rational& from)
    : p_(&p), rounding_(rounding), next_grain_(p.x.size(), 0) {
  if (from < Rational(0)) throw Error("GrainSchedule: negative start time");
  for (std::size_t v = 0; v < p.x.size(); ++v) {
    if (p.x[v] <= 0) continue;
    next_grain_[v] = rounded_drops(from, p.x[v], rounding) + 1;
    heap_.push(event_for(static_cast<VertexId>(v), next_grain_[v]));
  }
}

GrainSchedule::Event GrainSchedule::event_for(VertexId v, std::int64_t grain) const {
  const std::int64_t x = p_->x[static_cast<std::size_t>(v)];
  switch (rounding_) {
    case Rounding::kFloor:
      return {grain, x, v};
    case Rounding::kCeil:
      return {grain - 1, x, v};
    case Rounding::kRound:
      return {2 * grain - 1, 2 * x, v};
  }
  return {grain, x, v};
}

Rational GrainSchedule::peek_time() const {
  if (heap_.empty()) throw Error("GrainSchedule: no events");
  return Rational(heap_.top().num, heap_.top().den);
}

bool GrainSchedule::next(Batch& out) {
  out.vertices.clear();
  if (heap_.empty()) return false;
  const Event first = heap_.top();
  out.time = Rational(first.num, first.den);
  while (!heap_.empty()) {
    const Event e = heap_.top();
    if (static_cast<__int128>(e.num) * first.den != static_cast<__int128>(first.num) * e.den) break;
    heap_.pop();
    out.vertices.push_back(e.v);
    auto sv = static_cast<std::size_t>(e.v);
    heap_.push(event_for(e.v, ++next_grain_[sv]));
  }
  return true;
}

}  // namespace sandpile
