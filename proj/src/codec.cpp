#include "sandpile/codec.hpp"

#include <algorithm>

#include "sandpile/dynamics.hpp"
#include "sandpile/error.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/stochastic.hpp"

namespace sandpile {
namespace {

constexpr std::size_t kMaxRun = 256;

int symbol(std::int64_t c) { return (c >= 0 && c <= 3) ? static_cast<int>(c) : 4; }

// Symbol histogram kept in sync with a Relaxer through its touched list.
class Tally {
 public:
  explicit Tally(std::span<const std::int64_t> counts) : shadow_(counts.begin(), counts.end()) {
    for (std::int64_t c : shadow_) ++hist_[symbol(c)];
  }
  void sync(const Relaxer& r) {
    for (VertexId v : r.touched()) {
      auto sv = static_cast<std::size_t>(v);
      std::int64_t now = r.count(v);
      if (now == shadow_[sv]) continue;
      --hist_[symbol(shadow_[sv])];
      ++hist_[symbol(now)];
      shadow_[sv] = now;
    }
  }
  double score(const Detector& d) const {
    double s = 0;
    for (int k = 0; k < 5; ++k) s += d.weight[k] * static_cast<double>(hist_[k]);
    return s / static_cast<double>(shadow_.size());
  }

 private:
  std::vector<std::int64_t> shadow_;
  std::array<std::int64_t, 5> hist_{};
};

Bitmap bits_of(const Domain& d, std::span<const std::int64_t> counts) {
  Bitmap bm{d.width(), d.height(), std::vector<bool>(static_cast<std::size_t>(d.width()) * d.height(), false)};
  for (std::size_t v = 0; v < d.size(); ++v) {
    Cell c = d.cell(static_cast<VertexId>(v));
    bm.bits[static_cast<std::size_t>(c.y) * d.width() + c.x] = counts[v] >= 3;
  }
  return bm;
}

}  // namespace

Configuration encode(const Bitmap& bits, DomainPtr domain) {
  if (bits.width != domain->width() || bits.height != domain->height())
    throw Error("payload is " + std::to_string(bits.width) + "x" + std::to_string(bits.height) + ", domain box is " +
                std::to_string(domain->width()) + "x" + std::to_string(domain->height()));
  Configuration c(domain);
  for (std::size_t v = 0; v < domain->size(); ++v) {
    Cell cell = domain->cell(static_cast<VertexId>(v));
    c[static_cast<VertexId>(v)] = 2 + (bits.at(cell.x, cell.y) ? 1 : 0);
  }
  return c;
}

Bitmap payload_of(const Configuration& c) { return bits_of(c.domain(), c.counts()); }

Configuration scramble(const Configuration& p, const Potential& pot, const Rational& t, const CodecMode& mode) {
  if (t < Rational(0)) throw Error("scramble: negative time");
  if (!mode.stochastic) return frame(p, pot, t);
  StochasticChain chain(p, pot, mode.seed);
  const auto steps = static_cast<std::uint64_t>(floor_mul(t, pot.total));
  for (std::uint64_t k = 0; k < steps; ++k) chain.step();
  return chain.state();
}

double Detector::score(const Configuration& c) const {
  double s = 0;
  for (std::int64_t v : c.counts()) s += weight[symbol(v)];
  return c.size() ? s / static_cast<double>(c.size()) : 0.0;
}

DecodeResult decode(const Configuration& c, const Potential& pot, const CodecMode& mode,
                    const DecodeOptions& options) {
  require_same_domain(c.domain(), *pot.domain, "decode");
  if (pot.total <= 0) throw Error("decode: the potential is zero");
  const Detector& det = options.detector;
  DecodeResult best;
  best.score = -1e300;
  auto consider = [&](double score, const Rational& time, std::span<const std::int64_t> counts) {
    if (score > best.score) {
      best.score = score;
      best.time = time;
      best.bits = bits_of(c.domain(), counts);
    }
  };
  const double perfect = std::max(det.weight[2], det.weight[3]);

  if (!mode.stochastic) {
    Relaxer r(c.domain_ptr());
    r.load(c);
    r.track_touched(true);
    Tally tally(c.counts());
    consider(tally.score(det), Rational(0), c.counts());
    // Several consecutive states can be perfect and each of them scrambles
    // back to c at its own time; keep the whole run and pick one below.
    struct Candidate {
      Rational from, to;  // the state holds on (from, to]
      std::vector<std::int64_t> counts;
    };
    std::vector<Candidate> run;
    if (best.score >= perfect) run.push_back({Rational(-1), Rational(0), {c.counts().begin(), c.counts().end()}});
    GrainSchedule schedule(pot, Rounding::kCeil);
    GrainSchedule::Batch batch;
    while (run.size() < kMaxRun && schedule.next(batch) && batch.time < options.max_periods) {
      for (VertexId v : batch.vertices) r.add(v, 1);
      r.stabilize();
      tally.sync(r);
      r.clear_touched();
      ++best.events;
      // The state holds on (batch.time, next time]; report the right end.
      const double s = tally.score(det);
      if (s >= perfect)
        run.push_back({batch.time, schedule.peek_time(), {r.counts().begin(), r.counts().end()}});
      else if (!run.empty())
        break;
      consider(s, schedule.peek_time(), r.counts());
    }
    auto on_grid = [&](const Candidate& k) {
      return options.time_grid > 0 && Rational(floor_mul(k.to, options.time_grid), options.time_grid) > k.from;
    };
    const bool any_on_grid = std::any_of(run.begin(), run.end(), on_grid);
    const Candidate* pick = nullptr;
    for (const Candidate& k : run) {
      if (any_on_grid && !on_grid(k)) continue;
      if (!pick || k.to - k.from >= pick->to - pick->from) pick = &k;
    }
    if (pick) {
      best.time = pick->to;
      best.bits = bits_of(c.domain(), pick->counts);
      best.candidates = run.size();
    }
  } else {
    StochasticChain chain(c, pot, mode.seed);
    Relaxer& r = chain.relaxer();
    r.track_touched(true);
    Tally tally(c.counts());
    consider(tally.score(det), Rational(0), c.counts());
    const std::uint64_t stride =
        options.stride ? options.stride : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(pot.total) / 1024);
    const auto limit = static_cast<std::uint64_t>(floor_mul(options.max_periods, pot.total));
    // Stop a tenth of a period after the best legible state.
    const auto patience = std::max<std::uint64_t>(stride, static_cast<std::uint64_t>(pot.total) / 10);
    std::uint64_t best_step = 0;
    while (chain.steps() < limit) {
      chain.step();
      tally.sync(r);
      r.clear_touched();
      if (chain.steps() % stride != 0) continue;
      double s = tally.score(det);
      if (s > best.score) best_step = chain.steps();
      consider(s, chain.time(), r.counts());
      if (best.score >= perfect) break;
      if (best.score >= det.threshold && chain.steps() > best_step + patience) break;
    }
    best.events = chain.steps();
  }
  if (best.score < det.threshold)
    throw Error("payload not detected (best score " + std::to_string(best.score) + " below threshold " +
                std::to_string(det.threshold) + ")");
  return best;
}

double pixel_accuracy(const Bitmap& a, const Bitmap& b, const Domain& d) {
  if (a.width != b.width || a.height != b.height) throw Error("payload sizes differ");
  std::size_t agree = 0;
  for (std::size_t v = 0; v < d.size(); ++v) {
    Cell c = d.cell(static_cast<VertexId>(v));
    agree += a.at(c.x, c.y) == b.at(c.x, c.y);
  }
  return d.size() ? static_cast<double>(agree) / static_cast<double>(d.size()) : 1.0;
}

}  // namespace sandpile
