#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

inline constexpr std::uint64_t kDefaultToppleBudget = 1'000'000'000'000ull;

// Orders used by the reference relaxation. The production kernel is always
// the bulk LIFO worklist (Relaxer); the others exist so the abelian property
// can be checked against genuinely different schedules.
enum class ToppleOrder {
  kBulkLifo,    // pop a vertex, topple it floor(c/4) times at once
  kFifo,        // one toppling per visit, queue
  kLifo,        // one toppling per visit, stack
  kRandomPick,  // one toppling of a uniformly chosen unstable vertex
  kSweep,       // repeated row-major sweeps, bulk topplings
};

struct RelaxOptions {
  ToppleOrder order = ToppleOrder::kBulkLifo;
  std::uint64_t seed = 0;  // only for kRandomPick
  std::uint64_t max_topplings = kDefaultToppleBudget;
};

struct Relaxation {
  Configuration stable;
  Odometer odometer;
};

// Stabilizes `input`. The result satisfies stable = input + Laplacian(odometer).
Relaxation relax(const Configuration& input, const RelaxOptions& options = {});

// Same result as relax(input), but starts from a pre-toppled state.
// Precondition: lower_bound <= odometer of relax(input) pointwise. Any such
// bound is valid, even one whose pre-toppled state has negative counts.
Relaxation relax_from(const Configuration& input, const Odometer& lower_bound,
                      std::uint64_t max_topplings = kDefaultToppleBudget);

struct AvalancheRecord {
  std::uint64_t size = 0;  // total topplings caused by the drop
  VertexId drop_vertex = kNoVertex;
  Rational time;
};

// Adds n grains at `vertex` to a stable configuration and relaxes once.
std::pair<Configuration, AvalancheRecord> drop_and_relax(const Configuration& config, VertexId vertex,
                                                         std::int64_t n = 1);

// Stateful relaxation kernel reused across many drops (stochastic chains,
// incremental trajectories). Absent neighbors point to a sink slot, so the
// inner loop has no branches on the boundary.
class Relaxer {
 public:
  explicit Relaxer(DomainPtr domain);

  void load(const Configuration& config);
  void load(std::span<const std::int64_t> counts);
  Configuration snapshot() const;

  const Domain& domain() const { return *domain_; }
  std::int64_t count(VertexId v) const { return counts_[static_cast<std::size_t>(v)]; }
  std::span<const std::int64_t> counts() const { return {counts_.data(), domain_->size()}; }

  void add(VertexId v, std::int64_t n);
  void add(std::span<const std::int64_t> increments);

  // Topples until stable. Returns the number of topplings performed; adds the
  // per-vertex counts to `odometer` when it is non-empty.
  std::uint64_t stabilize(std::span<std::int64_t> odometer = {});

  // Vertices whose count changed during the last stabilize() (plus the
  // vertices passed to add() since the previous call). Only tracked when
  // enabled, duplicates removed.
  void track_touched(bool on) { track_ = on; }
  const std::vector<VertexId>& touched() const { return touched_; }
  void clear_touched();

  void set_budget(std::uint64_t max_topplings) { budget_ = max_topplings; }

 private:
  void push(VertexId v) {
    if (!queued_[static_cast<std::size_t>(v)]) {
      queued_[static_cast<std::size_t>(v)] = 1;
      stack_.push_back(v);
    }
  }
  void touch(VertexId v) {
    if (track_ && !seen_[static_cast<std::size_t>(v)]) {
      seen_[static_cast<std::size_t>(v)] = 1;
      touched_.push_back(v);
    }
  }

  DomainPtr domain_;
  VertexId sink_;
  std::vector<std::int64_t> counts_;  // size n + 1, last slot is the sink
  std::vector<std::array<VertexId, 4>> nbr_;
  std::vector<VertexId> stack_;
  std::vector<std::uint8_t> queued_;
  bool track_ = false;
  std::vector<std::uint8_t> seen_;
  std::vector<VertexId> touched_;
  std::uint64_t budget_ = kDefaultToppleBudget;
};

}  // namespace sandpile
