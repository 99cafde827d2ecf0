#include "sandpile/relax.hpp"

#include <deque>
#include <string>

#include "sandpile/error.hpp"
#include "sandpile/rng.hpp"

namespace sandpile {
namespace {

[[noreturn]] void budget_exceeded(std::uint64_t budget, std::size_t unstable) {
  throw BudgetError("relaxation exceeded the toppling budget of " + std::to_string(budget) + " (" +
                    std::to_string(unstable) + " vertices still queued)");
}

void checked_add(std::int64_t& slot, std::int64_t q) {
  if (__builtin_add_overflow(slot, q, &slot)) throw OverflowError("grain count overflows 64 bits during toppling");
}

// Single-step and sweep schedules; slow but simple. Used as independent
// witnesses for the abelian property.
Relaxation relax_reference(const Configuration& input, const RelaxOptions& options) {
  const Domain& d = input.domain();
  const std::size_t n = d.size();
  std::vector<std::int64_t> c(input.counts().begin(), input.counts().end());
  std::vector<std::int64_t> odo(n, 0);
  std::uint64_t topplings = 0;

  auto topple = [&](std::size_t v, std::int64_t q) {
    c[v] -= 4 * q;
    odo[v] += q;
    for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) checked_add(c[static_cast<std::size_t>(u)], q);
    topplings += static_cast<std::uint64_t>(q);
    if (topplings > options.max_topplings) budget_exceeded(options.max_topplings, 0);
  };

  switch (options.order) {
    case ToppleOrder::kSweep: {
      bool changed = true;
      while (changed) {
        changed = false;
        for (std::size_t v = 0; v < n; ++v) {
          if (c[v] >= 4) {
            topple(v, c[v] / 4);
            changed = true;
          }
        }
      }
      break;
    }
    case ToppleOrder::kFifo:
    case ToppleOrder::kLifo: {
      std::deque<std::size_t> work;
      std::vector<std::uint8_t> queued(n, 0);
      for (std::size_t v = 0; v < n; ++v)
        if (c[v] >= 4) {
          work.push_back(v);
          queued[v] = 1;
        }
      while (!work.empty()) {
        std::size_t v;
        if (options.order == ToppleOrder::kFifo) {
          v = work.front();
          work.pop_front();
        } else {
          v = work.back();
          work.pop_back();
        }
        queued[v] = 0;
        if (c[v] < 4) continue;
        topple(v, 1);
        if (c[v] >= 4) {
          work.push_back(v);
          queued[v] = 1;
        }
        for (VertexId u : d.neighbors(static_cast<VertexId>(v))) {
          if (u == kNoVertex) continue;
          auto su = static_cast<std::size_t>(u);
          if (c[su] >= 4 && !queued[su]) {
            work.push_back(su);
            queued[su] = 1;
          }
        }
      }
      break;
    }
    case ToppleOrder::kRandomPick: {
      Rng rng(options.seed);
      std::vector<std::size_t> unstable;
      std::vector<std::int64_t> pos(n, -1);
      auto insert = [&](std::size_t v) {
        if (pos[v] < 0) {
          pos[v] = static_cast<std::int64_t>(unstable.size());
          unstable.push_back(v);
        }
      };
      auto erase = [&](std::size_t v) {
        auto p = static_cast<std::size_t>(pos[v]);
        std::size_t last = unstable.back();
        unstable[p] = last;
        pos[last] = static_cast<std::int64_t>(p);
        unstable.pop_back();
        pos[v] = -1;
      };
      for (std::size_t v = 0; v < n; ++v)
        if (c[v] >= 4) insert(v);
      while (!unstable.empty()) {
        std::size_t v = unstable[rng.below(unstable.size())];
        topple(v, 1);
        if (c[v] < 4) erase(v);
        for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
          if (u != kNoVertex && c[static_cast<std::size_t>(u)] >= 4) insert(static_cast<std::size_t>(u));
      }
      break;
    }
    case ToppleOrder::kBulkLifo:
      break;  // handled by the caller
  }
  return {Configuration(input.domain_ptr(), std::move(c)), Odometer(input.domain_ptr(), std::move(odo))};
}

}  // namespace

Relaxer::Relaxer(DomainPtr domain) : domain_(std::move(domain)) {
  const std::size_t n = domain_->size();
  sink_ = static_cast<VertexId>(n);
  counts_.assign(n + 1, 0);
  nbr_.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    for (Direction d : kDirections) {
      VertexId u = domain_->neighbor(static_cast<VertexId>(v), d);
      nbr_[v][d] = (u == kNoVertex) ? sink_ : u;
    }
  queued_.assign(n + 1, 0);
  queued_[n] = 1;  // never schedule the sink
  seen_.assign(n + 1, 0);
  seen_[n] = 1;
  stack_.reserve(n);
}

void Relaxer::load(const Configuration& config) {
  require_same_domain(*domain_, config.domain(), "Relaxer::load");
  load(config.counts());
}

void Relaxer::load(std::span<const std::int64_t> counts) {
  const std::size_t n = domain_->size();
  if (counts.size() != n) throw Error("Relaxer::load size mismatch");
  stack_.clear();
  for (std::size_t v = 0; v < n; ++v) {
    counts_[v] = counts[v];
    queued_[v] = 0;
    if (counts_[v] >= 4) push(static_cast<VertexId>(v));
  }
  counts_[n] = 0;
}

Configuration Relaxer::snapshot() const {
  return Configuration(domain_, std::vector<std::int64_t>(counts_.begin(), counts_.end() - 1));
}

void Relaxer::add(VertexId v, std::int64_t n) {
  auto sv = static_cast<std::size_t>(v);
  checked_add(counts_[sv], n);
  touch(v);
  if (counts_[sv] >= 4) push(v);
}

void Relaxer::add(std::span<const std::int64_t> increments) {
  if (increments.size() != domain_->size()) throw Error("Relaxer::add size mismatch");
  for (std::size_t v = 0; v < increments.size(); ++v)
    if (increments[v] != 0) add(static_cast<VertexId>(v), increments[v]);
}

void Relaxer::clear_touched() {
  for (VertexId v : touched_) seen_[static_cast<std::size_t>(v)] = 0;
  touched_.clear();
}

std::uint64_t Relaxer::stabilize(std::span<std::int64_t> odometer) {
  const bool with_odo = !odometer.empty();
  if (with_odo && odometer.size() != domain_->size()) throw Error("odometer size mismatch");
  std::uint64_t topplings = 0;
  std::int64_t* c = counts_.data();
  while (!stack_.empty()) {
    const VertexId v = stack_.back();
    stack_.pop_back();
    const auto sv = static_cast<std::size_t>(v);
    queued_[sv] = 0;
    const std::int64_t cv = c[sv];
    if (cv < 4) continue;
    const std::int64_t q = cv >> 2;
    c[sv] = cv & 3;
    if (track_) touch(v);
    for (VertexId u : nbr_[sv]) {
      const auto su = static_cast<std::size_t>(u);
      if (__builtin_add_overflow(c[su], q, &c[su])) throw OverflowError("grain count overflows 64 bits");
      if (c[su] >= 4) push(u);
      if (track_) touch(u);
    }
    c[sink_] = 0;
    if (with_odo && __builtin_add_overflow(odometer[sv], q, &odometer[sv]))
      throw OverflowError("odometer overflows 64 bits");
    topplings += static_cast<std::uint64_t>(q);
    if (topplings > budget_) budget_exceeded(budget_, stack_.size());
  }
  return topplings;
}

Relaxation relax(const Configuration& input, const RelaxOptions& options) {
  if (options.order != ToppleOrder::kBulkLifo) return relax_reference(input, options);
  Relaxer r(input.domain_ptr());
  r.set_budget(options.max_topplings);
  r.load(input);
  Odometer odo(input.domain_ptr());
  r.stabilize(odo.data());
  return {r.snapshot(), std::move(odo)};
}

Relaxation relax_from(const Configuration& input, const Odometer& lower_bound, std::uint64_t max_topplings) {
  require_same_domain(input.domain(), lower_bound.domain(), "relax_from");
  std::vector<std::int64_t> pre(input.counts().begin(), input.counts().end());
  std::vector<std::int64_t> lap = laplacian(input.domain(), lower_bound.values());
  for (std::size_t v = 0; v < pre.size(); ++v) checked_add(pre[v], lap[v]);
  Relaxer r(input.domain_ptr());
  r.set_budget(max_topplings);
  r.load(pre);
  Odometer odo = lower_bound;
  r.stabilize(odo.data());
  return {r.snapshot(), std::move(odo)};
}

std::pair<Configuration, AvalancheRecord> drop_and_relax(const Configuration& config, VertexId vertex,
                                                         std::int64_t n) {
  if (vertex < 0 || static_cast<std::size_t>(vertex) >= config.size())
    throw Error("drop vertex " + std::to_string(vertex) + " is outside the domain");
  if (n < 1) throw Error("drop_and_relax needs n >= 1");
  Relaxer r(config.domain_ptr());
  r.load(config);
  r.add(vertex, n);
  AvalancheRecord rec;
  rec.size = r.stabilize();
  rec.drop_vertex = vertex;
  return {r.snapshot(), rec};
}

}  // namespace sandpile
