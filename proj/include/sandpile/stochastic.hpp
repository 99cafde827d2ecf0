#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/rational.hpp"
#include "sandpile/relax.hpp"
#include "sandpile/rng.hpp"

namespace sandpile {

// Walker/Vose alias table over non-negative integer weights. Exact: the
// acceptance test compares integers, no floating point is involved.
class AliasTable {
 public:
  explicit AliasTable(std::span<const std::int64_t> weights);
  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return alias_.size(); }

 private:
  std::vector<__int128> threshold_;  // accept column k iff draw < threshold_[k]
  std::vector<std::size_t> alias_;
  __int128 total_ = 0;
};

// Single-grain Markov chain: each step drops one grain on a vertex drawn with
// probability x(v) / |X| and relaxes. Step k happens at time k / |X|.
class StochasticChain {
 public:
  StochasticChain(const Configuration& start, const Potential& p, std::uint64_t seed);

  AvalancheRecord step();
  std::uint64_t steps() const { return steps_; }
  Rational time() const { return Rational(static_cast<std::int64_t>(steps_), total_); }
  Configuration state() const { return relaxer_.snapshot(); }
  Relaxer& relaxer() { return relaxer_; }
  const Relaxer& relaxer() const { return relaxer_; }

 private:
  Relaxer relaxer_;
  std::vector<VertexId> vertices_;  // table index -> vertex, filled before table_
  AliasTable table_;
  Rng rng_;
  std::int64_t total_;
  std::uint64_t steps_ = 0;
};

using SizeHistogram = std::map<std::uint64_t, std::uint64_t>;

struct StochasticRun {
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  SizeHistogram sizes;  // avalanche size -> number of drops, zeros included
  std::uint64_t topplings = 0;
  Configuration final_state;
  std::vector<std::pair<Rational, Configuration>> samples;
};

struct StochasticOptions {
  // States after floor(t |X|) drops, for each t (ascending).
  std::vector<Rational> sample_times;
  // Called after every drop with (step, record).
  std::function<void(std::uint64_t, const AvalancheRecord&)> observer;
};

// ceil(periods |X|) drops from `start`. Throws "degenerate chain" for |X| = 0.
StochasticRun run_stochastic(const Configuration& start, const Potential& p, const Rational& periods,
                             std::uint64_t seed, const StochasticOptions& options = {});

// 1 - I(a;b) / H(a,b) over the joint distribution of per-vertex symbols
// {0,1,2,3,unstable}; natural logarithms; 0 when H = 0.
double variation_of_information(const Configuration& a, const Configuration& b);

struct PowerLawFit {
  double exponent = 0;  // negative, -alpha
  double alpha = 0;     // P(s) ~ s^-alpha
  std::uint64_t xmin = 1;
  double ks = 0;
  std::uint64_t tail = 0;  // samples >= xmin
};

// Discrete power-law maximum likelihood with xmin chosen by minimizing the
// Kolmogorov-Smirnov distance. Zero sizes are ignored. Needs at least 1000
// positive samples.
PowerLawFit fit_power_law(const SizeHistogram& sizes);
PowerLawFit fit_power_law(std::span<const std::uint64_t> sizes);

// For a fixed xmin: MLE alpha and the KS distance of the fitted tail.
PowerLawFit fit_power_law_at(const SizeHistogram& sizes, std::uint64_t xmin);

}  // namespace sandpile
