#include "sandpile/stochastic.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "sandpile/error.hpp"

namespace sandpile {

AliasTable::AliasTable(std::span<const std::int64_t> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error("alias table needs at least one weight");
  for (std::int64_t w : weights) {
    if (w < 0) throw Error("alias table weights must be non-negative");
    total_ += w;
  }
  if (total_ == 0) throw Error("alias table weights sum to zero");
  // Column height is total_; scaled weight of k is w_k * n.
  std::vector<__int128> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t k = 0; k < n; ++k) {
    scaled[k] = static_cast<__int128>(weights[k]) * static_cast<__int128>(n);
    (scaled[k] < total_ ? small : large).push_back(k);
  }
  threshold_.assign(n, total_);
  alias_.resize(n);
  for (std::size_t k = 0; k < n; ++k) alias_[k] = k;
  while (!small.empty() && !large.empty()) {
    std::size_t s = small.back();
    small.pop_back();
    std::size_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= total_ - scaled[s];
    if (scaled[l] < total_) {
      large.pop_back();
      small.push_back(l);
    }
  }
}

std::size_t AliasTable::sample(Rng& rng) const {
  const std::size_t k = rng.below(alias_.size());
  const auto r = static_cast<__int128>(rng.below(static_cast<std::uint64_t>(total_)));
  return r < threshold_[k] ? k : alias_[k];
}

namespace {

std::vector<std::int64_t> positive_weights(const Potential& p, std::vector<VertexId>& vertices) {
  std::vector<std::int64_t> w;
  for (std::size_t v = 0; v < p.x.size(); ++v)
    if (p.x[v] > 0) {
      vertices.push_back(static_cast<VertexId>(v));
      w.push_back(p.x[v]);
    }
  if (w.empty()) throw Error("degenerate chain: the potential is zero");
  return w;
}

}  // namespace

StochasticChain::StochasticChain(const Configuration& start, const Potential& p, std::uint64_t seed)
    : relaxer_(start.domain_ptr()), vertices_(), table_(positive_weights(p, vertices_)), rng_(seed), total_(p.total) {
  require_same_domain(start.domain(), *p.domain, "stochastic chain");
  if (!start.is_stable() || !start.is_non_negative()) throw Error("stochastic chain needs a stable start");
  relaxer_.load(start);
}

AvalancheRecord StochasticChain::step() {
  AvalancheRecord rec;
  rec.drop_vertex = vertices_[table_.sample(rng_)];
  relaxer_.add(rec.drop_vertex, 1);
  rec.size = relaxer_.stabilize();
  ++steps_;
  rec.time = time();
  return rec;
}

StochasticRun run_stochastic(const Configuration& start, const Potential& p, const Rational& periods,
                             std::uint64_t seed, const StochasticOptions& options) {
  if (p.total <= 0) throw Error("degenerate chain: the potential is zero");
  if (periods < Rational(0)) throw Error("negative number of periods");
  if (!std::is_sorted(options.sample_times.begin(), options.sample_times.end()))
    throw Error("sample times must be ascending");
  StochasticChain chain(start, p, seed);
  StochasticRun out{seed, static_cast<std::uint64_t>(ceil_mul(periods, p.total)), {}, 0, start, {}};
  std::size_t next_sample = 0;
  auto take_samples = [&] {
    while (next_sample < options.sample_times.size() &&
           static_cast<std::uint64_t>(floor_mul(options.sample_times[next_sample], p.total)) <= chain.steps()) {
      out.samples.emplace_back(options.sample_times[next_sample], chain.state());
      ++next_sample;
    }
  };
  take_samples();
  for (std::uint64_t k = 0; k < out.steps; ++k) {
    AvalancheRecord rec = chain.step();
    ++out.sizes[rec.size];
    out.topplings += rec.size;
    if (options.observer) options.observer(chain.steps(), rec);
    take_samples();
  }
  out.final_state = chain.state();
  return out;
}

double variation_of_information(const Configuration& a, const Configuration& b) {
  require_same_domain(a.domain(), b.domain(), "variation_of_information");
  constexpr int kSymbols = 5;
  auto symbol = [](std::int64_t c) { return (c >= 0 && c <= 3) ? static_cast<int>(c) : 4; };
  std::array<std::array<double, kSymbols>, kSymbols> joint{};
  for (std::size_t v = 0; v < a.size(); ++v)
    joint[symbol(a[static_cast<VertexId>(v)])][symbol(b[static_cast<VertexId>(v)])] += 1;
  const double n = static_cast<double>(a.size());
  std::array<double, kSymbols> pa{}, pb{};
  double h_joint = 0;
  for (int x = 0; x < kSymbols; ++x)
    for (int y = 0; y < kSymbols; ++y) {
      double p = joint[x][y] / n;
      pa[x] += p;
      pb[y] += p;
      if (p > 0) h_joint -= p * std::log(p);
    }
  if (h_joint <= 0) return 0.0;
  double h_a = 0, h_b = 0;
  for (int x = 0; x < kSymbols; ++x) {
    if (pa[x] > 0) h_a -= pa[x] * std::log(pa[x]);
    if (pb[x] > 0) h_b -= pb[x] * std::log(pb[x]);
  }
  const double mutual = h_a + h_b - h_joint;
  return std::clamp(1.0 - mutual / h_joint, 0.0, 1.0);
}

namespace {

constexpr std::uint64_t kMinSamples = 1000;
constexpr double kAlphaLo = 1.0001;
constexpr double kAlphaHi = 6.0;

struct Tail {
  std::vector<double> values;  // distinct sizes >= xmin
  std::vector<double> counts;
  double n = 0;
  double sum_log = 0;
};

Tail tail_of(const SizeHistogram& h, std::uint64_t xmin) {
  Tail t;
  for (auto it = h.lower_bound(std::max<std::uint64_t>(xmin, 1)); it != h.end(); ++it) {
    t.values.push_back(static_cast<double>(it->first));
    t.counts.push_back(static_cast<double>(it->second));
    t.n += static_cast<double>(it->second);
    t.sum_log += static_cast<double>(it->second) * std::log(static_cast<double>(it->first));
  }
  return t;
}

struct NllArgs {
  const Tail* tail;
  double xmin;
};

double nll(double alpha, void* params) {
  const auto* a = static_cast<const NllArgs*>(params);
  return a->tail->n * std::log(gsl_sf_hzeta(alpha, a->xmin)) + alpha * a->tail->sum_log;
}

double mle_alpha(const Tail& tail, double xmin) {
  NllArgs args{&tail, xmin};
  gsl_function f{&nll, &args};
  // Continuous approximation as the starting point.
  double guess = 1.0 + tail.n / (tail.sum_log - tail.n * std::log(xmin - 0.5));
  guess = std::clamp(guess, kAlphaLo + 1e-3, kAlphaHi - 1e-3);
  const double f_lo = nll(kAlphaLo, &args), f_hi = nll(kAlphaHi, &args);
  double f_guess = nll(guess, &args);
  if (!(f_guess < f_lo && f_guess < f_hi)) {
    // Convex objective: scan for an interior point below both ends.
    bool found = false;
    for (double a = kAlphaLo + 0.01; a < kAlphaHi; a += 0.01) {
      if (double fa = nll(a, &args); fa < f_lo && fa < f_hi) {
        guess = a;
        found = true;
        break;
      }
    }
    if (!found) return f_lo < f_hi ? kAlphaLo : kAlphaHi;
  }
  gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
  gsl_min_fminimizer_set(m, &f, guess, kAlphaLo, kAlphaHi);
  double best = guess;
  for (int iter = 0; iter < 200; ++iter) {
    gsl_min_fminimizer_iterate(m);
    best = gsl_min_fminimizer_x_minimum(m);
    double lo = gsl_min_fminimizer_x_lower(m), hi = gsl_min_fminimizer_x_upper(m);
    if (gsl_min_test_interval(lo, hi, 1e-9, 0.0) == GSL_SUCCESS) break;
  }
  gsl_min_fminimizer_free(m);
  return best;
}

double ks_distance(const Tail& tail, double alpha, double xmin) {
  const double z0 = gsl_sf_hzeta(alpha, xmin);
  auto cdf = [&](double x) { return 1.0 - gsl_sf_hzeta(alpha, x + 1.0) / z0; };
  double cum = 0, d = 0;
  for (std::size_t k = 0; k < tail.values.size(); ++k) {
    // Just below an observed value the empirical CDF still has its previous level.
    if (tail.values[k] - 1.0 >= xmin) d = std::max(d, std::abs(cum / tail.n - cdf(tail.values[k] - 1.0)));
    cum += tail.counts[k];
    d = std::max(d, std::abs(cum / tail.n - cdf(tail.values[k])));
  }
  return d;
}

struct GslQuiet {
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  ~GslQuiet() { gsl_set_error_handler(old); }
};

}  // namespace

PowerLawFit fit_power_law_at(const SizeHistogram& sizes, std::uint64_t xmin) {
  GslQuiet quiet;
  if (xmin < 1) throw Error("xmin must be >= 1");
  Tail tail = tail_of(sizes, xmin);
  if (tail.n < 2) throw Error("power-law fit: fewer than two samples above xmin");
  PowerLawFit fit;
  fit.xmin = xmin;
  fit.alpha = mle_alpha(tail, static_cast<double>(xmin));
  fit.exponent = -fit.alpha;
  fit.ks = ks_distance(tail, fit.alpha, static_cast<double>(xmin));
  fit.tail = static_cast<std::uint64_t>(tail.n);
  return fit;
}

PowerLawFit fit_power_law(const SizeHistogram& sizes) {
  std::uint64_t positive = 0;
  for (const auto& [s, c] : sizes)
    if (s >= 1) positive += c;
  if (positive < kMinSamples)
    throw Error("power-law fit needs at least " + std::to_string(kMinSamples) + " positive sizes, got " +
                std::to_string(positive));
  // Candidate xmin: every distinct value up to 20, then roughly geometric
  // steps, as long as the tail keeps enough samples.
  std::vector<std::uint64_t> candidates;
  std::uint64_t tail = positive;
  double next_geometric = 20;
  for (const auto& [s, c] : sizes) {
    if (s < 1) continue;
    if (tail < kMinSamples / 2) break;
    if (s <= 20 || static_cast<double>(s) >= next_geometric) {
      candidates.push_back(s);
      if (s > 20) next_geometric = static_cast<double>(s) * 1.25;
    }
    tail -= c;
  }
  PowerLawFit best;
  bool have = false;
  for (std::uint64_t xmin : candidates) {
    PowerLawFit f = fit_power_law_at(sizes, xmin);
    if (!have || f.ks < best.ks) {
      best = f;
      have = true;
    }
  }
  return best;
}

PowerLawFit fit_power_law(std::span<const std::uint64_t> sizes) {
  SizeHistogram h;
  for (std::uint64_t s : sizes) ++h[s];
  return fit_power_law(h);
}

}  // namespace sandpile
