#include <doctest.h>

#include <cmath>
#include <map>

#include "sandpile/error.hpp"
#include "sandpile/group.hpp"
#include "sandpile/stochastic.hpp"

using namespace sandpile;

namespace {

// Devroye's rejection sampler for the discrete Zipf law P(k) ~ k^-a, a > 1.
std::uint64_t zipf(Rng& rng, double a) {
  const double b = std::pow(2.0, a - 1.0);
  for (;;) {
    double u = 1.0 - rng.unit(), v = rng.unit();
    double x = std::floor(std::pow(u, -1.0 / (a - 1.0)));
    if (x > 1e15) continue;
    double t = std::pow(1.0 + 1.0 / x, a - 1.0);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::uint64_t>(x);
  }
}

std::uint64_t key_of(const Configuration& c) {
  std::uint64_t k = 0;
  for (auto v : c.counts()) k = k * 4 + static_cast<std::uint64_t>(v);
  return k;
}

}  // namespace

TEST_CASE("alias table frequencies") {
  std::vector<std::int64_t> w{1, 0, 7, 2, 10, 3};
  AliasTable t(w);
  Rng rng(1);
  std::vector<double> hits(w.size(), 0);
  const int n = 1'000'000;
  for (int k = 0; k < n; ++k) hits[t.sample(rng)] += 1;
  CHECK(hits[1] == 0);
  double chi2 = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] == 0) continue;
    double e = n * static_cast<double>(w[k]) / 23.0;
    chi2 += (hits[k] - e) * (hits[k] - e) / e;
  }
  // 4 degrees of freedom, 99.9% quantile 18.47.
  CHECK(chi2 < 18.47);
  CHECK_THROWS_AS(AliasTable(std::vector<std::int64_t>{0, 0}), Error);
  CHECK_THROWS_AS(AliasTable(std::vector<std::int64_t>{1, -1}), Error);
  std::vector<std::int64_t> single{5};
  AliasTable one(single);
  for (int k = 0; k < 10; ++k) CHECK(one.sample(rng) == 0);
}

TEST_CASE("runs are reproducible") {
  auto d = make_domain("rect:15x15");
  Configuration id = identity(d);
  Potential p = build_potential(basis("2a"), d);
  StochasticOptions opt;
  opt.sample_times = {Rational(1, 4), Rational(1, 2)};
  StochasticRun a = run_stochastic(id, p, Rational(1, 2), 42, opt);
  StochasticRun b = run_stochastic(id, p, Rational(1, 2), 42, opt);
  CHECK(a.final_state == b.final_state);
  CHECK(a.sizes == b.sizes);
  CHECK(a.steps == static_cast<std::uint64_t>(ceil_mul(Rational(1, 2), p.total)));
  REQUIRE(a.samples.size() == 2);
  CHECK(a.samples[1].second == a.final_state);
  std::uint64_t drops = 0, topplings = 0;
  for (auto [s, c] : a.sizes) {
    drops += c;
    topplings += s * c;
  }
  CHECK(drops == a.steps);
  CHECK(topplings == a.topplings);
  CHECK(is_recurrent(a.final_state));
  StochasticRun c = run_stochastic(id, p, Rational(1, 2), 43);
  CHECK_FALSE(c.final_state == a.final_state);
  CHECK_THROWS_AS(run_stochastic(id, build_potential(basis("0"), d), Rational(1), 1), Error);
}

TEST_CASE("single-grain chain is uniform on recurrent states") {
  auto d = make_domain("rect:2x1");
  Potential p = build_potential(basis("1a"), d);
  REQUIRE(p.x == std::vector<std::int64_t>{2, 7});
  StochasticChain chain(Configuration(d), p, 7);
  std::map<std::uint64_t, double> freq;
  for (int k = 0; k < 100; ++k) chain.step();
  const int n = 300'000;
  for (int k = 0; k < n; ++k) {
    chain.step();
    Configuration s = chain.state();
    CHECK_FALSE(has_adjacent_zeros(s));
    freq[key_of(s)] += 1;
  }
  CHECK(freq.size() == 15);
  for (auto [k, f] : freq) CHECK(std::abs(f / n - 1.0 / 15) < 0.005);
}

TEST_CASE("variation of information") {
  auto d = make_domain("rect:8x8");
  Rng rng(3);
  Configuration a(d), b(d);
  for (std::size_t v = 0; v < d->size(); ++v) {
    a[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(4));
    b[static_cast<VertexId>(v)] = static_cast<std::int64_t>(rng.below(4));
  }
  CHECK(variation_of_information(a, a) == doctest::Approx(0.0));
  CHECK(variation_of_information(a, b) == doctest::Approx(variation_of_information(b, a)));
  CHECK(variation_of_information(a, b) > 0.5);
  CHECK(variation_of_information(a, b) <= 1.0);
  CHECK(variation_of_information(Configuration(d), Configuration(d)) == 0.0);
  // A relabeling carries the same information.
  Configuration shifted = a;
  for (auto& v : shifted.counts()) v = 3 - v;
  CHECK(variation_of_information(a, shifted) == doctest::Approx(0.0));
}

TEST_CASE("power-law fit recovers a synthetic exponent") {
  Rng rng(12345);
  SizeHistogram h;
  for (int k = 0; k < 100'000; ++k) ++h[zipf(rng, 1.5)];
  PowerLawFit at1 = fit_power_law_at(h, 1);
  CHECK(at1.alpha == doctest::Approx(1.5).epsilon(0.02));
  PowerLawFit fit = fit_power_law(h);
  CHECK(std::abs(fit.alpha - 1.5) < 0.05);
  CHECK(fit.exponent == -fit.alpha);
  CHECK(fit.ks < 0.02);

  SizeHistogram steep;
  for (int k = 0; k < 100'000; ++k) ++steep[zipf(rng, 2.5)];
  CHECK(std::abs(fit_power_law(steep).alpha - 2.5) < 0.05);

  SizeHistogram few{{1, 10}, {2, 5}};
  CHECK_THROWS_AS(fit_power_law(few), Error);
  SizeHistogram zeros{{0, 5000}, {1, 10}};
  CHECK_THROWS_AS(fit_power_law(zeros), Error);
}
