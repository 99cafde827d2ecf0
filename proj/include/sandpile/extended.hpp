#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/harmonic.hpp"
#include "sandpile/potential.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

// Configuration of the extended model: boundary vertices may carry any
// non-negative rational count, interior vertices stay integral.
class ExtendedConfiguration {
 public:
  explicit ExtendedConfiguration(DomainPtr domain);
  ExtendedConfiguration(DomainPtr domain, std::vector<Rational> counts);
  static ExtendedConfiguration from_integer(const Configuration& c);

  const Domain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return counts_.size(); }
  const Rational& operator[](VertexId v) const { return counts_[static_cast<std::size_t>(v)]; }
  Rational& operator[](VertexId v) { return counts_[static_cast<std::size_t>(v)]; }
  const std::vector<Rational>& counts() const { return counts_; }

  bool is_stable() const;  // all counts < 4
  bool is_non_negative() const;
  bool interior_integral() const;
  bool is_integral() const;

  ExtendedConfiguration& add(std::span<const Rational> increments);
  ExtendedConfiguration& operator+=(const ExtendedConfiguration& o) { return add(o.counts_); }
  friend ExtendedConfiguration operator+(ExtendedConfiguration a, const ExtendedConfiguration& b) { return a += b; }
  friend bool operator==(const ExtendedConfiguration& a, const ExtendedConfiguration& b);

 private:
  DomainPtr domain_;
  std::vector<Rational> counts_;
};

// Topples every vertex with count >= 4 (bulk, floor(c/4) at a time) until
// stable. Throws if an interior count is not integral on input.
ExtendedConfiguration extended_relax(const ExtendedConfiguration& c,
                                     std::uint64_t max_topplings = 1'000'000'000'000ull);

// The real potential -Laplacian(h~ + k) of a harmonic h restricted to the
// domain, with k the smallest integer making it non-negative.
struct RealPotential {
  std::vector<Rational> x;
  std::int64_t k = 0;
};
RealPotential real_potential(const RationalHarmonic& h, const Domain& d);
// Same, from field values at the domain vertices and the ring cells, keyed by
// lattice point.
RealPotential real_potential(const std::map<std::pair<std::int64_t, std::int64_t>, Rational>& values,
                             const Domain& d);
std::vector<Rational> to_rational(const Potential& p);

// (identity + real_potential(h))°.
ExtendedConfiguration eta(const RationalHarmonic& h, const Configuration& identity);
ExtendedConfiguration eta(const RationalHarmonic& h, DomainPtr domain);

// (start + t p)°, no rounding.
ExtendedConfiguration geodesic_frame(const ExtendedConfiguration& start, std::span<const Rational> p, const Rational& t);

// Floors every count; the result is stable whenever c is.
Configuration floor_project(const ExtendedConfiguration& c);

// Maps a recurrent configuration of `outer` to one of `inner` (every vertex
// and ring cell of `inner` must lie in `outer` or its ring, by lattice
// coordinates). Solves for a real harmonic H on outer with
// eta_outer(H) = c, then returns floor(eta_inner(H)). Exact rational
// elimination, so only for tiny domains.
Configuration renormalize(const Configuration& c, const Configuration& outer_identity,
                          const Configuration& inner_identity, std::size_t max_unknowns = 256);

// SPILE-X v1: like SPILE v1, counts written as integers or p/q.
void write_spile_x(std::ostream& out, const ExtendedConfiguration& c);
void write_spile_x(const std::string& path, const ExtendedConfiguration& c);
ExtendedConfiguration read_spile_x(std::istream& in, DomainPtr domain = nullptr);
ExtendedConfiguration read_spile_x(const std::string& path, DomainPtr domain = nullptr);

}  // namespace sandpile
