#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "sandpile/configuration.hpp"

namespace sandpile {

using BigInt = boost::multiprecision::cpp_int;

// Sandpile group operation: pointwise sum, then relax.
Configuration group_add(const Configuration& a, const Configuration& b);

// Burning test. Throws for unstable or negative input.
bool is_recurrent(const Configuration& c);

// Throws unless c is recurrent; returns c for chaining.
const Configuration& require_recurrent(const Configuration& c, const char* what);

inline constexpr std::uint64_t kDefaultIdentityRounds = 1'000'000;

// Creutz identity: C <- relax(C + B) from the empty configuration, with
// B = 4 - degree, until an iterate repeats.
Configuration identity(DomainPtr domain, std::uint64_t max_rounds = kDefaultIdentityRounds);

// identity() backed by a disk cache (SPILE v1 files keyed by Domain::hash())
// in `cache_dir`, or in $SANDPILE_CACHE_DIR when cache_dir is empty. Without
// either, falls back to identity().
Configuration cached_identity(DomainPtr domain, const std::string& cache_dir = {});

inline constexpr std::size_t kDefaultGroupOrderBound = 64;

// |G| = det of the reduced Laplacian, by fraction-free (Bareiss) elimination.
BigInt group_order(const Domain& domain, std::size_t max_vertices = kDefaultGroupOrderBound);

// Calls `visit` for every stable configuration (4^n of them); for tiny domains.
void for_each_stable(DomainPtr domain, const std::function<void(const Configuration&)>& visit);

std::vector<Configuration> recurrent_configurations(DomainPtr domain);

// A recurrent configuration never carries zeros on two adjacent vertices.
bool has_adjacent_zeros(const Configuration& c);

}  // namespace sandpile
