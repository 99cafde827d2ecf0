#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/harmonic.hpp"

namespace sandpile {

// Drop field X = -Laplacian(h~) of a normalized (super-)harmonic field h~
// restricted to the domain.
struct Potential {
  DomainPtr domain;
  std::vector<std::int64_t> x;      // per vertex, >= 0
  std::int64_t total = 0;           // |X|
  std::vector<std::int64_t> field;  // normalized h~ per vertex
  std::int64_t minimum = 0;         // min of the raw field over the extended grid
  std::int64_t divisor = 1;         // gcd removed in normalization
  std::string label;

  std::size_t support() const;  // number of vertices with x > 0
  Configuration as_configuration() const { return Configuration(domain, x); }
};

// The extend / subtract-min / divide-gcd / fold construction. The extended grid
// is the domain plus every missing 4-neighbor of a domain vertex. For fields
// that are not harmonic on the lattice the term -Laplacian(h^) of the
// normalized full-lattice field is added at each vertex, which keeps
// x = -Laplacian(h~) exact everywhere. Throws if some x(v) < 0.
Potential build_potential(const FieldSource& source, DomainPtr domain);

// Raw fold of the constant 1 without normalization: x(v) = 4 - degree(v), the
// Creutz drop pattern.
Potential creutz_potential(DomainPtr domain);

// The fold split by the side of the extension vertex. The four parts sum to
// build_potential(source, domain); only defined for lattice-harmonic sources.
struct DirectionalPotentials {
  Potential north, east, south, west;
};
DirectionalPotentials directional_potentials(const FieldSource& source, DomainPtr domain);

}  // namespace sandpile
