#include "sandpile/potential.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "sandpile/error.hpp"

namespace sandpile {
namespace {

constexpr std::array<LatticePoint, 4> kStep{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};  // E, W, N, S

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw OverflowError("potential value does not fit in 64 bits");
  return static_cast<std::int64_t>(v);
}

// Field values at every vertex and at the four lattice neighbors of every
// vertex (external ones included), normalized over the extended grid.
struct Sampled {
  std::vector<std::int64_t> self;                // per vertex
  std::vector<std::array<std::int64_t, 4>> nbr;  // per vertex, per direction
  std::int64_t minimum = 0;
  std::int64_t divisor = 1;
};

Sampled sample(const FieldSource& source, const Domain& d) {
  auto value = [&](std::int64_t i, std::int64_t j) -> __int128 {
    if (const auto* p = std::get_if<Polynomial>(&source)) return p->eval_wide(i, j);
    return std::get<DiscreteField>(source).at(i, j);
  };
  const std::size_t n = d.size();
  std::vector<__int128> self(n);
  std::vector<std::array<__int128, 4>> nbr(n);
  // In-domain neighbors are domain vertices; external neighbors form the ring.
  __int128 lo = 0;
  bool first = true;
  auto see = [&](__int128 v) {
    if (first || v < lo) lo = v;
    first = false;
  };
  for (std::size_t v = 0; v < n; ++v) {
    LatticePoint p = d.coords(static_cast<VertexId>(v));
    self[v] = value(p.i, p.j);
    see(self[v]);
    for (Direction dir : kDirections) {
      nbr[v][dir] = value(p.i + kStep[dir].i, p.j + kStep[dir].j);
      if (d.neighbor(static_cast<VertexId>(v), dir) == kNoVertex) see(nbr[v][dir]);
    }
  }
  Sampled s;
  s.minimum = narrow(lo);
  __int128 g = 0;
  auto gcd_with = [&](__int128 v) {
    __int128 a = v - lo, b = g;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    g = a;
  };
  for (std::size_t v = 0; v < n; ++v) {
    gcd_with(self[v]);
    for (Direction dir : kDirections)
      if (d.neighbor(static_cast<VertexId>(v), dir) == kNoVertex) gcd_with(nbr[v][dir]);
  }
  if (g == 0) g = 1;
  s.divisor = narrow(g);
  s.self.resize(n);
  s.nbr.resize(n);
  // Neighbor values inside the domain are divisible too (they are vertices);
  // those outside the extended grid never occur since every neighbor of a
  // vertex is either a vertex or a ring cell.
  for (std::size_t v = 0; v < n; ++v) {
    s.self[v] = narrow((self[v] - lo) / g);
    for (Direction dir : kDirections) s.nbr[v][dir] = narrow((nbr[v][dir] - lo) / g);
  }
  return s;
}

bool lattice_harmonic(const FieldSource& source) {
  const auto* p = std::get_if<Polynomial>(&source);
  return p && p->harmonic();
}

Potential assemble(DomainPtr domain, const Sampled& s, std::vector<std::int64_t> x, std::string label) {
  Potential pot;
  pot.domain = std::move(domain);
  pot.total = 0;
  for (std::int64_t v : x)
    if (__builtin_add_overflow(pot.total, v, &pot.total)) throw OverflowError("|X| does not fit in 64 bits");
  pot.x = std::move(x);
  pot.field = s.self;
  pot.minimum = s.minimum;
  pot.divisor = s.divisor;
  pot.label = std::move(label);
  return pot;
}

}  // namespace

std::size_t Potential::support() const {
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](std::int64_t v) { return v > 0; }));
}

Potential build_potential(const FieldSource& source, DomainPtr domain) {
  const Domain& d = *domain;
  Sampled s = sample(source, d);
  const bool harmonic = lattice_harmonic(source);
  std::vector<std::int64_t> x(d.size(), 0);
  for (std::size_t v = 0; v < d.size(); ++v) {
    __int128 fold = 0, around = 0;
    for (Direction dir : kDirections) {
      around += s.nbr[v][dir];
      if (d.neighbor(static_cast<VertexId>(v), dir) == kNoVertex) fold += s.nbr[v][dir];
    }
    __int128 value = fold;
    if (!harmonic) value += 4 * static_cast<__int128>(s.self[v]) - around;
    if (value < 0) {
      LatticePoint p = d.coords(static_cast<VertexId>(v));
      throw Error("field is not super-harmonic at (" + std::to_string(p.i) + "," + std::to_string(p.j) +
                  "): potential would be negative");
    }
    x[v] = narrow(value);
  }
  return assemble(std::move(domain), s, std::move(x), source_label(source));
}

Potential creutz_potential(DomainPtr domain) {
  Potential pot;
  pot.x = boundary_deficit(*domain);
  pot.field.assign(domain->size(), 1);
  pot.minimum = 0;
  pot.divisor = 1;
  pot.total = std::accumulate(pot.x.begin(), pot.x.end(), std::int64_t{0});
  pot.label = "creutz";
  pot.domain = std::move(domain);
  return pot;
}

DirectionalPotentials directional_potentials(const FieldSource& source, DomainPtr domain) {
  if (!lattice_harmonic(source)) throw Error("directional potentials need a lattice-harmonic polynomial");
  const Domain& d = *domain;
  Sampled s = sample(source, d);
  std::array<std::vector<std::int64_t>, 4> parts;
  for (auto& p : parts) p.assign(d.size(), 0);
  for (std::size_t v = 0; v < d.size(); ++v)
    for (Direction dir : kDirections)
      if (d.neighbor(static_cast<VertexId>(v), dir) == kNoVertex) parts[dir][v] = s.nbr[v][dir];
  const std::string label = source_label(source);
  return {assemble(domain, s, std::move(parts[kNorth]), label + ":N"),
          assemble(domain, s, std::move(parts[kEast]), label + ":E"),
          assemble(domain, s, std::move(parts[kSouth]), label + ":S"),
          assemble(domain, s, std::move(parts[kWest]), label + ":W")};
}

}  // namespace sandpile
