#include "sandpile/extended.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <boost/multiprecision/cpp_int.hpp>
#include <fstream>
#include <istream>
#include <ostream>

#include "sandpile/error.hpp"
#include "sandpile/group.hpp"

namespace sandpile {
namespace {

using Key = std::pair<std::int64_t, std::int64_t>;
using BigRational = boost::multiprecision::cpp_rational;

constexpr std::array<LatticePoint, 4> kStep{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};  // E, W, N, S

Key key_of(LatticePoint p) { return {p.i, p.j}; }

std::int64_t to_int64(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw OverflowError("value does not fit in 64 bits");
  return static_cast<std::int64_t>(v);
}

Rational to_rational(const BigRational& v) {
  return Rational(to_int64(boost::multiprecision::numerator(v)), to_int64(boost::multiprecision::denominator(v)));
}

// Domain vertices and ring cells (missing neighbors) by lattice point.
std::vector<LatticePoint> extended_grid(const Domain& d) {
  std::vector<LatticePoint> pts;
  std::map<Key, bool> seen;
  for (std::size_t v = 0; v < d.size(); ++v) {
    LatticePoint p = d.coords(static_cast<VertexId>(v));
    if (!seen[key_of(p)]) pts.push_back(p);
    seen[key_of(p)] = true;
  }
  for (std::size_t v = 0; v < d.size(); ++v) {
    LatticePoint p = d.coords(static_cast<VertexId>(v));
    for (Direction dir : kDirections) {
      if (d.neighbor(static_cast<VertexId>(v), dir) != kNoVertex) continue;
      LatticePoint e{p.i + kStep[dir].i, p.j + kStep[dir].j};
      if (!seen[key_of(e)]) pts.push_back(e);
      seen[key_of(e)] = true;
    }
  }
  return pts;
}

// Solves A y = b exactly; free variables are set to zero.
std::vector<BigRational> solve(std::vector<std::vector<BigRational>> a, std::vector<BigRational> b,
                               std::size_t unknowns) {
  const std::size_t rows = a.size();
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < unknowns && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    std::swap(b[p], b[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      BigRational f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < unknowns; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (b[i] != 0) throw Error("renormalize: no harmonic realizes this configuration");
  std::vector<BigRational> y(unknowns, 0);
  for (std::size_t i = 0; i < r; ++i) y[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
  return y;
}

}  // namespace

ExtendedConfiguration::ExtendedConfiguration(DomainPtr domain)
    : domain_(std::move(domain)), counts_(domain_->size(), Rational(0)) {}

ExtendedConfiguration::ExtendedConfiguration(DomainPtr domain, std::vector<Rational> counts)
    : domain_(std::move(domain)), counts_(std::move(counts)) {
  if (counts_.size() != domain_->size()) throw Error("extended configuration size does not match its domain");
}

ExtendedConfiguration ExtendedConfiguration::from_integer(const Configuration& c) {
  std::vector<Rational> v(c.counts().begin(), c.counts().end());
  return ExtendedConfiguration(c.domain_ptr(), std::move(v));
}

bool ExtendedConfiguration::is_stable() const {
  return std::all_of(counts_.begin(), counts_.end(), [](const Rational& r) { return r < Rational(4); });
}

bool ExtendedConfiguration::is_non_negative() const {
  return std::all_of(counts_.begin(), counts_.end(), [](const Rational& r) { return r >= Rational(0); });
}

bool ExtendedConfiguration::interior_integral() const {
  for (std::size_t v = 0; v < counts_.size(); ++v)
    if (!domain_->is_boundary(static_cast<VertexId>(v)) && !counts_[v].is_integer()) return false;
  return true;
}

bool ExtendedConfiguration::is_integral() const {
  return std::all_of(counts_.begin(), counts_.end(), [](const Rational& r) { return r.is_integer(); });
}

ExtendedConfiguration& ExtendedConfiguration::add(std::span<const Rational> increments) {
  if (increments.size() != counts_.size()) throw Error("extended add: size mismatch");
  for (std::size_t v = 0; v < counts_.size(); ++v) counts_[v] += increments[v];
  return *this;
}

bool operator==(const ExtendedConfiguration& a, const ExtendedConfiguration& b) {
  return same_domain(a.domain(), b.domain()) && a.counts_ == b.counts_;
}

ExtendedConfiguration extended_relax(const ExtendedConfiguration& c, std::uint64_t max_topplings) {
  if (!c.interior_integral()) throw Error("extended_relax: interior counts must be integers");
  const Domain& d = c.domain();
  std::vector<Rational> counts = c.counts();
  std::vector<VertexId> stack;
  std::vector<std::uint8_t> queued(d.size(), 0);
  const Rational four(4);
  for (std::size_t v = 0; v < d.size(); ++v)
    if (counts[v] >= four) {
      stack.push_back(static_cast<VertexId>(v));
      queued[v] = 1;
    }
  std::uint64_t topplings = 0;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    auto sv = static_cast<std::size_t>(v);
    queued[sv] = 0;
    if (counts[sv] < four) continue;
    const std::int64_t q = (counts[sv] / four).floor();
    counts[sv] -= Rational(4 * q);
    for (VertexId u : d.neighbors(v)) {
      if (u == kNoVertex) continue;
      auto su = static_cast<std::size_t>(u);
      counts[su] += Rational(q);
      if (counts[su] >= four && !queued[su]) {
        queued[su] = 1;
        stack.push_back(u);
      }
    }
    topplings += static_cast<std::uint64_t>(q);
    if (topplings > max_topplings) throw BudgetError("extended_relax exceeded its toppling budget");
  }
  return ExtendedConfiguration(c.domain_ptr(), std::move(counts));
}

RealPotential real_potential(const std::map<Key, Rational>& values, const Domain& d) {
  auto value = [&](LatticePoint p) {
    auto it = values.find(key_of(p));
    if (it == values.end())
      throw Error("harmonic value missing at (" + std::to_string(p.i) + "," + std::to_string(p.j) + ")");
    return it->second;
  };
  const std::size_t n = d.size();
  std::vector<Rational> s(n);
  for (std::size_t v = 0; v < n; ++v) {
    Rational acc = Rational(4) * value(d.coords(static_cast<VertexId>(v)));
    for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) acc -= value(d.coords(u));
    s[v] = acc;
  }
  RealPotential rp;
  bool first = true;
  for (std::size_t v = 0; v < n; ++v) {
    const int b = 4 - d.degree(static_cast<VertexId>(v));
    if (b == 0) {
      if (s[v] < Rational(0)) throw Error("real_potential: field is not super-harmonic in the interior");
      continue;
    }
    std::int64_t need = (-s[v] / Rational(b)).ceil();
    if (first || need > rp.k) rp.k = need;
    first = false;
  }
  rp.x.resize(n);
  for (std::size_t v = 0; v < n; ++v)
    rp.x[v] = s[v] + Rational(rp.k) * Rational(4 - d.degree(static_cast<VertexId>(v)));
  return rp;
}

RealPotential real_potential(const RationalHarmonic& h, const Domain& d) {
  std::map<Key, Rational> values;
  for (const LatticePoint& p : extended_grid(d)) values[key_of(p)] = h.eval(p.i, p.j);
  return real_potential(values, d);
}

std::vector<Rational> to_rational(const Potential& p) { return {p.x.begin(), p.x.end()}; }

ExtendedConfiguration eta(const RationalHarmonic& h, const Configuration& identity) {
  RealPotential rp = real_potential(h, identity.domain());
  return extended_relax(ExtendedConfiguration::from_integer(identity).add(rp.x));
}

ExtendedConfiguration eta(const RationalHarmonic& h, DomainPtr domain) {
  return eta(h, sandpile::identity(std::move(domain)));
}

ExtendedConfiguration geodesic_frame(const ExtendedConfiguration& start, std::span<const Rational> p,
                                     const Rational& t) {
  if (t < Rational(0)) throw Error("geodesic_frame: negative time");
  if (p.size() != start.size()) throw Error("geodesic_frame: potential size mismatch");
  std::vector<Rational> inc(p.size());
  for (std::size_t v = 0; v < p.size(); ++v) inc[v] = t * p[v];
  ExtendedConfiguration c = start;
  c.add(inc);
  return extended_relax(c);
}

Configuration floor_project(const ExtendedConfiguration& c) {
  std::vector<std::int64_t> counts(c.size());
  for (std::size_t v = 0; v < counts.size(); ++v) counts[v] = c.counts()[v].floor();
  Configuration out(c.domain_ptr(), std::move(counts));
  if (!out.is_stable()) throw Error("floor_project: input is not stable");
  return out;
}

Configuration renormalize(const Configuration& c, const Configuration& outer_identity,
                          const Configuration& inner_identity, std::size_t max_unknowns) {
  const Domain& outer = c.domain();
  require_same_domain(outer, outer_identity.domain(), "renormalize");
  require_recurrent(c, "renormalize");
  const std::size_t n = outer.size();

  // z integral with (Lz)(v) = -d(v) at interior vertices, one column at a time:
  // the equation at v fixes z at its east neighbor.
  std::vector<BigInt> d(n), z(n, 0);
  for (std::size_t v = 0; v < n; ++v) d[v] = c[static_cast<VertexId>(v)] - outer_identity[static_cast<VertexId>(v)];
  std::vector<VertexId> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<VertexId>(v);
  std::stable_sort(order.begin(), order.end(),
                   [&](VertexId a, VertexId b) { return outer.cell(a).x < outer.cell(b).x; });
  for (VertexId v : order) {
    if (outer.is_boundary(v)) continue;
    const auto& nb = outer.neighbors(v);
    z[static_cast<std::size_t>(nb[kEast])] = -d[static_cast<std::size_t>(v)] - z[static_cast<std::size_t>(nb[kWest])] -
                                             z[static_cast<std::size_t>(nb[kNorth])] -
                                             z[static_cast<std::size_t>(nb[kSouth])] + 4 * z[static_cast<std::size_t>(v)];
  }
  std::vector<BigInt> y(n);
  for (std::size_t v = 0; v < n; ++v) {
    BigInt lz = -4 * z[v];
    for (VertexId u : outer.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) lz += z[static_cast<std::size_t>(u)];
    y[v] = d[v] + lz;
  }

  // Unknown harmonic values on the extended grid of `outer`.
  std::vector<LatticePoint> grid = extended_grid(outer);
  if (grid.size() > max_unknowns) throw Error("renormalize: domain too large for exact elimination");
  std::map<Key, std::size_t> index;
  for (std::size_t k = 0; k < grid.size(); ++k) index[key_of(grid[k])] = k;
  std::vector<std::vector<BigRational>> a;
  std::vector<BigRational> b;
  for (std::size_t v = 0; v < n; ++v) {
    LatticePoint p = outer.coords(static_cast<VertexId>(v));
    std::vector<BigRational> row(grid.size(), 0);
    row[index.at(key_of(p))] = -4;
    for (const LatticePoint& s : kStep) row[index.at({p.i + s.i, p.j + s.j})] += 1;
    a.push_back(std::move(row));
    b.emplace_back(0);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!outer.is_boundary(static_cast<VertexId>(v))) continue;
    LatticePoint p = outer.coords(static_cast<VertexId>(v));
    std::vector<BigRational> row(grid.size(), 0);
    for (Direction dir : kDirections)
      if (outer.neighbor(static_cast<VertexId>(v), dir) == kNoVertex)
        row[index.at({p.i + kStep[dir].i, p.j + kStep[dir].j})] += 1;
    a.push_back(std::move(row));
    b.emplace_back(y[v]);
  }
  std::vector<BigRational> h = solve(std::move(a), std::move(b), grid.size());

  std::map<Key, Rational> values;
  for (const LatticePoint& p : extended_grid(inner_identity.domain())) {
    auto it = index.find(key_of(p));
    if (it == index.end()) throw Error("renormalize: inner domain is not contained in the outer one");
    values[key_of(p)] = to_rational(h[it->second]);
  }
  RealPotential rp = real_potential(values, inner_identity.domain());
  return floor_project(extended_relax(ExtendedConfiguration::from_integer(inner_identity).add(rp.x)));
}

void write_spile_x(std::ostream& out, const ExtendedConfiguration& c) {
  const Domain& d = c.domain();
  out << "SPILE-X v1\n" << d.width() << ' ' << d.height() << '\n';
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (x > 0) out << ' ';
      VertexId v = d.vertex_at({x, y});
      if (v == kNoVertex) out << '.';
      else out << c[v].str();
    }
    out << '\n';
  }
}

void write_spile_x(const std::string& path, const ExtendedConfiguration& c) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_spile_x(out, c);
}

ExtendedConfiguration read_spile_x(std::istream& in, DomainPtr domain) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("SPILE-X v1", 0) != 0) throw ParseError("missing 'SPILE-X v1' header");
  int w = 0, h = 0;
  if (!(in >> w >> h) || w < 1 || h < 1) throw ParseError("bad SPILE-X dimensions");
  std::vector<bool> mask(static_cast<std::size_t>(w) * h, true);
  std::vector<Rational> cells(mask.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::string tok;
    if (!(in >> tok)) throw ParseError("truncated SPILE-X data");
    if (tok == ".") mask[k] = false;
    else cells[k] = Rational::parse(tok);
  }
  if (!domain) {
    bool full = std::all_of(mask.begin(), mask.end(), [](bool b) { return b; });
    domain = share(full ? Domain::rectangle(w, h) : Domain::from_mask(w, h, mask));
  } else if (domain->width() != w || domain->height() != h || domain->mask() != mask) {
    throw ParseError("SPILE-X file does not match the expected domain");
  }
  std::vector<Rational> counts(domain->size());
  for (std::size_t v = 0; v < counts.size(); ++v) {
    Cell cell = domain->cell(static_cast<VertexId>(v));
    counts[v] = cells[static_cast<std::size_t>(cell.y) * w + cell.x];
  }
  ExtendedConfiguration out(std::move(domain), std::move(counts));
  if (!out.interior_integral()) throw ParseError("SPILE-X interior counts must be integers");
  return out;
}

ExtendedConfiguration read_spile_x(const std::string& path, DomainPtr domain) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_spile_x(in, std::move(domain));
}

}  // namespace sandpile
