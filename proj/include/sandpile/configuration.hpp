#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sandpile/domain.hpp"

namespace sandpile {

// Integer grain counts on the vertices of a domain. Value type: copying
// copies the counts, the domain itself is shared.
class Configuration {
 public:
  explicit Configuration(DomainPtr domain);
  Configuration(DomainPtr domain, std::vector<std::int64_t> counts);

  static Configuration constant(DomainPtr domain, std::int64_t value);

  const Domain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return counts_.size(); }

  std::int64_t operator[](VertexId v) const { return counts_[static_cast<std::size_t>(v)]; }
  std::int64_t& operator[](VertexId v) { return counts_[static_cast<std::size_t>(v)]; }
  std::int64_t at(Cell c) const;

  std::span<const std::int64_t> counts() const { return counts_; }
  std::span<std::int64_t> counts() { return counts_; }
  std::vector<std::int64_t>& data() { return counts_; }

  bool is_stable() const;
  bool is_non_negative() const;
  // Sum of all counts; throws OverflowError beyond 64 bits.
  std::int64_t total() const;

  // Pointwise sum; domains must match.
  Configuration& operator+=(const Configuration& other);
  Configuration& add(std::span<const std::int64_t> increments);
  friend Configuration operator+(Configuration a, const Configuration& b) { return a += b; }

  friend bool operator==(const Configuration& a, const Configuration& b);

 private:
  DomainPtr domain_;
  std::vector<std::int64_t> counts_;
};

// Per-vertex toppling counts of one relaxation.
class Odometer {
 public:
  explicit Odometer(DomainPtr domain);
  Odometer(DomainPtr domain, std::vector<std::int64_t> topples);

  const Domain& domain() const { return *domain_; }
  std::int64_t operator[](VertexId v) const { return topples_[static_cast<std::size_t>(v)]; }
  std::int64_t& operator[](VertexId v) { return topples_[static_cast<std::size_t>(v)]; }
  std::span<const std::int64_t> values() const { return topples_; }
  std::vector<std::int64_t>& data() { return topples_; }
  // Sum over vertices, i.e. the total number of topplings.
  std::uint64_t total() const;
  bool is_zero() const;

  friend bool operator==(const Odometer& a, const Odometer& b) { return a.topples_ == b.topples_; }

 private:
  DomainPtr domain_;
  std::vector<std::int64_t> topples_;
};

bool same_domain(const Domain& a, const Domain& b);
void require_same_domain(const Domain& a, const Domain& b, const char* what);

// Graph Laplacian with the zero-outside convention:
// (Lf)(v) = sum over in-domain neighbors f(u) - 4 f(v).
std::vector<std::int64_t> laplacian(const Domain& domain, std::span<const std::int64_t> field);

// 4 - degree(v): the grains lost per toppling at v, and the Creutz drop pattern.
std::vector<std::int64_t> boundary_deficit(const Domain& domain);

}  // namespace sandpile
