#include "sandpile/configuration.hpp"

#include <algorithm>

#include "sandpile/error.hpp"

namespace sandpile {

Configuration::Configuration(DomainPtr domain) : domain_(std::move(domain)) {
  if (!domain_) throw Error("configuration without domain");
  counts_.assign(domain_->size(), 0);
}

Configuration::Configuration(DomainPtr domain, std::vector<std::int64_t> counts)
    : domain_(std::move(domain)), counts_(std::move(counts)) {
  if (!domain_) throw Error("configuration without domain");
  if (counts_.size() != domain_->size())
    throw Error("configuration has " + std::to_string(counts_.size()) + " counts for a domain of " +
                std::to_string(domain_->size()) + " vertices");
}

Configuration Configuration::constant(DomainPtr domain, std::int64_t value) {
  std::size_t n = domain->size();
  return Configuration(std::move(domain), std::vector<std::int64_t>(n, value));
}

std::int64_t Configuration::at(Cell c) const {
  VertexId v = domain_->vertex_at(c);
  if (v == kNoVertex) throw Error("cell outside domain");
  return (*this)[v];
}

bool Configuration::is_stable() const {
  return std::all_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c <= 3; });
}

bool Configuration::is_non_negative() const {
  return std::all_of(counts_.begin(), counts_.end(), [](std::int64_t c) { return c >= 0; });
}

std::int64_t Configuration::total() const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts_)
    if (__builtin_add_overflow(sum, c, &sum)) throw OverflowError("configuration total overflows 64 bits");
  return sum;
}

Configuration& Configuration::operator+=(const Configuration& other) {
  require_same_domain(*domain_, *other.domain_, "configuration sum");
  return add(other.counts_);
}

Configuration& Configuration::add(std::span<const std::int64_t> increments) {
  if (increments.size() != counts_.size()) throw Error("increment size does not match domain");
  for (std::size_t k = 0; k < counts_.size(); ++k)
    if (__builtin_add_overflow(counts_[k], increments[k], &counts_[k]))
      throw OverflowError("grain count overflows 64 bits");
  return *this;
}

bool operator==(const Configuration& a, const Configuration& b) {
  return same_domain(*a.domain_, *b.domain_) && a.counts_ == b.counts_;
}

Odometer::Odometer(DomainPtr domain) : domain_(std::move(domain)) { topples_.assign(domain_->size(), 0); }

Odometer::Odometer(DomainPtr domain, std::vector<std::int64_t> topples)
    : domain_(std::move(domain)), topples_(std::move(topples)) {
  if (topples_.size() != domain_->size()) throw Error("odometer size does not match domain");
}

std::uint64_t Odometer::total() const {
  std::uint64_t sum = 0;
  for (std::int64_t t : topples_)
    if (__builtin_add_overflow(sum, static_cast<std::uint64_t>(t), &sum))
      throw OverflowError("odometer total overflows 64 bits");
  return sum;
}

bool Odometer::is_zero() const {
  return std::all_of(topples_.begin(), topples_.end(), [](std::int64_t t) { return t == 0; });
}

bool same_domain(const Domain& a, const Domain& b) { return &a == &b || a == b; }

void require_same_domain(const Domain& a, const Domain& b, const char* what) {
  if (!same_domain(a, b)) throw Error(std::string("domain mismatch in ") + what);
}

std::vector<std::int64_t> laplacian(const Domain& domain, std::span<const std::int64_t> field) {
  if (field.size() != domain.size()) throw Error("field size does not match domain");
  std::vector<std::int64_t> out(domain.size());
  for (std::size_t v = 0; v < domain.size(); ++v) {
    __int128 acc = -4 * static_cast<__int128>(field[v]);
    for (VertexId u : domain.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) acc += field[static_cast<std::size_t>(u)];
    if (acc > INT64_MAX || acc < INT64_MIN) throw OverflowError("laplacian overflows 64 bits");
    out[v] = static_cast<std::int64_t>(acc);
  }
  return out;
}

std::vector<std::int64_t> boundary_deficit(const Domain& domain) {
  std::vector<std::int64_t> out(domain.size());
  for (std::size_t v = 0; v < domain.size(); ++v) out[v] = 4 - domain.degree(static_cast<VertexId>(v));
  return out;
}

}  // namespace sandpile
