#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sandpile/domain.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

struct Monomial {
  std::int64_t coeff = 0;
  int pi = 0;  // power of i
  int pj = 0;  // power of j
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

// Integer bivariate polynomial in the lattice coordinates (i, j). Terms are
// kept merged, nonzero and sorted by (pi, pj).
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::vector<Monomial> terms, std::string label = {}, bool harmonic = false);

  const std::vector<Monomial>& terms() const { return terms_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  // Set for basis elements and their integer combinations.
  bool harmonic() const { return harmonic_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  // Exact value; the 128-bit form never overflows for |i|,|j| < 2^12 and
  // degree <= 5 with moderate coefficients, the 64-bit form throws when it
  // does not fit.
  __int128 eval_wide(std::int64_t i, std::int64_t j) const;
  std::int64_t eval(std::int64_t i, std::int64_t j) const;
  // Discrete Laplacian at (i, j) on the full lattice.
  __int128 laplacian_at(std::int64_t i, std::int64_t j) const;

  // E.g. "1*i^3*j^0,-3*i^1*j^2".
  std::string str() const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<Monomial> terms_;
  std::string label_;
  bool harmonic_ = false;
};

// Table of named harmonics: 0, 1a, 1b, 2a, 2b, 3a, 3b, 4a, 4b, 5a. Accepts the
// id with or without the leading 'H'.
Polynomial basis(std::string_view id);
const std::vector<std::string>& basis_ids();

// True iff the discrete Laplacian vanishes at every |i|,|j| <= radius.
bool check_harmonic(const Polynomial& p, int radius);

// Sum of weight * polynomial; harmonic iff all inputs with nonzero weight are.
Polynomial linear_combine(const std::vector<std::pair<std::int64_t, Polynomial>>& parts);

// Comma-separated items, each a monomial "c*i^p*j^q" (factors optional, e.g.
// "i", "-3*i*j^2", "7") or a weighted preset "H2a", "2*H1a", "-H3b".
Polynomial parse_polynomial(std::string_view text);

// Harmonic with rational weights, sum of w_k * p_k. Used by the extended model.
struct RationalHarmonic {
  std::vector<std::pair<Rational, Polynomial>> parts;

  Rational eval(std::int64_t i, std::int64_t j) const;
  bool harmonic() const;
  std::string str() const;
};
// Items "w:POLY" separated by ';', e.g. "1/2:H2a;-3/7:i".
RationalHarmonic parse_rational_harmonic(std::string_view text);

// Lattice window [i0, i1] x [j0, j1].
struct Window {
  std::int64_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  std::int64_t width() const { return i1 - i0 + 1; }
  std::int64_t height() const { return j1 - j0 + 1; }
  bool contains(std::int64_t i, std::int64_t j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
};

// Bounding box of the domain grown by one cell on every side; covers the
// extended grid used by the potential construction.
Window extended_window(const Domain& d);

// Sampled integer field on a window.
class DiscreteField {
 public:
  DiscreteField(Window window, std::vector<std::int64_t> values, std::string label = {});

  const Window& window() const { return window_; }
  const std::string& label() const { return label_; }
  std::int64_t at(std::int64_t i, std::int64_t j) const;
  const std::vector<std::int64_t>& values() const { return values_; }

  // Laplacian at a window point whose four neighbors lie in the window.
  std::int64_t laplacian_at(std::int64_t i, std::int64_t j) const;
  // Delta <= 0 at every point of the window interior.
  bool is_super_harmonic() const;

 private:
  Window window_;
  std::vector<std::int64_t> values_;
  std::string label_;
};

struct TropicalTerm {
  Polynomial polynomial;
  std::int64_t offset = 0;
};

// Pointwise min over the shifted polynomials, sampled on the window.
DiscreteField tropical_min(const std::vector<TropicalTerm>& terms, const Window& window);

// The four-region super-harmonic field min(ij+c1, -3ij+c2, k i+c3, -3k i+c4).
struct QuadrantConstants {
  std::int64_t k = 128;
  std::int64_t c1 = 0, c2 = 0, c3 = 0, c4 = 0;
};
std::vector<TropicalTerm> quadrant_terms(const QuadrantConstants& c);
// Constants reconstructed for a 255x255 square, scaled for other sizes by the
// half side (see README).
QuadrantConstants default_quadrant_constants(const Domain& d);

using FieldSource = std::variant<Polynomial, DiscreteField>;

// A polynomial expression (parse_polynomial), "quadrant" (default constants),
// "quadrant:k,c1,c2,c3,c4", or "min:EXPR@c;EXPR@c;..." for a general tropical
// minimum. Fields are sampled on extended_window(d).
FieldSource parse_field_source(std::string_view text, const Domain& d);
std::string source_label(const FieldSource& s);

}  // namespace sandpile
