#include "sandpile/harmonic.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <sstream>

#include "sandpile/error.hpp"

namespace sandpile {
namespace {

__int128 ipow(std::int64_t base, int e) {
  __int128 r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

std::int64_t narrow(__int128 v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw OverflowError(std::string(what) + " does not fit in 64 bits");
  return static_cast<std::int64_t>(v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

std::int64_t parse_int(std::string_view s, const char* what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

struct BasisEntry {
  const char* id;
  std::vector<Monomial> terms;
};

const std::vector<BasisEntry>& basis_table() {
  static const std::vector<BasisEntry> table = {
      {"0", {{1, 0, 0}}},
      {"1a", {{1, 1, 0}}},
      {"1b", {{1, 0, 1}}},
      {"2a", {{1, 1, 1}}},
      {"2b", {{1, 2, 0}, {-1, 0, 2}}},
      {"3a", {{1, 3, 0}, {-3, 1, 2}}},
      {"3b", {{1, 0, 3}, {-3, 2, 1}}},
      {"4a", {{1, 4, 0}, {-6, 2, 2}, {1, 0, 4}, {-1, 2, 0}, {-1, 0, 2}}},
      {"4b", {{1, 3, 1}, {-1, 1, 3}}},
      {"5a", {{3, 5, 0}, {-30, 3, 2}, {15, 1, 4}, {-10, 3, 0}}},
  };
  return table;
}

// One item of a polynomial expression: a monomial or a weighted preset.
Polynomial parse_item(std::string_view item) {
  item = trim(item);
  if (item.empty()) throw ParseError("empty polynomial term");
  std::int64_t sign = 1;
  if (item.front() == '-' || item.front() == '+') {
    if (item.front() == '-') sign = -1;
    item = trim(item.substr(1));
  }
  std::int64_t coeff = sign;
  int pi = 0, pj = 0;
  const Polynomial* preset = nullptr;
  Polynomial preset_value;
  for (std::string_view f : split(item, '*')) {
    if (f.empty()) throw ParseError("empty factor in '" + std::string(item) + "'");
    if (f.front() == 'H' || f.front() == 'h') {
      if (preset) throw ParseError("two presets in one term");
      preset_value = basis(f);
      preset = &preset_value;
    } else if (f.front() == 'i' || f.front() == 'j') {
      int e = 1;
      if (f.size() > 1) {
        if (f[1] != '^') throw ParseError("bad factor '" + std::string(f) + "'");
        e = static_cast<int>(parse_int(f.substr(2), "exponent"));
        if (e < 0 || e > 16) throw ParseError("exponent out of range in '" + std::string(f) + "'");
      }
      (f.front() == 'i' ? pi : pj) += e;
    } else {
      std::int64_t c = parse_int(f, "coefficient");
      if (__builtin_mul_overflow(coeff, c, &coeff)) throw OverflowError("coefficient overflow");
    }
  }
  if (preset) {
    if (pi != 0 || pj != 0) throw ParseError("a preset cannot be multiplied by i or j");
    return linear_combine({{coeff, *preset}});
  }
  // A plain monomial is harmonic only when its Laplacian vanishes identically.
  Polynomial p({{coeff, pi, pj}});
  return Polynomial(p.terms(), {}, check_harmonic(p, 4 + pi + pj));
}

}  // namespace

Polynomial::Polynomial(std::vector<Monomial> terms, std::string label, bool harmonic)
    : label_(std::move(label)), harmonic_(harmonic) {
  std::map<std::pair<int, int>, std::int64_t> merged;
  for (const Monomial& m : terms) {
    if (m.pi < 0 || m.pj < 0) throw Error("negative exponent in polynomial");
    std::int64_t& slot = merged[{m.pi, m.pj}];
    if (__builtin_add_overflow(slot, m.coeff, &slot)) throw OverflowError("coefficient overflow");
  }
  for (const auto& [key, c] : merged)
    if (c != 0) terms_.push_back({c, key.first, key.second});
}

int Polynomial::degree() const {
  int d = 0;
  for (const Monomial& m : terms_) d = std::max(d, m.pi + m.pj);
  return d;
}

__int128 Polynomial::eval_wide(std::int64_t i, std::int64_t j) const {
  __int128 s = 0;
  for (const Monomial& m : terms_) s += static_cast<__int128>(m.coeff) * ipow(i, m.pi) * ipow(j, m.pj);
  return s;
}

std::int64_t Polynomial::eval(std::int64_t i, std::int64_t j) const { return narrow(eval_wide(i, j), "polynomial value"); }

__int128 Polynomial::laplacian_at(std::int64_t i, std::int64_t j) const {
  return eval_wide(i + 1, j) + eval_wide(i - 1, j) + eval_wide(i, j + 1) + eval_wide(i, j - 1) - 4 * eval_wide(i, j);
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (k > 0) os << ',';
    os << terms_[k].coeff << "*i^" << terms_[k].pi << "*j^" << terms_[k].pj;
  }
  return os.str();
}

const std::vector<std::string>& basis_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : basis_table()) v.push_back(std::string("H") + e.id);
    return v;
  }();
  return ids;
}

Polynomial basis(std::string_view id) {
  std::string_view key = id;
  if (!key.empty() && (key.front() == 'H' || key.front() == 'h')) key.remove_prefix(1);
  for (const auto& e : basis_table())
    if (key == e.id) return Polynomial(e.terms, std::string("H") + e.id, true);
  std::string valid;
  for (const auto& s : basis_ids()) valid += (valid.empty() ? "" : ", ") + s;
  throw Error("unknown harmonic id '" + std::string(id) + "' (valid ids: " + valid + ")");
}

bool check_harmonic(const Polynomial& p, int radius) {
  for (std::int64_t i = -radius; i <= radius; ++i)
    for (std::int64_t j = -radius; j <= radius; ++j)
      if (p.laplacian_at(i, j) != 0) return false;
  return true;
}

Polynomial linear_combine(const std::vector<std::pair<std::int64_t, Polynomial>>& parts) {
  std::vector<Monomial> terms;
  bool harmonic = true;
  std::string label;
  for (const auto& [w, p] : parts) {
    if (w == 0) continue;
    harmonic = harmonic && p.harmonic();
    for (const Monomial& m : p.terms()) {
      Monomial t = m;
      if (__builtin_mul_overflow(m.coeff, w, &t.coeff)) throw OverflowError("coefficient overflow");
      terms.push_back(t);
    }
    std::string name = p.label().empty() ? "(" + p.str() + ")" : p.label();
    if (!label.empty()) label += w < 0 ? "-" : "+";
    else if (w < 0) label += "-";
    std::int64_t a = w < 0 ? -w : w;
    label += (a == 1 ? "" : std::to_string(a) + "*") + name;
  }
  return Polynomial(std::move(terms), label, harmonic);
}

Polynomial parse_polynomial(std::string_view text) {
  std::vector<std::pair<std::int64_t, Polynomial>> parts;
  for (std::string_view item : split(text, ',')) parts.emplace_back(1, parse_item(item));
  Polynomial p = linear_combine(parts);
  if (!p.harmonic() && check_harmonic(p, 4 + p.degree())) p = Polynomial(p.terms(), p.label(), true);
  if (parts.size() == 1 && !parts[0].second.label().empty()) p.set_label(parts[0].second.label());
  if (p.label().empty() || p.label().front() == '(') p.set_label(std::string(trim(text)));
  return p;
}

Rational RationalHarmonic::eval(std::int64_t i, std::int64_t j) const {
  Rational s;
  for (const auto& [w, p] : parts) s += w * Rational(p.eval(i, j));
  return s;
}

bool RationalHarmonic::harmonic() const {
  return std::all_of(parts.begin(), parts.end(), [](const auto& wp) { return wp.second.harmonic(); });
}

std::string RationalHarmonic::str() const {
  std::string s;
  for (const auto& [w, p] : parts) {
    if (!s.empty()) s += ';';
    s += w.str() + ":" + (p.label().empty() ? p.str() : p.label());
  }
  return s.empty() ? "0" : s;
}

RationalHarmonic parse_rational_harmonic(std::string_view text) {
  RationalHarmonic h;
  for (std::string_view item : split(text, ';')) {
    if (item.empty()) continue;
    std::size_t colon = item.find(':');
    if (colon == std::string_view::npos) {
      h.parts.emplace_back(Rational(1), parse_polynomial(item));
    } else {
      h.parts.emplace_back(Rational::parse(trim(item.substr(0, colon))), parse_polynomial(item.substr(colon + 1)));
    }
  }
  return h;
}

Window extended_window(const Domain& d) {
  LatticePoint top_left = d.coords_of({0, 0});
  LatticePoint bottom_right = d.coords_of({d.width() - 1, d.height() - 1});
  return {top_left.i - 1, bottom_right.i + 1, bottom_right.j - 1, top_left.j + 1};
}

DiscreteField::DiscreteField(Window window, std::vector<std::int64_t> values, std::string label)
    : window_(window), values_(std::move(values)), label_(std::move(label)) {
  if (window_.width() < 1 || window_.height() < 1) throw Error("empty field window");
  if (values_.size() != static_cast<std::size_t>(window_.width() * window_.height()))
    throw Error("field size does not match its window");
}

std::int64_t DiscreteField::at(std::int64_t i, std::int64_t j) const {
  if (!window_.contains(i, j)) throw Error("field evaluated outside its window");
  return values_[static_cast<std::size_t>((j - window_.j0) * window_.width() + (i - window_.i0))];
}

std::int64_t DiscreteField::laplacian_at(std::int64_t i, std::int64_t j) const {
  __int128 s = static_cast<__int128>(at(i + 1, j)) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) -
               4 * static_cast<__int128>(at(i, j));
  return narrow(s, "field Laplacian");
}

bool DiscreteField::is_super_harmonic() const {
  for (std::int64_t j = window_.j0 + 1; j < window_.j1; ++j)
    for (std::int64_t i = window_.i0 + 1; i < window_.i1; ++i)
      if (laplacian_at(i, j) > 0) return false;
  return true;
}

DiscreteField tropical_min(const std::vector<TropicalTerm>& terms, const Window& window) {
  if (terms.empty()) throw Error("tropical_min needs at least one field");
  std::vector<std::int64_t> values;
  values.reserve(static_cast<std::size_t>(window.width() * window.height()));
  for (std::int64_t j = window.j0; j <= window.j1; ++j)
    for (std::int64_t i = window.i0; i <= window.i1; ++i) {
      __int128 best = 0;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        __int128 v = terms[k].polynomial.eval_wide(i, j) + terms[k].offset;
        if (k == 0 || v < best) best = v;
      }
      values.push_back(narrow(best, "tropical minimum"));
    }
  std::string label = "min(";
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Polynomial& p = terms[k].polynomial;
    label += (k ? ";" : "") + (p.label().empty() ? p.str() : p.label()) + "@" + std::to_string(terms[k].offset);
  }
  return DiscreteField(window, std::move(values), label + ")");
}

std::vector<TropicalTerm> quadrant_terms(const QuadrantConstants& c) {
  return {
      {Polynomial({{1, 1, 1}}, "ij", true), c.c1},
      {Polynomial({{-3, 1, 1}}, "-3ij", true), c.c2},
      {Polynomial({{c.k, 1, 0}}, std::to_string(c.k) + "i", true), c.c3},
      {Polynomial({{-3 * c.k, 1, 0}}, std::to_string(-3 * c.k) + "i", true), c.c4},
  };
}

QuadrantConstants default_quadrant_constants(const Domain& d) {
  // Reference constants for half side 127 (a 255x255 square). For other sizes
  // k and the offsets scale with the half side s: k ~ s, c ~ s^2.
  constexpr std::int64_t kRefHalf = 127;
  constexpr QuadrantConstants kRef{128, 0, 16282, 25418, -130};
  const std::int64_t s = std::max<std::int64_t>(1, (std::max(d.width(), d.height()) - 1) / 2);
  auto scale2 = [&](std::int64_t c) {
    return static_cast<std::int64_t>((static_cast<__int128>(c) * s * s) / (kRefHalf * kRefHalf));
  };
  QuadrantConstants q;
  q.k = std::max<std::int64_t>(1, (kRef.k * s + kRefHalf / 2) / kRefHalf);
  q.c1 = scale2(kRef.c1);
  q.c2 = scale2(kRef.c2);
  q.c3 = scale2(kRef.c3);
  q.c4 = scale2(kRef.c4);
  return q;
}

FieldSource parse_field_source(std::string_view text, const Domain& d) {
  text = trim(text);
  const Window w = extended_window(d);
  if (text == "quadrant") {
    DiscreteField f = tropical_min(quadrant_terms(default_quadrant_constants(d)), w);
    return DiscreteField(f.window(), f.values(), "quadrant");
  }
  if (text.rfind("quadrant:", 0) == 0) {
    auto v = split(text.substr(9), ',');
    if (v.size() != 5) throw ParseError("quadrant needs k,c1,c2,c3,c4");
    QuadrantConstants q{parse_int(v[0], "k"), parse_int(v[1], "c1"), parse_int(v[2], "c2"), parse_int(v[3], "c3"),
                        parse_int(v[4], "c4")};
    DiscreteField f = tropical_min(quadrant_terms(q), w);
    return DiscreteField(f.window(), f.values(), std::string(text));
  }
  if (text.rfind("min:", 0) == 0) {
    std::vector<TropicalTerm> terms;
    for (std::string_view item : split(text.substr(4), ';')) {
      std::size_t at = item.rfind('@');
      if (at == std::string_view::npos) terms.push_back({parse_polynomial(item), 0});
      else terms.push_back({parse_polynomial(item.substr(0, at)), parse_int(item.substr(at + 1), "offset")});
    }
    return tropical_min(terms, w);
  }
  return parse_polynomial(text);
}

std::string source_label(const FieldSource& s) {
  if (const auto* p = std::get_if<Polynomial>(&s)) return p->label().empty() ? p->str() : p->label();
  return std::get<DiscreteField>(s).label();
}

}  // namespace sandpile
