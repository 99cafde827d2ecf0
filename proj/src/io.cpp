#include "sandpile/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sandpile/error.hpp"

namespace sandpile {
namespace {

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

int token_int(std::istream& in, const char* what) {
  std::string tok = read_netpbm_token(in);
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError(std::string("bad ") + what + " '" + tok + "'");
  return v;
}

}  // namespace

std::string read_netpbm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw ParseError("unexpected end of netpbm data");
  return tok;
}

Bitmap read_pbm(std::istream& in) {
  std::string magic = read_netpbm_token(in);
  if (magic != "P1" && magic != "P4") throw ParseError("not a PBM file (magic '" + magic + "')");
  Bitmap bm;
  bm.width = token_int(in, "PBM width");
  bm.height = token_int(in, "PBM height");
  if (bm.width < 1 || bm.height < 1) throw ParseError("PBM dimensions must be positive");
  bm.bits.assign(static_cast<std::size_t>(bm.width) * bm.height, false);
  if (magic == "P1") {
    std::size_t k = 0;
    while (k < bm.bits.size()) {
      int ch = in.get();
      if (ch == EOF) throw ParseError("truncated P1 data");
      if (ch == '#') {
        while ((ch = in.get()) != EOF && ch != '\n') {
        }
        continue;
      }
      if (ch == '0' || ch == '1') bm.bits[k++] = ch == '1';
      else if (!std::isspace(ch)) throw ParseError("bad P1 pixel");
    }
  } else {
    // read_netpbm_token consumed exactly one whitespace byte after the height
    const std::size_t row_bytes = (static_cast<std::size_t>(bm.width) + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int y = 0; y < bm.height; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes));
      if (!in) throw ParseError("truncated P4 data");
      for (int x = 0; x < bm.width; ++x)
        bm.bits[static_cast<std::size_t>(y) * bm.width + x] = (row[x / 8] >> (7 - x % 8)) & 1u;
    }
  }
  return bm;
}

Bitmap read_pbm(const std::string& path) {
  auto in = open_in(path, true);
  return read_pbm(in);
}

void write_pbm(std::ostream& out, const Bitmap& bm) {
  out << "P4\n" << bm.width << ' ' << bm.height << '\n';
  const std::size_t row_bytes = (static_cast<std::size_t>(bm.width) + 7) / 8;
  std::vector<unsigned char> row(row_bytes);
  for (int y = 0; y < bm.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < bm.width; ++x)
      if (bm.at(x, y)) row[x / 8] |= static_cast<unsigned char>(0x80u >> (x % 8));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row_bytes));
  }
}

void write_pbm(const std::string& path, const Bitmap& bm) {
  auto out = open_out(path, true);
  write_pbm(out, bm);
}

void write_spile(std::ostream& out, const Configuration& config) {
  const Domain& d = config.domain();
  out << "SPILE v1\n" << d.width() << ' ' << d.height() << '\n';
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (x > 0) out << ' ';
      VertexId v = d.vertex_at({x, y});
      if (v == kNoVertex) out << '.';
      else out << config[v];
    }
    out << '\n';
  }
}

void write_spile(const std::string& path, const Configuration& config) {
  auto out = open_out(path, false);
  write_spile(out, config);
}

Configuration read_spile(std::istream& in, DomainPtr domain) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("SPILE v1", 0) != 0) throw ParseError("missing 'SPILE v1' header");
  int w = 0, h = 0;
  if (!(in >> w >> h) || w < 1 || h < 1) throw ParseError("bad SPILE dimensions");
  std::vector<bool> mask(static_cast<std::size_t>(w) * h, true);
  std::vector<std::int64_t> cells(mask.size(), 0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::string tok;
    if (!(in >> tok)) throw ParseError("truncated SPILE data");
    if (tok == ".") {
      mask[k] = false;
      continue;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError("bad SPILE count '" + tok + "'");
    cells[k] = v;
  }
  if (!domain) {
    bool full = std::all_of(mask.begin(), mask.end(), [](bool b) { return b; });
    domain = share(full ? Domain::rectangle(w, h) : Domain::from_mask(w, h, mask));
  } else if (domain->width() != w || domain->height() != h || domain->mask() != mask) {
    throw ParseError("SPILE file does not match the expected domain");
  }
  std::vector<std::int64_t> counts(domain->size());
  for (std::size_t v = 0; v < counts.size(); ++v) {
    Cell c = domain->cell(static_cast<VertexId>(v));
    counts[v] = cells[static_cast<std::size_t>(c.y) * w + c.x];
  }
  return Configuration(std::move(domain), std::move(counts));
}

Configuration read_spile(const std::string& path, DomainPtr domain) {
  auto in = open_in(path, false);
  return read_spile(in, std::move(domain));
}

void write_pgm(std::ostream& out, const Configuration& config, bool binary) {
  const Domain& d = config.domain();
  std::int64_t maxval = 1;
  for (std::int64_t c : config.counts()) {
    if (c < 0 || c > 255) throw Error("PGM export needs counts in [0, 255]");
    maxval = std::max(maxval, c);
  }
  out << (binary ? "P5\n" : "P2\n") << d.width() << ' ' << d.height() << '\n' << maxval << '\n';
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      VertexId v = d.vertex_at({x, y});
      std::int64_t g = v == kNoVertex ? 0 : config[v];
      if (binary) out.put(static_cast<char>(g));
      else out << (x > 0 ? " " : "") << g;
    }
    if (!binary) out << '\n';
  }
}

void write_pgm(const std::string& path, const Configuration& config, bool binary) {
  auto out = open_out(path, true);
  write_pgm(out, config, binary);
}

Configuration read_pgm(std::istream& in, DomainPtr domain) {
  std::string magic = read_netpbm_token(in);
  if (magic != "P2" && magic != "P5") throw ParseError("not a PGM file");
  int w = token_int(in, "PGM width");
  int h = token_int(in, "PGM height");
  int maxval = token_int(in, "PGM maxval");
  if (maxval < 1 || maxval > 255) throw ParseError("unsupported PGM maxval");
  if (domain->width() != w || domain->height() != h) throw ParseError("PGM size does not match domain");
  std::vector<std::int64_t> cells(static_cast<std::size_t>(w) * h);
  for (auto& c : cells) {
    if (magic == "P5") {
      int ch = in.get();
      if (ch == EOF) throw ParseError("truncated PGM data");
      c = ch;
    } else {
      c = token_int(in, "PGM value");
    }
  }
  std::vector<std::int64_t> counts(domain->size());
  for (std::size_t v = 0; v < counts.size(); ++v) {
    Cell c = domain->cell(static_cast<VertexId>(v));
    counts[v] = cells[static_cast<std::size_t>(c.y) * w + c.x];
  }
  return Configuration(std::move(domain), std::move(counts));
}

}  // namespace sandpile
