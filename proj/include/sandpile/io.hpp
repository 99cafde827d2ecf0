#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sandpile/configuration.hpp"

namespace sandpile {

// One bit per cell, row-major from the top-left.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<bool> bits;
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
};

// PBM, plain (P1) or raw (P4). A set bit (black) is 1.
Bitmap read_pbm(std::istream& in);
Bitmap read_pbm(const std::string& path);
void write_pbm(std::ostream& out, const Bitmap& bitmap);  // writes P4
void write_pbm(const std::string& path, const Bitmap& bitmap);

// SPILE v1:
//   SPILE v1
//   <width> <height>
//   <width counts per line, top row first; '.' marks a masked-out cell>
void write_spile(std::ostream& out, const Configuration& config);
void write_spile(const std::string& path, const Configuration& config);
// Without a domain the mask is taken from the file.
Configuration read_spile(std::istream& in, DomainPtr domain = nullptr);
Configuration read_spile(const std::string& path, DomainPtr domain = nullptr);

// Raw counts as gray levels, maxval = max(1, max count). Counts must lie in
// [0, 255]; masked-out cells are written as 0.
void write_pgm(std::ostream& out, const Configuration& config, bool binary = true);
void write_pgm(const std::string& path, const Configuration& config, bool binary = true);
Configuration read_pgm(std::istream& in, DomainPtr domain);

// Helpers shared by the netpbm readers: skips whitespace and '#' comments.
std::string read_netpbm_token(std::istream& in);

}  // namespace sandpile
