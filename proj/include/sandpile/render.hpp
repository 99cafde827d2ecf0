#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sandpile/configuration.hpp"
#include "sandpile/rational.hpp"

namespace sandpile {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Palette {
  std::array<Rgb, 4> symbol{{{255, 255, 255}, {0, 170, 0}, {0, 0, 200}, {0, 0, 0}}};
  Rgb outside{128, 128, 128};
  Rgb unstable{255, 0, 0};
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
  Rgb at(int x, int y) const;
};

struct RenderOptions {
  int scale = 1;
  bool allow_unstable = false;  // counts >= 4 drawn in the unstable color
  Palette palette;
};

Image render(const Configuration& c, const RenderOptions& options = {});

void write_ppm(std::ostream& out, const Image& img);
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(std::istream& in);
Image read_ppm(const std::string& path);
void write_png(const std::string& path, const Image& img);

// Inverse of render() at scale 1 with a 4-symbol palette.
Configuration configuration_from_image(const Image& img, DomainPtr domain, const Palette& palette = {});

// frames.csv with header "frame,time,path".
class FrameIndex {
 public:
  explicit FrameIndex(const std::string& path);
  void add(std::size_t frame, const Rational& time, const std::string& image_path);

 private:
  std::string path_;
};

// Writes an image with the format chosen by extension (.png, otherwise PPM).
void write_image(const std::string& path, const Image& img);

}  // namespace sandpile
