#include "sandpile/render.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>

#include "sandpile/error.hpp"
#include "sandpile/io.hpp"

namespace sandpile {

Rgb Image::at(int x, int y) const {
  const std::size_t k = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[k], rgb[k + 1], rgb[k + 2]};
}

Image render(const Configuration& c, const RenderOptions& options) {
  if (options.scale < 1) throw Error("render scale must be >= 1");
  const Domain& d = c.domain();
  const int s = options.scale;
  Image img{d.width() * s, d.height() * s, {}};
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      VertexId v = d.vertex_at({x, y});
      Rgb col = options.palette.outside;
      if (v != kNoVertex) {
        std::int64_t n = c[v];
        if (n < 0) throw Error("render: negative count");
        if (n > 3 && !options.allow_unstable) throw Error("render: configuration is not stable");
        col = n > 3 ? options.palette.unstable : options.palette.symbol[static_cast<std::size_t>(n)];
      }
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx) {
          std::size_t k = (static_cast<std::size_t>(y * s + dy) * img.width + (x * s + dx)) * 3;
          img.rgb[k] = col.r;
          img.rgb[k + 1] = col.g;
          img.rgb[k + 2] = col.b;
        }
    }
  return img;
}

void write_ppm(std::ostream& out, const Image& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_ppm(out, img);
}

Image read_ppm(std::istream& in) {
  if (read_netpbm_token(in) != "P6") throw ParseError("not a P6 image");
  Image img;
  img.width = std::stoi(read_netpbm_token(in));
  img.height = std::stoi(read_netpbm_token(in));
  if (std::stoi(read_netpbm_token(in)) != 255) throw ParseError("unsupported PPM maxval");
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!in) throw ParseError("truncated PPM data");
  return img;
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_ppm(in);
}

void write_png(const std::string& path, const Image& img) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw Error("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng: failed writing '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Configuration configuration_from_image(const Image& img, DomainPtr domain, const Palette& palette) {
  if (img.width != domain->width() || img.height != domain->height())
    throw Error("image size does not match the domain (scale must be 1)");
  Configuration c(domain);
  for (std::size_t v = 0; v < domain->size(); ++v) {
    Cell cell = domain->cell(static_cast<VertexId>(v));
    Rgb px = img.at(cell.x, cell.y);
    int found = -1;
    for (int k = 0; k < 4; ++k)
      if (palette.symbol[static_cast<std::size_t>(k)] == px) found = k;
    if (found < 0) throw Error("image pixel is not a palette color");
    c[static_cast<VertexId>(v)] = found;
  }
  return c;
}

FrameIndex::FrameIndex(const std::string& path) : path_(path) {
  std::ofstream out(path_);
  if (!out) throw Error("cannot open '" + path_ + "' for writing");
  out << "frame,time,path\n";
}

void FrameIndex::add(std::size_t frame, const Rational& time, const std::string& image_path) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to '" + path_ + "'");
  out << frame << ',' << time.str() << ',' << image_path << '\n';
}

void write_image(const std::string& path, const Image& img) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0) write_png(path, img);
  else write_ppm(path, img);
}

}  // namespace sandpile
