#pragma once

// PNG (via libpng) and binary PGM/PPM codecs for 1- and 3-channel 8-bit images.

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "touchprint/raster.hpp"

namespace touchprint::io {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::string lower_ext(const std::filesystem::path& p) {
  auto e = p.extension().string();
  for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

inline RasterImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::IoError, "cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    throw Error(ErrorCode::ParseError, "PNG has zero size");
  }
  RasterImage out(static_cast<int>(image.width), static_cast<int>(image.height), colour ? 3 : 1);
  // Composite any alpha onto black.
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::ParseError, "cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

/// bit_depth 1 is only valid for 0/1-valued single-channel data.
inline void write_png(const std::filesystem::path& path, int width, int height, int channels, int bit_depth,
                      const std::uint8_t* data) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> packed;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 1) {
    const int stride = (width + 7) / 8;
    packed.assign(static_cast<std::size_t>(stride), 0);
    for (int y = 0; y < height; ++y) {
      std::fill(packed.begin(), packed.end(), 0);
      for (int x = 0; x < width; ++x) {
        if (data[static_cast<std::size_t>(y) * width + x]) packed[x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
      }
      png_write_row(png, packed.data());
    }
  } else {
    for (int y = 0; y < height; ++y) {
      png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels));
    }
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw Error(ErrorCode::IoError, "flush failed for '" + path.string() + "'");
}

inline void skip_pnm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline RasterImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P6") throw Error(ErrorCode::ParseError, "only binary P5/P6 supported");
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || w < 1 || h < 1 || maxval != 255) throw Error(ErrorCode::ParseError, "bad PNM header");
  in.get();
  RasterImage out(w, h, magic == "P6" ? 3 : 1);
  in.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(out.pixels.size())) {
    throw Error(ErrorCode::ParseError, "truncated PNM data");
  }
  return out;
}

}  // namespace detail

inline RasterImage read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::IoError, "no such file '" + path.string() + "'");
  const auto ext = detail::lower_ext(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return detail::read_pnm(path);
  return detail::read_png(path);
}

/// Format is chosen by extension: .pgm/.ppm write binary PNM, anything else PNG.
inline void write_image(const std::filesystem::path& path, const RasterImage& img) {
  const auto ext = detail::lower_ext(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
    return;
  }
  detail::write_png(path, img.width, img.height, img.channels, 8, img.pixels.data());
}

inline void write_image(const std::filesystem::path& path, const ChannelImage& img) {
  write_image(path, as_raster(img));
}

/// Masks are stored as 1-bit grayscale PNG.
inline void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  detail::write_png(path, mask.width, mask.height, 1, 1, mask.bits.data());
}

inline BinaryMask read_mask(const std::filesystem::path& path) {
  const auto img = read_image(path);
  const auto gray = to_grayscale(img);
  BinaryMask m(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.values.size(); ++i) m.bits[i] = gray.values[i] >= 128 ? 1 : 0;
  return m;
}

}  // namespace touchprint::io
