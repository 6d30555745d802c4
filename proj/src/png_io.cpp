#include "situate/render.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace situate {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError("cannot open " + path.string());
  }
  return f;
}

// rows: one pointer per row into caller-owned storage.
void write_png_rows(const std::filesystem::path& path, int width, int height, int color_type,
                    int bit_depth, std::vector<png_bytep>& rows) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed for " + path.string());
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("error while writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) {
    png_set_swap(png);  // host little-endian -> PNG big-endian
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError("error while flushing " + path.string());
  }
}

}  // namespace

void write_rgb_png(const std::filesystem::path& path, int width, int height,
                   std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw std::invalid_argument("write_rgb_png: buffer size mismatch");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3);
  }
  write_png_rows(path, width, height, PNG_COLOR_TYPE_RGB, 8, rows);
}

void write_gray16_png(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint16_t> gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("write_gray16_png: buffer size mismatch");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(gray.data() + static_cast<std::size_t>(y) * width));
  }
  write_png_rows(path, width, height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

std::filesystem::path segmentation_path(const std::filesystem::path& rgb_path) {
  std::filesystem::path p = rgb_path;
  p.replace_extension();
  p += ".seg.png";
  return p;
}

void write_png(const RenderOutput& output, const std::filesystem::path& path) {
  write_rgb_png(path, output.width, output.height, output.rgb);
  write_gray16_png(segmentation_path(path), output.width, output.height, output.instances);
}

PngImage read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw IoError("not a PNG file: " + path.string());
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed for " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed for " + path.string());
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("error while reading " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  PngImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  img.channels = png_get_channels(png, info);
  if (img.bit_depth == 16) png_set_swap(png);
  if (img.bit_depth < 8) png_set_packing(png);
  png_read_update_info(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<png_byte> data(row_bytes * static_cast<std::size_t>(img.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = data.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  if (img.bit_depth == 16) {
    for (int y = 0; y < img.height; ++y) {
      const auto* src = reinterpret_cast<const std::uint16_t*>(rows[y]);
      std::copy(src, src + static_cast<std::size_t>(img.width) * img.channels,
                img.samples.begin() + static_cast<std::ptrdiff_t>(y) * img.width * img.channels);
    }
  } else {
    for (int y = 0; y < img.height; ++y) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(img.width) * img.channels; ++i) {
        img.samples[static_cast<std::size_t>(y) * img.width * img.channels + i] = rows[y][i];
      }
    }
  }
  return img;
}

}  // namespace situate
