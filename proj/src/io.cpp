#include "dualvfi/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "dualvfi/errors.hpp"

namespace dualvfi {

namespace fs = std::filesystem;

double srgb_to_linear(double v) {
  if (v <= 0.04045) return v / 12.92;
  return std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  if (v <= 0.0031308) return 12.92 * v;
  return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

namespace {

constexpr float kFloMagic = 202021.25f;

template <class T>
T byteswap_value(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <class T>
void write_le(std::ostream& os, T v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is, const fs::path& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw InputError("truncated file: " + path.string());
  return v;
}

template <class T>
T read_le(std::istream& is, const fs::path& path) {
  T v = read_raw<T>(is, path);
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path.string());
  return is;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot write " + path.string());
  return os;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_pfm(const fs::path& path) {
  auto is = open_in(path);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  is >> magic >> width >> height >> scale;
  if (!is || (magic != "PF" && magic != "Pf"))
    throw InputError("not a PFM file: " + path.string());
  is.get();  // single whitespace before the raster
  if (width <= 0 || height <= 0 || scale == 0.0)
    throw InputError("bad PFM header: " + path.string());
  const int channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);

  Image img(width, height, channels);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        float v = read_raw<float>(is, path);
        if (swap) v = byteswap_value(v);
        img.at(x, y, c) = v;
      }
  }
  return img;
}

void write_pfm(const fs::path& path, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw InputError("PFM supports 1 or 3 channels, got " + std::to_string(img.channels()));
  auto os = open_out(path);
  os << (img.channels() == 3 ? "PF" : "Pf") << '\n'
     << img.width() << ' ' << img.height() << '\n'
     << "-1.0\n";
  for (int row = 0; row < img.height(); ++row) {
    const int y = img.height() - 1 - row;
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) write_le(os, static_cast<float>(img.at(x, y, c)));
  }
  if (!os) throw InputError("write failed: " + path.string());
}

Image read_png(const fs::path& path, bool linear) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw InputError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw InputError("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw InputError("libpng init failed");
  }
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("corrupt PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_expand(png);  // palette -> RGB, low-bit gray -> 8 bit, tRNS -> alpha
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int file_channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int channels = file_channels >= 3 ? 3 : 1;
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  Image img(width, height, channels);
  for (int y = 0; y < height; ++y) {
    const png_byte* row = rows[y];
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * file_channels + c;
        const double raw = depth == 16 ? (row[2 * i] << 8 | row[2 * i + 1]) : row[i];
        const double v = raw / maxval;
        img.at(x, y, c) = linear ? v : srgb_to_linear(v);
      }
  }
  return img;
}

void write_png(const fs::path& path, const Image& img, int bit_depth, bool linear) {
  if (bit_depth != 8 && bit_depth != 16) throw InputError("PNG bit depth must be 8 or 16");
  if (img.channels() != 1 && img.channels() != 3)
    throw InputError("PNG export supports 1 or 3 channels");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw InputError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw InputError("libpng init failed");
  }
  const int bytes = bit_depth / 8;
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels() * bytes;
  std::vector<png_byte> buffer(stride * img.height());
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        if (!linear) v = linear_to_srgb(v);
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        png_byte* dst = buffer.data() + y * stride +
                        (static_cast<std::size_t>(x) * img.channels() + c) * bytes;
        if (bytes == 2) {
          dst[0] = static_cast<png_byte>(q >> 8);
          dst[1] = static_cast<png_byte>(q & 0xff);
        } else {
          dst[0] = static_cast<png_byte>(q);
        }
      }
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = buffer.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("PNG write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width(), img.height(), bit_depth,
               img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_image(const fs::path& path, bool linear_png) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".png") return read_png(path, linear_png);
  throw InputError("unsupported image format: " + path.string());
}

void write_image(const fs::path& path, const Image& img, bool linear_png) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return write_pfm(path, img);
  if (ext == ".png") return write_png(path, img, 8, linear_png);
  throw InputError("unsupported image format: " + path.string());
}

FlowField read_flo(const fs::path& path) {
  auto is = open_in(path);
  const auto magic = read_le<float>(is, path);
  if (magic != kFloMagic) throw InputError("bad .flo magic in " + path.string());
  const auto width = read_le<std::int32_t>(is, path);
  const auto height = read_le<std::int32_t>(is, path);
  if (width <= 0 || height <= 0 || width > (1 << 20) || height > (1 << 20))
    throw InputError("bad .flo dimensions in " + path.string());
  FlowField flow(width, height);
  for (double& d : flow.data()) d = read_le<float>(is, path);
  return flow;
}

void write_flo(const fs::path& path, const FlowField& flow) {
  auto os = open_out(path);
  write_le(os, kFloMagic);
  write_le(os, static_cast<std::int32_t>(flow.width()));
  write_le(os, static_cast<std::int32_t>(flow.height()));
  for (double d : flow.data()) write_le(os, static_cast<float>(d));
  if (!os) throw InputError("write failed: " + path.string());
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".png" || ext == ".pfm")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dualvfi
