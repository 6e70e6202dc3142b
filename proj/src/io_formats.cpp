#include "stereoprop/io_formats.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "stereoprop/error.hpp"

namespace stereoprop {
namespace {

// ---------------------------------------------------------------- PFM

class HeaderCursor {
 public:
  explicit HeaderCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (start == pos_) {
      throw Error(ErrorCode::MalformedHeader, "PFM header ended early");
    }
    return {reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start};
  }

  // Exactly one whitespace byte separates the scale from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedHeader, "PFM header not terminated");
    }
    return pos_ + 1;
  }

 private:
  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\n' || c == '\r' || c == '\t';
  }
  void skip_space() {
    while (pos_ < bytes_.size() && is_space(bytes_[pos_])) ++pos_;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <class T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::MalformedHeader,
                std::string("PFM ") + what + " is not a number: " +
                    std::string(s));
  }
  return value;
}

float load_float(const std::uint8_t* p, bool little) {
  std::uint32_t bits = 0;
  if (little) {
    bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
           std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  } else {
    bits = std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
           std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24;
  }
  return std::bit_cast<float>(bits);
}

void store_float(float f, bool little, Bytes& out) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  const std::uint8_t b[4] = {
      static_cast<std::uint8_t>(bits), static_cast<std::uint8_t>(bits >> 8),
      static_cast<std::uint8_t>(bits >> 16),
      static_cast<std::uint8_t>(bits >> 24)};
  if (little) {
    out.insert(out.end(), b, b + 4);
  } else {
    out.insert(out.end(), {b[3], b[2], b[1], b[0]});
  }
}

// ---------------------------------------------------------------- PNG

struct RawPng {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::size_t channels = 0;
  Bytes pixels;  // rows top-down, samples big-endian as stored
};

struct MemoryReader {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->pos + n > src->data.size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, src->data.data() + src->pos, n);
  src->pos += n;
}

void write_callback(png_structp png, png_bytep in, png_size_t n) {
  auto* dst = static_cast<Bytes*>(png_get_io_ptr(png));
  dst->insert(dst->end(), in, in + n);
}

void flush_callback(png_structp) {}

void silent_warning(png_structp, png_const_charp) {}

// Keeps libpng's message for the thrown Error instead of printing it.
using PngMessage = std::array<char, 128>;

[[noreturn]] void record_error(png_structp png, png_const_charp msg) {
  auto* out = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (out) std::snprintf(out->data(), out->size(), "%s", msg);
  png_longjmp(png, 1);
}

RawPng decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::DecodeError, "not a PNG stream");
  }
  PngMessage message{};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           record_error, silent_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError, "libpng initialization failed");
  }
  MemoryReader reader{bytes, 0};
  RawPng raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError,
                std::string("corrupt PNG stream: ") + message.data());
  }
  png_set_read_fn(png, &reader, read_callback);
  png_read_info(png, info);
  raw.width = png_get_image_width(png, info);
  raw.height = png_get_image_height(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  raw.color_type = png_get_color_type(png, info);
  if (raw.color_type == PNG_COLOR_TYPE_GRAY && raw.bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    raw.bit_depth = 8;
  }
  png_read_update_info(png, info);
  raw.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.pixels.resize(stride * raw.height);
  rows.resize(raw.height);
  for (std::size_t y = 0; y < raw.height; ++y) {
    rows[y] = raw.pixels.data() + y * stride;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

Bytes encode_png(std::size_t width, std::size_t height, int color_type,
                 int bit_depth, const Bytes& pixels) {
  PngMessage message{};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            record_error, silent_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "libpng initialization failed");
  }
  Bytes out;
  std::vector<png_bytep> rows(height);
  const std::size_t stride = height ? pixels.size() / height : 0;
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels.data() + y * stride);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io,
                std::string("PNG encoding failed: ") + message.data());
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::uint16_t sample16(const Bytes& px, std::size_t index) {
  return static_cast<std::uint16_t>(px[2 * index] << 8 | px[2 * index + 1]);
}

void put16(Bytes& px, std::uint16_t v) {
  px.push_back(static_cast<std::uint8_t>(v >> 8));
  px.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint16_t encode_unit(double v) {
  const double q = std::round((v + 1.0) / 2.0 * 65535.0);
  return static_cast<std::uint16_t>(std::clamp(q, 0.0, 65535.0));
}

}  // namespace

PfmImage read_pfm(std::span<const std::uint8_t> bytes) {
  HeaderCursor cursor(bytes);
  const std::string_view magic = cursor.token();
  std::size_t channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw Error(ErrorCode::MalformedHeader,
                "PFM magic must be Pf or PF, got " + std::string(magic));
  }
  const auto width = parse_number<long>(cursor.token(), "width");
  const auto height = parse_number<long>(cursor.token(), "height");
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::MalformedHeader, "PFM dimensions must be positive");
  }
  const auto scale = parse_number<double>(cursor.token(), "scale");
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorCode::ZeroScale, "PFM scale must be a nonzero number");
  }
  const std::size_t offset = cursor.payload_offset();
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  const std::size_t need = w * h * channels * 4;
  if (bytes.size() < offset || bytes.size() - offset < need) {
    throw Error(ErrorCode::TruncatedPayload,
                "PFM payload has " + std::to_string(bytes.size() - offset) +
                    " bytes, expected " + std::to_string(need));
  }
  const bool little = scale < 0.0;
  PfmImage img{Grid(h, w, channels), scale, Mask::filled(h, w, true)};
  Grid valid(h, w, 1, 1.0);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = h - 1 - row;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c, p += 4) {
        const double v = load_float(p, little);
        if (std::isfinite(v)) {
          img.grid(y, x, c) = v;
        } else {
          valid(y, x) = 0.0;
        }
      }
    }
  }
  img.valid = Mask(std::move(valid));
  return img;
}

Bytes write_pfm(const Grid& grid, double scale) {
  if (grid.channels() != 1 && grid.channels() != 3) {
    throw Error(ErrorCode::UnsupportedChannelCount,
                "PFM stores 1 or 3 channels, got " +
                    std::to_string(grid.channels()));
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorCode::ZeroScale, "PFM scale must be a nonzero number");
  }
  char num[64];
  const auto res = std::to_chars(num, num + sizeof num, scale);
  std::string header = grid.channels() == 1 ? "Pf\n" : "PF\n";
  header += std::to_string(grid.width()) + " " +
            std::to_string(grid.height()) + "\n";
  header.append(num, res.ptr);
  header += "\n";

  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + grid.size() * 4);
  const bool little = scale < 0.0;
  for (std::size_t row = 0; row < grid.height(); ++row) {
    const std::size_t y = grid.height() - 1 - row;
    for (std::size_t x = 0; x < grid.width(); ++x) {
      for (std::size_t c = 0; c < grid.channels(); ++c) {
        store_float(static_cast<float>(grid(y, x, c)), little, out);
      }
    }
  }
  return out;
}

Gray16 decode_gray16_png(std::span<const std::uint8_t> png) {
  RawPng raw = decode_png(png);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY || raw.bit_depth != 16) {
    throw Error(ErrorCode::NotSixteenBit,
                "expected 16-bit grayscale PNG, got depth " +
                    std::to_string(raw.bit_depth) + " color type " +
                    std::to_string(raw.color_type));
  }
  Gray16 img{raw.width, raw.height, {}};
  img.samples.resize(raw.width * raw.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    img.samples[i] = sample16(raw.pixels, i);
  }
  return img;
}

Bytes encode_gray16_png(const Gray16& image) {
  if (image.samples.size() != image.width * image.height) {
    throw Error(ErrorCode::ShapeMismatch, "Gray16 sample count mismatch");
  }
  Bytes px;
  px.reserve(image.samples.size() * 2);
  for (std::uint16_t v : image.samples) put16(px, v);
  return encode_png(image.width, image.height, PNG_COLOR_TYPE_GRAY, 16, px);
}

KittiDisparity read_kitti_disparity(std::span<const std::uint8_t> png) {
  const Gray16 img = decode_gray16_png(png);
  Grid d(img.height, img.width, 1);
  Grid valid(img.height, img.width, 1);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    d.data()[i] = img.samples[i] / 256.0;
    valid.data()[i] = img.samples[i] != 0 ? 1.0 : 0.0;
  }
  return {DisparityMap(std::move(d)), Mask(std::move(valid))};
}

Bytes write_kitti_disparity(const DisparityMap& disparity, const Mask& valid) {
  if (!disparity.grid().same_shape(valid.grid())) {
    throw Error(ErrorCode::ShapeMismatch, "disparity and mask shapes differ");
  }
  Gray16 img{disparity.width(), disparity.height(), {}};
  img.samples.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (valid.grid().data()[i] == 0.0) continue;
    const double q = std::round(disparity.grid().data()[i] * 256.0);
    img.samples[i] = static_cast<std::uint16_t>(std::clamp(q, 1.0, 65535.0));
  }
  return encode_gray16_png(img);
}

Bytes write_normal_png(const NormalMap& normals) {
  Bytes px;
  px.reserve(normals.grid().size() * 2);
  for (double v : normals.grid().data()) put16(px, encode_unit(v));
  return encode_png(normals.width(), normals.height(), PNG_COLOR_TYPE_RGB, 16,
                    px);
}

Grid decode_normal_png(std::span<const std::uint8_t> png) {
  RawPng raw = decode_png(png);
  if (raw.color_type != PNG_COLOR_TYPE_RGB || raw.bit_depth != 16) {
    throw Error(ErrorCode::NotSixteenBit, "expected 48-bit RGB normal PNG");
  }
  Grid g(raw.height, raw.width, 3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.data()[i] = sample16(raw.pixels, i) / 65535.0 * 2.0 - 1.0;
  }
  return g;
}

NormalMap read_normal_png(std::span<const std::uint8_t> png) {
  Grid g = decode_normal_png(png);
  for (std::size_t i = 0; i < g.pixel_count(); ++i) {
    auto px = g.data().subspan(3 * i, 3);
    const Vec3 n = normalized({px[0], px[1], px[2]});
    std::copy(n.begin(), n.end(), px.begin());
  }
  return NormalMap(std::move(g));
}

Bytes write_mask_png(const Mask& mask) {
  Bytes px(mask.grid().size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = mask.grid().data()[i] != 0.0 ? 255 : 0;
  }
  return encode_png(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 8, px);
}

Mask read_mask_png(std::span<const std::uint8_t> png) {
  RawPng raw = decode_png(png);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY) {
    throw Error(ErrorCode::DecodeError, "mask PNG must be grayscale");
  }
  Grid g(raw.height, raw.width, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const unsigned v =
        raw.bit_depth == 16 ? sample16(raw.pixels, i) : raw.pixels[i];
    g.data()[i] = v != 0 ? 1.0 : 0.0;
  }
  return Mask(std::move(g));
}

Bytes write_rgb8_png(const Grid& rgb) {
  if (rgb.channels() != 3) {
    throw Error(ErrorCode::UnsupportedChannelCount, "RGB PNG needs 3 channels");
  }
  Bytes px(rgb.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(
        std::clamp(std::round(rgb.data()[i]), 0.0, 255.0));
  }
  return encode_png(rgb.width(), rgb.height(), PNG_COLOR_TYPE_RGB, 8, px);
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace stereoprop
