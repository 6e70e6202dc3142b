#include <doctest.h>

#include <cmath>
#include <string>

#include "../support/oracles.hpp"
#include "stereoprop/error.hpp"
#include "stereoprop/io_formats.hpp"

using namespace stereoprop;

namespace {

Bytes bytes_of(const std::string& header, std::initializer_list<std::uint8_t> payload) {
  Bytes b(header.begin(), header.end());
  b.insert(b.end(), payload);
  return b;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("io_formats") {
  TEST_CASE("hand-encoded 1x1 little-endian PFM") {
    // 3.5f = 0x40600000, stored little endian.
    const Bytes file = bytes_of("Pf\n1 1\n-1\n", {0x00, 0x00, 0x60, 0x40});
    const PfmImage img = read_pfm(file);
    CHECK(img.grid.height() == 1);
    CHECK(img.grid.channels() == 1);
    CHECK(img.grid(0, 0) == 3.5);
    CHECK(img.scale == -1.0);
    CHECK(img.valid.count() == 1);
    CHECK(write_pfm(img.grid, img.scale) == file);
  }

  TEST_CASE("big-endian PFM decodes like its little-endian twin") {
    const Bytes big = bytes_of("Pf\n2 1\n1\n", {0x40, 0x60, 0x00, 0x00, 0xbf, 0x80, 0x00, 0x00});
    const Bytes little = bytes_of("Pf\n2 1\n-1\n", {0x00, 0x00, 0x60, 0x40, 0x00, 0x00, 0x80, 0xbf});
    const PfmImage a = read_pfm(big), b = read_pfm(little);
    CHECK(a.grid == b.grid);
    CHECK(a.grid(0, 0) == 3.5);
    CHECK(a.grid(0, 1) == -1.0);
    CHECK(write_pfm(a.grid, a.scale) == big);
  }

  TEST_CASE("PFM rows are stored bottom-up") {
    const Grid g(2, 1, 1, {1.0, 2.0});  // top row 1, bottom row 2
    const Bytes b = write_pfm(g, -1.0);
    const std::size_t payload = b.size() - 8;
    CHECK(b[payload + 2] == 0x00);
    CHECK(b[payload + 3] == 0x40);  // 2.0f = 0x40000000 comes first
    CHECK(read_pfm(b).grid == g);
  }

  TEST_CASE("three-channel PFM round trip preserves the scale") {
    oracle::Random rnd(5);
    Grid g = rnd.grid(3, 4, 3, -10, 10);
    for (double& v : g.data()) v = static_cast<float>(v);
    for (double scale : {-1.0, 0.5, -2.25}) {
      const Bytes b = write_pfm(g, scale);
      const PfmImage img = read_pfm(b);
      CHECK(img.grid == g);
      CHECK(img.scale == scale);
      CHECK(write_pfm(img.grid, img.scale) == b);
    }
  }

  TEST_CASE("non-finite PFM samples become invalid pixels") {
    const Bytes file = bytes_of("Pf\n2 1\n-1\n", {0x00, 0x00, 0x80, 0x7f, 0x00, 0x00, 0x80, 0x3f});
    const PfmImage img = read_pfm(file);
    CHECK(img.grid.all_finite());
    CHECK_FALSE(img.valid(0, 0));
    CHECK(img.valid(0, 1));
    CHECK(img.grid(0, 1) == 1.0);
  }

  TEST_CASE("PFM errors") {
    CHECK(code_of([] { read_pfm(bytes_of("P5\n1 1\n-1\n", {0, 0, 0, 0})); }) ==
          ErrorCode::MalformedHeader);
    CHECK(code_of([] { read_pfm(bytes_of("Pf\n1 x\n-1\n", {0, 0, 0, 0})); }) ==
          ErrorCode::MalformedHeader);
    CHECK(code_of([] { read_pfm(bytes_of("Pf\n2 2\n-1\n", {0, 0, 0, 0})); }) ==
          ErrorCode::TruncatedPayload);
    CHECK(code_of([] { read_pfm(bytes_of("Pf\n1 1\n0\n", {0, 0, 0, 0})); }) ==
          ErrorCode::ZeroScale);
    CHECK(code_of([] { read_pfm(bytes_of("Pf\n1 1", {})); }) ==
          ErrorCode::MalformedHeader);
    CHECK(code_of([] { write_pfm(Grid(1, 1, 2), -1.0); }) ==
          ErrorCode::UnsupportedChannelCount);
  }

  TEST_CASE("KITTI disparity scale and sentinel") {
    const Gray16 img{2, 1, {256, 0}};
    const KittiDisparity k = read_kitti_disparity(encode_gray16_png(img));
    CHECK(k.disparity(0, 0) == 1.0);
    CHECK(k.valid(0, 0));
    CHECK(k.disparity(0, 1) == 0.0);
    CHECK_FALSE(k.valid(0, 1));
  }

  TEST_CASE("KITTI encode/decode is the identity on every 16-bit value") {
    Gray16 img{256, 256, {}};
    img.samples.resize(65536);
    for (std::size_t v = 0; v < 65536; ++v) img.samples[v] = std::uint16_t(v);
    const KittiDisparity k = read_kitti_disparity(encode_gray16_png(img));
    const Gray16 back = decode_gray16_png(write_kitti_disparity(k.disparity, k.valid));
    CHECK(back.samples == img.samples);
  }

  TEST_CASE("KITTI reader rejects other PNG layouts") {
    const Bytes eight_bit = write_mask_png(Mask::filled(2, 2, true));
    CHECK(code_of([&] { read_kitti_disparity(eight_bit); }) == ErrorCode::NotSixteenBit);
    const Bytes garbage{1, 2, 3, 4, 5, 6, 7, 8, 9};
    CHECK(code_of([&] { read_kitti_disparity(garbage); }) == ErrorCode::DecodeError);
    Bytes truncated = encode_gray16_png(Gray16{4, 4, std::vector<std::uint16_t>(16, 9)});
    truncated.resize(truncated.size() / 2);
    CHECK(code_of([&] { read_kitti_disparity(truncated); }) == ErrorCode::DecodeError);
  }

  TEST_CASE("normal PNG channel encoding") {
    const double half = 32768.0 / 65535.0 * 2.0 - 1.0;
    const Grid up = decode_normal_png(write_normal_png(NormalMap::constant(1, 1, {0, 0, 1})));
    CHECK(up(0, 0, 0) == half);
    CHECK(up(0, 0, 1) == half);
    CHECK(up(0, 0, 2) == 1.0);
    // (-1, 0, 0): round(0) = 0, round(32767.5) = 32768 twice.
    const Grid left = decode_normal_png(write_normal_png(NormalMap::constant(1, 1, {-1, 0, 0})));
    CHECK(left(0, 0, 0) == -1.0);
    CHECK(left(0, 0, 1) == half);
    CHECK(left(0, 0, 2) == half);
  }

  TEST_CASE("normal PNG quantization stays within 1/65535 per channel") {
    oracle::Random rnd(9);
    Grid g(7, 9, 3);
    for (std::size_t i = 0; i < g.pixel_count(); ++i) {
      const Vec3 n = normalized({rnd.uniform(-1, 1), rnd.uniform(-1, 1), rnd.uniform(0.05, 1)});
      for (std::size_t c = 0; c < 3; ++c) g.data()[3 * i + c] = n[c];
    }
    const NormalMap normals(g);
    const Bytes png = write_normal_png(normals);
    const Grid raw = decode_normal_png(png);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(raw.data()[i] - g.data()[i]) <= 1.0 / 65535.0);
    }
    const NormalMap unit = read_normal_png(png);
    CHECK(unit.height() == 7);
  }

  TEST_CASE("mask PNG round trip") {
    oracle::Random rnd(2);
    Grid g(5, 6);
    for (double& v : g.data()) v = rnd.uniform(0, 1) < 0.5 ? 1.0 : 0.0;
    const Mask m(g);
    CHECK(read_mask_png(write_mask_png(m)) == m);
  }

  TEST_CASE("file helpers report I/O failures") {
    CHECK(code_of([] { read_file("/nonexistent/dir/file.pfm"); }) == ErrorCode::Io);
    CHECK(code_of([] { write_file("/nonexistent/dir/file.pfm", Bytes{1}); }) == ErrorCode::Io);
  }
}
