#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stereoprop/grid.hpp"
#include "stereoprop/maps.hpp"

namespace stereoprop {

using Bytes = std::vector<std::uint8_t>;

/// Decoded PFM. `grid` is top-down. Non-finite samples (Middlebury stores
/// +inf for unknown disparity) are replaced by 0 and cleared in `valid`.
struct PfmImage {
  Grid grid;
  double scale = -1.0;
  Mask valid;
};

PfmImage read_pfm(std::span<const std::uint8_t> bytes);

/// Header "Pf" or "PF", then "W H", then the scale in shortest round-trip
/// form, each line ending in '\n'. Payload is float32 rows bottom-up in the
/// byte order the scale sign selects (negative = little endian).
Bytes write_pfm(const Grid& grid, double scale = -1.0);

/// KITTI disparity PNG: 16-bit grayscale, disparity = sample / 256, 0 = no
/// measurement.
struct KittiDisparity {
  DisparityMap disparity;
  Mask valid;
};

KittiDisparity read_kitti_disparity(std::span<const std::uint8_t> png);

/// Inverse of read_kitti_disparity. Valid pixels are encoded as
/// clamp(round(d * 256), 1, 65535); invalid ones as 0.
Bytes write_kitti_disparity(const DisparityMap& disparity, const Mask& valid);

/// Raw 16-bit samples of a grayscale PNG, as stored.
struct Gray16 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> samples;
};
Gray16 decode_gray16_png(std::span<const std::uint8_t> png);
Bytes encode_gray16_png(const Gray16& image);

/// 48-bit RGB PNG, channel = round((n + 1) / 2 * 65535).
Bytes write_normal_png(const NormalMap& normals);
/// Channel-wise inverse of write_normal_png without renormalization.
Grid decode_normal_png(std::span<const std::uint8_t> png);
/// decode_normal_png followed by per-pixel renormalization.
NormalMap read_normal_png(std::span<const std::uint8_t> png);

/// 8-bit grayscale PNG, 0 or 255.
Bytes write_mask_png(const Mask& mask);
/// Any 8- or 16-bit grayscale PNG; nonzero samples are set.
Mask read_mask_png(std::span<const std::uint8_t> png);

/// 8-bit RGB PNG from a 3-channel grid; values are rounded and clamped to
/// [0, 255].
Bytes write_rgb8_png(const Grid& rgb);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace stereoprop
