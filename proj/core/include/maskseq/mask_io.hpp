#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskseq/geometry.hpp"

namespace maskseq {

/// PNG masks: 1-, 2-, 4-, 8- or 16-bit, any colour type; a pixel is
/// foreground when its grey value (after libpng conversion) is nonzero.
BinaryMask read_png_mask(const std::filesystem::path& path);
/// Writes an 8-bit greyscale PNG with foreground = 255.
void write_png_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// COCO run-length encoding: column-major runs, starting with a background
/// run (which may be zero).
struct Rle {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint32_t> counts;
};

Rle encode_rle(const BinaryMask& mask);
BinaryMask decode_rle(const Rle& rle);

/// Compressed COCO counts string (LEB128-like, delta coded) as produced by
/// pycocotools.
std::vector<std::uint32_t> decompress_rle_counts(const std::string& counts);
std::string compress_rle_counts(const std::vector<std::uint32_t>& counts);

/// {"size": [h, w], "counts": [...] | "..."}
Rle rle_from_json(const nlohmann::json& j);
nlohmann::json rle_to_json(const Rle& rle);

/// COCO polygon segmentation: list of flat [x0, y0, x1, y1, ...] rings,
/// rasterized individually and united.
BinaryMask mask_from_polygons(const std::vector<std::vector<double>>& polygons,
                              std::uint32_t width, std::uint32_t height);

/// COCO `segmentation` field: polygon list or RLE object. The RLE size must
/// agree with (width, height).
BinaryMask mask_from_segmentation(const nlohmann::json& segmentation, std::uint32_t width,
                                  std::uint32_t height);

/// Reads a mask file by extension: .png, or .json holding an RLE object.
BinaryMask read_mask_file(const std::filesystem::path& path);

}  // namespace maskseq
