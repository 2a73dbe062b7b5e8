#include "maskseq/mask_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

#include "maskseq/error.hpp"

namespace maskseq {

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

BinaryMask read_png_mask(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  if (image.width == 0 || image.height == 0) {
    throw Error(ErrorCode::kIo, "PNG has zero size: " + path.string());
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return BinaryMask(image.width, image.height, std::move(pixels));
}

void write_png_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = mask.width();
  image.height = mask.height();
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> pixels(mask.bits().begin(), mask.bits().end());
  for (auto& p : pixels) p = p ? 255 : 0;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + message);
  }
}

Rle encode_rle(const BinaryMask& mask) {
  Rle rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint32_t x = 0; x < mask.width(); ++x) {
    for (std::uint32_t y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask.at(x, y) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask decode_rle(const Rle& rle) {
  BinaryMask mask(rle.width, rle.height);
  const std::size_t total = static_cast<std::size_t>(rle.width) * rle.height;
  std::size_t pos = 0;
  bool value = false;
  for (const std::uint32_t run : rle.counts) {
    if (pos + run > total) {
      throw Error(ErrorCode::kParse, "RLE counts exceed mask size " + std::to_string(total));
    }
    if (value) {
      for (std::size_t k = pos; k < pos + run; ++k) {
        mask.set(static_cast<std::uint32_t>(k / rle.height),
                 static_cast<std::uint32_t>(k % rle.height));
      }
    }
    pos += run;
    value = !value;
  }
  if (pos != total) {
    throw Error(ErrorCode::kParse, "RLE counts cover " + std::to_string(pos) + " of " +
                                       std::to_string(total) + " pixels");
  }
  return mask;
}

std::vector<std::uint32_t> decompress_rle_counts(const std::string& counts) {
  std::vector<std::uint32_t> out;
  std::size_t p = 0;
  while (p < counts.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= counts.size()) throw ParseError("truncated compressed RLE", p);
      const int c = static_cast<int>(counts[p]) - 48;
      if (c < 0 || c > 63) throw ParseError("invalid compressed RLE character", p);
      if (k >= 12) throw ParseError("compressed RLE value too long", p);
      x |= static_cast<std::int64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<std::int64_t>(-1) * (std::int64_t{1} << (5 * k));
    }
    if (out.size() > 2) x += out[out.size() - 2];
    if (x < 0 || x > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError("compressed RLE run out of range", p);
    }
    out.push_back(static_cast<std::uint32_t>(x));
  }
  return out;
}

std::string compress_rle_counts(const std::vector<std::uint32_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 2) x -= counts[i - 2];
    bool more = true;
    while (more) {
      int c = static_cast<int>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

namespace {

// Parsed JSON stores non-negative integers as unsigned, JSON built in code as
// signed; accept both.
bool is_count(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

}  // namespace

Rle rle_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("counts")) {
    throw Error(ErrorCode::kParse, "RLE object needs 'size' and 'counts'");
  }
  const auto& size = j.at("size");
  if (!size.is_array() || size.size() != 2 || !is_count(size[0]) || !is_count(size[1])) {
    throw Error(ErrorCode::kParse, "RLE 'size' must be [height, width]");
  }
  Rle rle;
  rle.height = size[0].get<std::uint32_t>();
  rle.width = size[1].get<std::uint32_t>();
  const auto& counts = j.at("counts");
  if (counts.is_string()) {
    rle.counts = decompress_rle_counts(counts.get<std::string>());
  } else if (counts.is_array()) {
    for (const auto& c : counts) {
      if (!is_count(c)) throw Error(ErrorCode::kParse, "RLE counts must be unsigned");
      rle.counts.push_back(c.get<std::uint32_t>());
    }
  } else {
    throw Error(ErrorCode::kParse, "RLE 'counts' must be a list or a string");
  }
  return rle;
}

nlohmann::json rle_to_json(const Rle& rle) {
  return nlohmann::json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

BinaryMask mask_from_polygons(const std::vector<std::vector<double>>& polygons,
                              std::uint32_t width, std::uint32_t height) {
  BinaryMask mask(width, height);
  for (const auto& flat : polygons) {
    if (flat.size() % 2 != 0) {
      throw Error(ErrorCode::kParse, "polygon has an odd number of coordinates");
    }
    std::vector<Point> ring;
    ring.reserve(flat.size() / 2);
    for (std::size_t i = 0; i + 1 < flat.size(); i += 2) ring.push_back({flat[i], flat[i + 1]});
    if (ring.size() < 3) continue;
    mask |= rasterize_polygon(ring, width, height);
  }
  return mask;
}

BinaryMask mask_from_segmentation(const nlohmann::json& segmentation, std::uint32_t width,
                                  std::uint32_t height) {
  if (segmentation.is_array()) {
    std::vector<std::vector<double>> polygons;
    for (const auto& poly : segmentation) {
      if (!poly.is_array()) throw Error(ErrorCode::kParse, "polygon must be a list of numbers");
      std::vector<double> flat;
      for (const auto& v : poly) {
        if (!v.is_number()) throw Error(ErrorCode::kParse, "polygon coordinate is not a number");
        flat.push_back(v.get<double>());
      }
      polygons.push_back(std::move(flat));
    }
    return mask_from_polygons(polygons, width, height);
  }
  const Rle rle = rle_from_json(segmentation);
  if (rle.width != width || rle.height != height) {
    throw Error(ErrorCode::kDimensionMismatch, "RLE size does not match image size");
  }
  return decode_rle(rle);
}

BinaryMask read_mask_file(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return read_png_mask(path);
  if (ext == ".json") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON in ") + path.string(), e.byte);
    }
    return decode_rle(rle_from_json(j));
  }
  throw Error(ErrorCode::kIo, "unsupported mask file type: " + path.string());
}

}  // namespace maskseq
