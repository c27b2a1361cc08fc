#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace weave {

enum class ImageFormat { unknown, png, jpeg };

ImageFormat sniff_image_format(std::string_view bytes);

/// 8-bit interleaved RGB raster.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width * 3; }
    const std::uint8_t* row(int y) const { return pixels.data() + static_cast<std::size_t>(y) * width * 3; }
};

/// 8-bit single-channel raster.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Decodes PNG or JPEG to RGB. Alpha is dropped, palettes expanded, 16-bit
/// samples reduced to 8. Throws weave::Error when the bytes do not decode.
RgbImage decode_image(std::string_view bytes);

std::string encode_png(const RgbImage& img);
std::string encode_jpeg(const RgbImage& img, int quality = 90);

/// BT.601 luma in 16-bit fixed point: (19595 R + 38470 G + 7471 B + 0x8000) >> 16.
GrayImage to_luma(const RgbImage& img);

}  // namespace weave
