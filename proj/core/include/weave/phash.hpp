#pragma once

#include <cstdint>
#include <string_view>

#include "weave/image.hpp"

namespace weave {

/// Separable Lanczos-3 resample in the 8-bit fixed-point arithmetic used by
/// common imaging libraries (horizontal pass, then vertical, rounding to
/// 8 bits in between).
GrayImage resize_lanczos(const GrayImage& in, int out_w, int out_h);

/// 64-bit DCT perceptual hash: luma, 32x32 Lanczos resize, 2-D DCT-II,
/// top-left 8x8 block thresholded at its median, row-major MSB first.
std::uint64_t phash(const GrayImage& gray);
std::uint64_t phash(const RgbImage& img);
/// Decodes then hashes; throws weave::Error when undecodable.
std::uint64_t phash_bytes(std::string_view encoded);

int hamming_distance(std::uint64_t a, std::uint64_t b);

}  // namespace weave
