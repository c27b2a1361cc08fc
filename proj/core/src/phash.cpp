#include "weave/phash.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

namespace weave {

namespace {

constexpr int kPrecisionBits = 32 - 8 - 2;
constexpr double kLanczosSupport = 3.0;

double sinc(double x) {
    if (x == 0.0) return 1.0;
    x *= std::numbers::pi;
    return std::sin(x) / x;
}

double lanczos(double x) {
    if (-3.0 <= x && x < 3.0) return sinc(x) * sinc(x / 3.0);
    return 0.0;
}

struct Coeffs {
    int ksize = 0;
    std::vector<int> bounds;   // (xmin, count) per output pixel
    std::vector<std::int32_t> k;
};

Coeffs precompute(int in_size, int out_size) {
    const double scale = static_cast<double>(in_size) / out_size;
    const double filterscale = std::max(scale, 1.0);
    const double support = kLanczosSupport * filterscale;
    Coeffs c;
    c.ksize = static_cast<int>(std::ceil(support)) * 2 + 1;
    c.bounds.resize(static_cast<std::size_t>(out_size) * 2);
    c.k.assign(static_cast<std::size_t>(out_size) * c.ksize, 0);
    std::vector<double> w(c.ksize);
    for (int xx = 0; xx < out_size; ++xx) {
        const double center = (xx + 0.5) * scale;
        const double ss = 1.0 / filterscale;
        int xmin = static_cast<int>(center - support + 0.5);
        if (xmin < 0) xmin = 0;
        int xmax = static_cast<int>(center + support + 0.5);
        if (xmax > in_size) xmax = in_size;
        xmax -= xmin;
        double total = 0.0;
        for (int x = 0; x < xmax; ++x) {
            w[x] = lanczos((x + xmin - center + 0.5) * ss);
            total += w[x];
        }
        for (int x = 0; x < xmax; ++x) {
            const double v = total != 0.0 ? w[x] / total : w[x];
            c.k[static_cast<std::size_t>(xx) * c.ksize + x] =
                static_cast<std::int32_t>(v < 0 ? -0.5 + v * (1 << kPrecisionBits) : 0.5 + v * (1 << kPrecisionBits));
        }
        c.bounds[2 * xx] = xmin;
        c.bounds[2 * xx + 1] = xmax;
    }
    return c;
}

std::uint8_t clip8(std::int64_t v) {
    if (v >= (std::int64_t{1} << kPrecisionBits << 8)) return 255;
    if (v <= 0) return 0;
    return static_cast<std::uint8_t>(v >> kPrecisionBits);
}

}  // namespace

GrayImage resize_lanczos(const GrayImage& in, int out_w, int out_h) {
    GrayImage cur = in;
    if (out_w != in.width) {
        const Coeffs c = precompute(in.width, out_w);
        GrayImage tmp;
        tmp.width = out_w;
        tmp.height = cur.height;
        tmp.pixels.resize(static_cast<std::size_t>(out_w) * cur.height);
        for (int y = 0; y < cur.height; ++y) {
            const std::uint8_t* src = cur.pixels.data() + static_cast<std::size_t>(y) * cur.width;
            for (int xx = 0; xx < out_w; ++xx) {
                const int xmin = c.bounds[2 * xx];
                const int n = c.bounds[2 * xx + 1];
                const std::int32_t* k = c.k.data() + static_cast<std::size_t>(xx) * c.ksize;
                std::int64_t acc = std::int64_t{1} << (kPrecisionBits - 1);
                for (int x = 0; x < n; ++x) acc += static_cast<std::int64_t>(src[xmin + x]) * k[x];
                tmp.pixels[static_cast<std::size_t>(y) * out_w + xx] = clip8(acc);
            }
        }
        cur = std::move(tmp);
    }
    if (out_h != in.height) {
        const Coeffs c = precompute(in.height, out_h);
        GrayImage tmp;
        tmp.width = cur.width;
        tmp.height = out_h;
        tmp.pixels.resize(static_cast<std::size_t>(cur.width) * out_h);
        for (int yy = 0; yy < out_h; ++yy) {
            const int ymin = c.bounds[2 * yy];
            const int n = c.bounds[2 * yy + 1];
            const std::int32_t* k = c.k.data() + static_cast<std::size_t>(yy) * c.ksize;
            for (int x = 0; x < cur.width; ++x) {
                std::int64_t acc = std::int64_t{1} << (kPrecisionBits - 1);
                for (int y = 0; y < n; ++y) {
                    acc += static_cast<std::int64_t>(cur.pixels[static_cast<std::size_t>(ymin + y) * cur.width + x]) * k[y];
                }
                tmp.pixels[static_cast<std::size_t>(yy) * cur.width + x] = clip8(acc);
            }
        }
        cur = std::move(tmp);
    }
    return cur;
}

namespace {

constexpr int kSide = 32;
constexpr int kBlock = 8;

// Unnormalized DCT-II along one axis: y[k] = 2 * sum_n x[n] cos(pi k (2n+1) / 2N).
const std::array<double, kSide * kSide>& dct_table() {
    static const auto table = [] {
        std::array<double, kSide * kSide> t{};
        for (int k = 0; k < kSide; ++k) {
            for (int n = 0; n < kSide; ++n) {
                t[k * kSide + n] = 2.0 * std::cos(std::numbers::pi * k * (2 * n + 1) / (2.0 * kSide));
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

std::uint64_t phash(const GrayImage& gray) {
    const GrayImage small = resize_lanczos(gray, kSide, kSide);
    const auto& t = dct_table();

    // Axis 0 (down columns), only the first kBlock output rows are needed.
    std::array<double, kBlock * kSide> cols{};
    for (int k = 0; k < kBlock; ++k) {
        for (int x = 0; x < kSide; ++x) {
            double acc = 0.0;
            for (int n = 0; n < kSide; ++n) acc += t[k * kSide + n] * small.pixels[n * kSide + x];
            cols[k * kSide + x] = acc;
        }
    }
    std::array<double, kBlock * kBlock> block{};
    for (int r = 0; r < kBlock; ++r) {
        for (int k = 0; k < kBlock; ++k) {
            double acc = 0.0;
            for (int n = 0; n < kSide; ++n) acc += t[k * kSide + n] * cols[r * kSide + n];
            // exact zeros for constant or symmetric input
            block[r * kBlock + k] = std::abs(acc) < 1e-6 ? 0.0 : acc;
        }
    }

    std::array<double, kBlock * kBlock> sorted = block;
    std::sort(sorted.begin(), sorted.end());
    const double median = (sorted[31] + sorted[32]) / 2.0;
    std::uint64_t bits = 0;
    for (double v : block) bits = (bits << 1) | (v > median ? 1u : 0u);
    return bits;
}

std::uint64_t phash(const RgbImage& img) { return phash(to_luma(img)); }

std::uint64_t phash_bytes(std::string_view encoded) { return phash(decode_image(encoded)); }

int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace weave
