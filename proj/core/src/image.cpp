#include "weave/image.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "weave/error.hpp"

namespace weave {

ImageFormat sniff_image_format(std::string_view bytes) {
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) == 0) return ImageFormat::png;
    if (bytes.size() >= 3 && std::memcmp(bytes.data(), "\xff\xd8\xff", 3) == 0) return ImageFormat::jpeg;
    return ImageFormat::unknown;
}

namespace {

constexpr int kMaxSide = 1 << 15;
constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

void check_dims(long w, long h) {
    if (w < 1 || h < 1 || w > kMaxSide || h > kMaxSide || static_cast<std::size_t>(w) * h > kMaxPixels) {
        throw Error("image dimensions out of range");
    }
}

struct PngSource {
    std::string_view data;
    std::size_t pos = 0;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
    auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
    if (src->pos + n > src->data.size()) png_error(png, "unexpected end of data");
    std::memcpy(out, src->data.data() + src->pos, n);
    src->pos += n;
}

void png_error_fn(png_structp png, png_const_charp) { longjmp(png_jmpbuf(png), 1); }
void png_warning_fn(png_structp, png_const_charp) {}

RgbImage decode_png(std::string_view bytes) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    if (png == nullptr) throw Error("png: out of memory");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png: out of memory");
    }
    PngSource src{bytes, 0};
    // Heap-held so nothing the longjmp path touches lives in registers.
    struct State {
        RgbImage img;
        std::vector<png_bytep> rows;
    };
    auto st = std::make_unique<State>();
    volatile bool dims_bad = false;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(dims_bad ? "image dimensions out of range" : "png: decode failed");
    }
    png_set_read_fn(png, &src, png_read_mem);
    png_set_user_limits(png, kMaxSide, kMaxSide);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    if (static_cast<std::size_t>(w) * h > kMaxPixels) {
        dims_bad = true;
        png_error(png, "too large");
    }
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    if (png_get_channels(png, info) != 3) png_error(png, "unexpected channel count");

    RgbImage& img = st->img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    st->rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) st->rows[y] = img.row(static_cast<int>(y));
    png_read_image(png, st->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return std::move(st->img);
}

struct JpegError {
    jpeg_error_mgr mgr;
    jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) { longjmp(reinterpret_cast<JpegError*>(cinfo->err)->jump, 1); }
void jpeg_silent(j_common_ptr, int) {}

RgbImage decode_jpeg(std::string_view bytes) {
    jpeg_decompress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    err.mgr.emit_message = jpeg_silent;
    auto holder = std::make_unique<RgbImage>();
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error("jpeg: decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
        jpeg_destroy_decompress(&cinfo);
        throw Error("jpeg: CMYK not supported");
    }
    if (cinfo.image_width < 1 || cinfo.image_height < 1 || cinfo.image_width > kMaxSide ||
        cinfo.image_height > kMaxSide ||
        static_cast<std::size_t>(cinfo.image_width) * cinfo.image_height > kMaxPixels) {
        jpeg_destroy_decompress(&cinfo);
        throw Error("image dimensions out of range");
    }
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    RgbImage& img = *holder;
    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.row(static_cast<int>(cinfo.output_scanline));
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return std::move(*holder);
}

void png_write_mem(png_structp png, png_bytep data, png_size_t n) {
    static_cast<std::string*>(png_get_io_ptr(png))->append(reinterpret_cast<const char*>(data), n);
}
void png_flush_mem(png_structp) {}

}  // namespace

RgbImage decode_image(std::string_view bytes) {
    switch (sniff_image_format(bytes)) {
        case ImageFormat::png: return decode_png(bytes);
        case ImageFormat::jpeg: return decode_jpeg(bytes);
        case ImageFormat::unknown: break;
    }
    throw Error("unsupported image format");
}

std::string encode_png(const RgbImage& img) {
    check_dims(img.width, img.height);
    auto out = std::make_unique<std::string>();
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    if (png == nullptr) throw Error("png: out of memory");
    png_infop info = png_create_info_struct(png);
    auto rows = std::make_unique<std::vector<png_bytep>>(img.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png: encode failed");
    }
    png_set_write_fn(png, out.get(), png_write_mem, png_flush_mem);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) (*rows)[y] = const_cast<png_bytep>(img.row(y));
    png_write_image(png, rows->data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return std::move(*out);
}

std::string encode_jpeg(const RgbImage& img, int quality) {
    check_dims(img.width, img.height);
    jpeg_compress_struct cinfo{};
    JpegError err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    err.mgr.emit_message = jpeg_silent;
    unsigned char* buf = nullptr;
    unsigned long size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(buf);
        throw Error("jpeg: encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(img.row(static_cast<int>(cinfo.next_scanline)));
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::string out(reinterpret_cast<const char*>(buf), size);
    jpeg_destroy_compress(&cinfo);
    std::free(buf);
    return out;
}

GrayImage to_luma(const RgbImage& img) {
    GrayImage g;
    g.width = img.width;
    g.height = img.height;
    g.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        const std::uint32_t r = img.pixels[3 * i];
        const std::uint32_t gr = img.pixels[3 * i + 1];
        const std::uint32_t b = img.pixels[3 * i + 2];
        g.pixels[i] = static_cast<std::uint8_t>((r * 19595 + gr * 38470 + b * 7471 + 0x8000) >> 16);
    }
    return g;
}

}  // namespace weave
