#pragma once

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "tritier/error.hpp"

namespace tritier::image {

// ─── Raster ─────────────────────────────────────────────────────────────────

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

    std::size_t stride() const { return static_cast<std::size_t>(width) * 3; }
};

// Allocation guard: refuse rasters above 64M pixels (~192 MB RGB).
inline constexpr std::size_t kMaxPixels = 64ull << 20;

namespace detail {

inline void check_pixel_budget(long long width, long long height) {
    if (width <= 0 || height <= 0 ||
        static_cast<unsigned long long>(width) * static_cast<unsigned long long>(height) >
            kMaxPixels)
        fail(Errc::decode, "image dimensions " + std::to_string(width) + "x" +
                               std::to_string(height) + " outside the supported range");
}

}  // namespace detail

inline std::string sniff_media_type(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) return "image/jpeg";
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
        bytes[3] == 'G')
        return "image/png";
    if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return "image/bmp";
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return "image/x-portable-pixmap";
    return "application/octet-stream";
}

// ─── PPM / PGM ──────────────────────────────────────────────────────────────

namespace detail {

struct PnmHeader {
    int kind = 0;  // 5 or 6
    int width = 0, height = 0, maxval = 0;
    std::size_t data_offset = 0;
};

inline PnmHeader parse_pnm_header(std::span<const std::uint8_t> b) {
    PnmHeader h;
    if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '6'))
        fail(Errc::decode, "not a PNM image");
    h.kind = b[1] - '0';
    std::size_t i = 2;
    int fields[3] = {0, 0, 0};
    for (int f = 0; f < 3; ++f) {
        // skip whitespace and comments
        for (;;) {
            while (i < b.size() && (b[i] == ' ' || b[i] == '\t' || b[i] == '\r' || b[i] == '\n'))
                ++i;
            if (i < b.size() && b[i] == '#') {
                while (i < b.size() && b[i] != '\n') ++i;
            } else {
                break;
            }
        }
        if (i >= b.size() || b[i] < '0' || b[i] > '9')
            fail(Errc::decode, "truncated PNM header");
        long v = 0;
        while (i < b.size() && b[i] >= '0' && b[i] <= '9') {
            v = v * 10 + (b[i] - '0');
            if (v > 1 << 24) fail(Errc::decode, "PNM header value out of range");
            ++i;
        }
        fields[f] = static_cast<int>(v);
    }
    if (i >= b.size()) fail(Errc::decode, "truncated PNM header");
    ++i;  // single whitespace byte after maxval
    h.width = fields[0];
    h.height = fields[1];
    h.maxval = fields[2];
    h.data_offset = i;
    check_pixel_budget(h.width, h.height);
    if (h.maxval <= 0 || h.maxval > 255)
        fail(Errc::decode, "unsupported PNM maxval " + std::to_string(h.maxval));
    return h;
}

inline Raster decode_pnm(std::span<const std::uint8_t> b) {
    const PnmHeader h = parse_pnm_header(b);
    const std::size_t channels = h.kind == 6 ? 3 : 1;
    const std::size_t need =
        static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height) * channels;
    if (b.size() - h.data_offset < need) fail(Errc::decode, "truncated PNM pixel data");
    Raster r;
    r.width = h.width;
    r.height = h.height;
    r.rgb.resize(static_cast<std::size_t>(h.width) * h.height * 3);
    const std::uint8_t* src = b.data() + h.data_offset;
    if (channels == 3) {
        std::memcpy(r.rgb.data(), src, need);
    } else {
        for (std::size_t p = 0; p < need; ++p) {
            r.rgb[3 * p] = r.rgb[3 * p + 1] = r.rgb[3 * p + 2] = src[p];
        }
    }
    return r;
}

// ─── BMP (uncompressed 24/32-bit) ───────────────────────────────────────────

inline std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}
inline std::uint16_t le16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline Raster decode_bmp(std::span<const std::uint8_t> b) {
    if (b.size() < 54) fail(Errc::decode, "truncated BMP header");
    const std::uint32_t data_offset = le32(b.data() + 10);
    const std::uint32_t header_size = le32(b.data() + 14);
    if (header_size < 40) fail(Errc::decode, "unsupported BMP header");
    const auto width = static_cast<std::int32_t>(le32(b.data() + 18));
    auto height = static_cast<std::int32_t>(le32(b.data() + 22));
    const std::uint16_t bpp = le16(b.data() + 28);
    const std::uint32_t compression = le32(b.data() + 30);
    if (compression != 0) fail(Errc::decode, "compressed BMP not supported");
    if (bpp != 24 && bpp != 32) fail(Errc::decode, "unsupported BMP bit depth");
    const bool top_down = height < 0;
    if (top_down) height = -height;
    check_pixel_budget(width, height);
    const std::size_t bytes_pp = bpp / 8;
    const std::size_t row_size = (static_cast<std::size_t>(width) * bytes_pp + 3) & ~std::size_t{3};
    if (b.size() < data_offset + row_size * static_cast<std::size_t>(height))
        fail(Errc::decode, "truncated BMP pixel data");
    Raster r;
    r.width = width;
    r.height = height;
    r.rgb.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::int32_t y = 0; y < height; ++y) {
        const std::int32_t src_y = top_down ? y : height - 1 - y;
        const std::uint8_t* row = b.data() + data_offset + row_size * static_cast<std::size_t>(src_y);
        for (std::int32_t x = 0; x < width; ++x) {
            const std::uint8_t* px = row + bytes_pp * static_cast<std::size_t>(x);
            std::uint8_t* dst = r.rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
            dst[0] = px[2];  // BMP stores BGR
            dst[1] = px[1];
            dst[2] = px[0];
        }
    }
    return r;
}

// ─── JPEG via libjpeg ───────────────────────────────────────────────────────

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit_thrower(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit_thrower;
    Raster r;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        fail(Errc::decode, std::string("jpeg decode failed: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    r.width = static_cast<int>(cinfo.output_width);
    r.height = static_cast<int>(cinfo.output_height);
    if (r.width <= 0 || r.height <= 0 ||
        static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height) > kMaxPixels) {
        jpeg_destroy_decompress(&cinfo);
        fail(Errc::decode, "jpeg dimensions outside the supported range");
    }
    r.rgb.resize(r.stride() * static_cast<std::size_t>(r.height));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = r.rgb.data() + r.stride() * cinfo.output_scanline;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return r;
}

inline std::vector<std::uint8_t> encode_jpeg_impl(const Raster& img, int quality) {
    jpeg_compress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit_thrower;
    std::vector<std::uint8_t> row_copy(img.stride());
    std::vector<std::uint8_t> out;
    unsigned char* out_buf = nullptr;
    unsigned long out_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        fail(Errc::decode, std::string("jpeg encode failed: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out_buf, &out_size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        std::memcpy(row_copy.data(), img.rgb.data() + img.stride() * cinfo.next_scanline,
                    img.stride());
        JSAMPROW row = row_copy.data();
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    out.assign(out_buf, out_buf + out_size);
    std::free(out_buf);
    return out;
}

// ─── PNG via libpng (simplified read API) ───────────────────────────────────

inline Raster decode_png(std::span<const std::uint8_t> bytes) {
    png_image pim;
    std::memset(&pim, 0, sizeof(pim));
    pim.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&pim, bytes.data(), bytes.size()))
        fail(Errc::decode, std::string("png decode failed: ") + pim.message);
    pim.format = PNG_FORMAT_RGB;
    Raster r;
    r.width = static_cast<int>(pim.width);
    r.height = static_cast<int>(pim.height);
    if (r.width <= 0 || r.height <= 0 ||
        static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height) > kMaxPixels) {
        png_image_free(&pim);
        fail(Errc::decode, "png dimensions outside the supported range");
    }
    r.rgb.resize(PNG_IMAGE_SIZE(pim));
    if (!png_image_finish_read(&pim, nullptr, r.rgb.data(), 0, nullptr)) {
        png_image_free(&pim);
        fail(Errc::decode, std::string("png decode failed: ") + pim.message);
    }
    return r;
}

}  // namespace detail

// ─── Public surface ─────────────────────────────────────────────────────────

inline Raster decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) fail(Errc::decode, "image too small to identify");
    const std::string type = sniff_media_type(bytes);
    if (type == "image/jpeg") return detail::decode_jpeg(bytes);
    if (type == "image/png") return detail::decode_png(bytes);
    if (type == "image/bmp") return detail::decode_bmp(bytes);
    if (type == "image/x-portable-pixmap") return detail::decode_pnm(bytes);
    fail(Errc::decode, "unrecognized image format");
}

inline std::vector<std::uint8_t> encode_jpeg(const Raster& img, int quality) {
    if (img.width <= 0 || img.height <= 0 || img.rgb.size() != img.stride() * static_cast<std::size_t>(img.height))
        fail(Errc::validation, "malformed raster");
    return detail::encode_jpeg_impl(img, std::clamp(quality, 1, 100));
}

// Area-averaging downscale; aspect handled by the caller choosing dimensions.
inline Raster resize(const Raster& src, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) fail(Errc::validation, "resize to non-positive size");
    Raster dst;
    dst.width = out_w;
    dst.height = out_h;
    dst.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);
    const double sx = static_cast<double>(src.width) / out_w;
    const double sy = static_cast<double>(src.height) / out_h;
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        const int iy0 = static_cast<int>(y0);
        const int iy1 = std::min(src.height, static_cast<int>(std::ceil(y1)));
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            const int ix0 = static_cast<int>(x0);
            const int ix1 = std::min(src.width, static_cast<int>(std::ceil(x1)));
            double acc[3] = {0, 0, 0};
            double area = 0;
            for (int iy = iy0; iy < iy1; ++iy) {
                const double hy = std::min<double>(y1, iy + 1) - std::max<double>(y0, iy);
                for (int ix = ix0; ix < ix1; ++ix) {
                    const double wx = std::min<double>(x1, ix + 1) - std::max<double>(x0, ix);
                    const double w = hy * wx;
                    const std::uint8_t* px =
                        src.rgb.data() + (static_cast<std::size_t>(iy) * src.width + ix) * 3;
                    acc[0] += w * px[0];
                    acc[1] += w * px[1];
                    acc[2] += w * px[2];
                    area += w;
                }
            }
            std::uint8_t* out = dst.rgb.data() + (static_cast<std::size_t>(oy) * out_w + ox) * 3;
            for (int c = 0; c < 3; ++c)
                out[c] = static_cast<std::uint8_t>(
                    std::clamp(area > 0 ? acc[c] / area + 0.5 : 0.0, 0.0, 255.0));
        }
    }
    return dst;
}

inline constexpr std::size_t kDefaultByteBudget = 3932160;  // 3.75 MB
inline constexpr int kMinLongestSide = 96;

// Re-encodes an image into the byte budget: stepwise JPEG quality reduction
// first, then aspect-preserving downscaling. Inputs already within budget are
// returned unchanged (but must still decode), which also makes the operation
// idempotent on its own output.
inline std::vector<std::uint8_t> compress_image(std::span<const std::uint8_t> bytes,
                                                std::size_t limit = kDefaultByteBudget) {
    const Raster img = decode_image(bytes);
    if (bytes.size() <= limit) return {bytes.begin(), bytes.end()};
    for (int quality : {85, 75, 65, 55, 45, 35, 25}) {
        auto out = encode_jpeg(img, quality);
        if (out.size() <= limit) return out;
    }
    double scale = 1.0;
    for (;;) {
        scale *= 0.70710678118654752;  // halve the pixel count per step
        const int w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
        const int h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
        if (std::max(w, h) < kMinLongestSide)
            fail(Errc::budget, "cannot reach " + std::to_string(limit) +
                                   " bytes above the " + std::to_string(kMinLongestSide) +
                                   "px size floor");
        const Raster small = resize(img, w, h);
        for (int quality : {75, 55, 35}) {
            auto out = encode_jpeg(small, quality);
            if (out.size() <= limit) return out;
        }
    }
}

}  // namespace tritier::image
