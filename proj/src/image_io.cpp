#include "tryon/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tryon {

namespace {

struct FileCloser {
    void operator()(FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(float v) {
    long q = std::lround(static_cast<double>(v) * 255.0);
    return static_cast<uint8_t>(clamp(q, 0L, 255L));
}

void write_png_rows(const std::string& path, int h, int w, int color_type,
                    const std::vector<uint8_t>& rows_data, int row_bytes) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("write_png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: failure writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(rows_data.data() + size_t(y) * row_bytes);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string& path, const Grid3& img) {
    if (img.c != 1 && img.c != 3) throw std::invalid_argument("write_png: 1 or 3 channels only");
    int row_bytes = img.w * img.c;
    std::vector<uint8_t> data(size_t(img.h) * row_bytes);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < img.c; ++ch)
                data[size_t(y) * row_bytes + x * img.c + ch] = quantize(img.at(ch, y, x));
    write_png_rows(path, img.h, img.w, img.c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                   data, row_bytes);
}

void write_png_gray8(const std::string& path, const Gray8& img) {
    write_png_rows(path, img.h, img.w, PNG_COLOR_TYPE_GRAY, img.v, img.w);
}

Grid3 read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("read_png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: failure reading " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_packing(png);
    png_set_expand(png);
    int color = png_get_color_type(png, info);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int w = png_get_image_width(png, info);
    int h = png_get_image_height(png, info);
    int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: unsupported channel count in " + path);
    }

    std::vector<uint8_t> data(size_t(h) * w * channels);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = data.data() + size_t(y) * w * channels;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Grid3 img(channels, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < channels; ++ch)
                img.at(ch, y, x) = data[size_t(y) * w * channels + x * channels + ch] / 255.0f;
    return img;
}

void write_f32_blob(const std::string& path, const float* data, size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_f32_blob: cannot open " + path);
    out.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(float)));
    if (!out) throw std::runtime_error("write_f32_blob: short write to " + path);
}

std::vector<float> read_f32_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("read_f32_blob: cannot open " + path);
    std::streamsize bytes = in.tellg();
    if (bytes % sizeof(float) != 0) throw std::runtime_error("read_f32_blob: misaligned size in " + path);
    std::vector<float> data(size_t(bytes) / sizeof(float));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(data.data()), bytes);
    if (!in) throw std::runtime_error("read_f32_blob: short read from " + path);
    return data;
}

void write_tensor(const std::string& path, const float* data,
                  const std::vector<int>& shape, const std::string& extra_json) {
    size_t n = 1;
    for (int d : shape) n *= size_t(d);
    write_f32_blob(path, data, n);
    nlohmann::json meta = nlohmann::json::parse(extra_json);
    meta["shape"] = shape;
    meta["dtype"] = "f32";
    std::ofstream side(path + ".json");
    if (!side) throw std::runtime_error("write_tensor: cannot open sidecar for " + path);
    side << meta.dump(2) << "\n";
}

std::vector<float> read_tensor(const std::string& path, std::vector<int>& shape_out) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("read_tensor: missing sidecar " + path + ".json");
    nlohmann::json meta = nlohmann::json::parse(side);
    shape_out = meta.at("shape").get<std::vector<int>>();
    std::vector<float> data = read_f32_blob(path);
    size_t n = 1;
    for (int d : shape_out) n *= size_t(d);
    if (data.size() != n) throw std::runtime_error("read_tensor: blob/sidecar shape mismatch for " + path);
    return data;
}

}  // namespace tryon
