#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tryon/util.hpp"

namespace tryon {

// Dense channel-major planes: v[(c*h + y)*w + x]. Carries both pixel-space
// images (values nominally in [0,1]) and 4-channel latent grids.
template <typename T>
struct GridT {
    int c = 0, h = 0, w = 0;
    std::vector<T> v;

    GridT() = default;
    GridT(int c_, int h_, int w_, T fill = T(0)) : c(c_), h(h_), w(w_), v(size_t(c_) * h_ * w_, fill) {}

    T& at(int ch, int y, int x) { return v[(size_t(ch) * h + y) * w + x]; }
    T at(int ch, int y, int x) const { return v[(size_t(ch) * h + y) * w + x]; }
    size_t count() const { return v.size(); }
    bool same_shape(const GridT& o) const { return c == o.c && h == o.h && w == o.w; }
};

using Grid3 = GridT<float>;
using Grid3d = GridT<double>;

// 8-bit single-channel image, the entropy-map input format.
struct Gray8 {
    int h = 0, w = 0;
    std::vector<uint8_t> v;

    Gray8() = default;
    Gray8(int h_, int w_, uint8_t fill = 0) : h(h_), w(w_), v(size_t(h_) * w_, fill) {}
    uint8_t& at(int y, int x) { return v[size_t(y) * w + x]; }
    uint8_t at(int y, int x) const { return v[size_t(y) * w + x]; }
};

inline Grid3d widen(const Grid3& g) {
    Grid3d out(g.c, g.h, g.w);
    for (size_t i = 0; i < g.v.size(); ++i) out.v[i] = g.v[i];
    return out;
}

inline Grid3 narrow(const Grid3d& g) {
    Grid3 out(g.c, g.h, g.w);
    for (size_t i = 0; i < g.v.size(); ++i) out.v[i] = static_cast<float>(g.v[i]);
    return out;
}

// Rec.601 luma, quantized to 8 bits.
Gray8 to_gray8(const Grid3& img);

// Bilinear resample with half-pixel centers. Works per channel.
Grid3 resize_bilinear(const Grid3& src, int out_h, int out_w);

// out = mask*fg + (1-mask)*bg, pixel space; mask is 1xHxW.
Grid3 blend_masked(const Grid3& fg, const Grid3& bg, const Grid3& mask);

inline Grid3 clamp01(Grid3 g) {
    for (float& x : g.v) x = clamp(x, 0.0f, 1.0f);
    return g;
}

}  // namespace tryon
