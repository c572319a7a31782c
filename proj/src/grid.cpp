#include "tryon/grid.hpp"

#include <cmath>

namespace tryon {

Gray8 to_gray8(const Grid3& img) {
    if (img.c != 3) throw std::invalid_argument("to_gray8: expected 3-channel image");
    Gray8 g(img.h, img.w);
    for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
            double luma = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
            long q = std::lround(luma * 255.0);
            g.at(y, x) = static_cast<uint8_t>(clamp(q, 0L, 255L));
        }
    }
    return g;
}

Grid3 resize_bilinear(const Grid3& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize_bilinear: bad output size");
    Grid3 dst(src.c, out_h, out_w);
    const double sy = static_cast<double>(src.h) / out_h;
    const double sx = static_cast<double>(src.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = clamp(y0, 0, src.h - 1);
        int y1c = clamp(y0 + 1, 0, src.h - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = clamp(x0, 0, src.w - 1);
            int x1c = clamp(x0 + 1, 0, src.w - 1);
            for (int ch = 0; ch < src.c; ++ch) {
                double top = (1.0 - wx) * src.at(ch, y0c, x0c) + wx * src.at(ch, y0c, x1c);
                double bot = (1.0 - wx) * src.at(ch, y1c, x0c) + wx * src.at(ch, y1c, x1c);
                dst.at(ch, y, x) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return dst;
}

Grid3 blend_masked(const Grid3& fg, const Grid3& bg, const Grid3& mask) {
    if (!fg.same_shape(bg)) throw std::invalid_argument("blend_masked: fg/bg shape mismatch");
    if (mask.c != 1 || mask.h != fg.h || mask.w != fg.w)
        throw std::invalid_argument("blend_masked: mask shape mismatch");
    Grid3 out(fg.c, fg.h, fg.w);
    for (int ch = 0; ch < fg.c; ++ch)
        for (int y = 0; y < fg.h; ++y)
            for (int x = 0; x < fg.w; ++x) {
                float m = mask.at(0, y, x);
                out.at(ch, y, x) = m * fg.at(ch, y, x) + (1.0f - m) * bg.at(ch, y, x);
            }
    return out;
}

}  // namespace tryon
