#include "tryon/sre.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tryon {

size_t BinaryMask::count() const {
    return std::accumulate(v.begin(), v.end(), size_t(0),
                           [](size_t acc, uint8_t b) { return acc + (b ? 1 : 0); });
}

EntropyMap entropy_map(const Gray8& gray, int neighborhood) {
    if (gray.h < 1 || gray.w < 1) throw std::invalid_argument("entropy_map: empty image");
    if (neighborhood < 1 || neighborhood % 2 == 0)
        throw std::invalid_argument("entropy_map: neighborhood must be odd and positive");
    const int r = neighborhood / 2;
    EntropyMap map;
    map.h = gray.h;
    map.w = gray.w;
    map.v.resize(size_t(gray.h) * gray.w);

    int hist[256];
    for (int y = 0; y < gray.h; ++y) {
        for (int x = 0; x < gray.w; ++x) {
            std::fill(std::begin(hist), std::end(hist), 0);
            int y0 = std::max(0, y - r), y1 = std::min(gray.h - 1, y + r);
            int x0 = std::max(0, x - r), x1 = std::min(gray.w - 1, x + r);
            int n = 0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) {
                    ++hist[gray.at(yy, xx)];
                    ++n;
                }
            double entropy = 0.0;
            for (int k = 0; k < 256; ++k) {
                if (hist[k] == 0) continue;
                double p = double(hist[k]) / n;
                entropy -= p * std::log2(p);
            }
            map.at(y, x) = static_cast<float>(entropy);
        }
    }
    return map;
}

MaskResult high_entropy_mask(const EntropyMap& map, const SreParams& params) {
    float max_val = 0.0f;
    for (float x : map.v) max_val = std::max(max_val, x);

    std::vector<double> norm(map.v.size());
    if (params.normalize && max_val > 0.0f) {
        for (size_t i = 0; i < map.v.size(); ++i) norm[i] = map.v[i] / max_val;
    } else if (params.normalize) {
        std::fill(norm.begin(), norm.end(), 0.0);  // all-zero map stays zero
    } else {
        for (size_t i = 0; i < map.v.size(); ++i) norm[i] = map.v[i];
    }

    MaskResult res;
    res.mask = BinaryMask(map.h, map.w);
    // step counting avoids drift from repeated subtraction
    for (int k = 0;; ++k) {
        double e = params.threshold - k * params.e_step;
        if (e < params.e_min - 1e-12) {
            res.used_threshold = params.threshold - (k - 1) * params.e_step;
            res.empty = true;
            std::fill(res.mask.v.begin(), res.mask.v.end(), uint8_t(0));
            return res;
        }
        size_t cnt = 0;
        for (size_t i = 0; i < norm.size(); ++i) {
            bool hit = norm[i] > e;
            res.mask.v[i] = hit ? 1 : 0;
            cnt += hit ? 1 : 0;
        }
        if (cnt > 0) {
            res.used_threshold = e;
            res.empty = false;
            return res;
        }
    }
}

std::pair<int, int> entropy_centroid(const BinaryMask& mask, int img_w, int img_h) {
    size_t cnt = mask.count();
    if (cnt == 0) return {img_w / 2, img_h / 2};
    double sx = 0.0, sy = 0.0;
    for (int y = 0; y < mask.h; ++y)
        for (int x = 0; x < mask.w; ++x)
            if (mask.at(y, x)) {
                sx += x;
                sy += y;
            }
    return {static_cast<int>(std::lround(sx / cnt)), static_cast<int>(std::lround(sy / cnt))};
}

namespace {

double strip_fraction(const BinaryMask& mask, int x0, int y0, int x1, int y1) {
    // half-open box [x0,x1) x [y0,y1), already clamped by caller
    long area = long(x1 - x0) * (y1 - y0);
    if (area <= 0) return 0.0;
    long hits = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) hits += mask.at(y, x) ? 1 : 0;
    return double(hits) / double(area);
}

}  // namespace

Box expand_region(const BinaryMask& mask, int cx, int cy, const SreParams& params) {
    const int W = mask.w, H = mask.h;
    Box b;
    b.w = std::min(params.l_min, W);
    b.h = std::min(params.l_min, H);
    b.x0 = clamp(cx - b.w / 2, 0, W - b.w);
    b.y0 = clamp(cy - b.h / 2, 0, H - b.h);

    bool grew = true;
    while (grew) {
        grew = false;
        // up
        if (b.y0 > 0) {
            int ny0 = std::max(0, b.y0 - params.expand_step);
            if (strip_fraction(mask, b.x0, ny0, b.x0 + b.w, b.y0) >= params.edge_frac) {
                b.h += b.y0 - ny0;
                b.y0 = ny0;
                grew = true;
            }
        }
        // right
        if (b.x0 + b.w < W) {
            int nx1 = std::min(W, b.x0 + b.w + params.expand_step);
            if (strip_fraction(mask, b.x0 + b.w, b.y0, nx1, b.y0 + b.h) >= params.edge_frac) {
                b.w = nx1 - b.x0;
                grew = true;
            }
        }
        // down
        if (b.y0 + b.h < H) {
            int ny1 = std::min(H, b.y0 + b.h + params.expand_step);
            if (strip_fraction(mask, b.x0, b.y0 + b.h, b.x0 + b.w, ny1) >= params.edge_frac) {
                b.h = ny1 - b.y0;
                grew = true;
            }
        }
        // left
        if (b.x0 > 0) {
            int nx0 = std::max(0, b.x0 - params.expand_step);
            if (strip_fraction(mask, nx0, b.y0, b.x0, b.y0 + b.h) >= params.edge_frac) {
                b.w += b.x0 - nx0;
                b.x0 = nx0;
                grew = true;
            }
        }
    }
    return b;
}

Box adjust_aspect(Box box, int img_w, int img_h) {
    // target sizes: smallest (tw, th) >= (w, h) with tw/th == img_w/img_h up
    // to rounding
    long cross_w = long(box.w) * img_h;
    long cross_h = long(box.h) * img_w;
    int tw = box.w, th = box.h;
    if (cross_w < cross_h) {
        tw = static_cast<int>(std::lround(double(box.h) * img_w / img_h));
        tw = std::max(tw, box.w);
    } else if (cross_w > cross_h) {
        th = static_cast<int>(std::lround(double(box.w) * img_h / img_w));
        th = std::max(th, box.h);
    }
    if (tw > img_w || th > img_h) {
        tw = img_w;
        th = img_h;
    }

    Box out;
    out.w = tw;
    out.h = th;
    // grow symmetrically around the original box, then shift into bounds
    out.x0 = clamp(box.x0 - (tw - box.w) / 2, 0, img_w - tw);
    out.y0 = clamp(box.y0 - (th - box.h) / 2, 0, img_h - th);
    return out;
}

SalientRegion adjust_aspect_and_extract(const Grid3& image, Box box, const SreParams& params) {
    Box adj = adjust_aspect(box, image.w, image.h);
    Grid3 crop(image.c, adj.h, adj.w);
    for (int ch = 0; ch < image.c; ++ch)
        for (int y = 0; y < adj.h; ++y)
            for (int x = 0; x < adj.w; ++x) crop.at(ch, y, x) = image.at(ch, adj.y0 + y, adj.x0 + x);
    SalientRegion region;
    region.bbox = adj;
    region.crop = resize_bilinear(crop, params.out_size, params.out_size);
    return region;
}

SalientRegion extract_salient(const Grid3& image, const SreParams& params) {
    Gray8 gray = to_gray8(image);
    EntropyMap map = entropy_map(gray, params.neighborhood);
    MaskResult mr = high_entropy_mask(map, params);
    auto [cx, cy] = entropy_centroid(mr.mask, image.w, image.h);
    Box box = expand_region(mr.mask, cx, cy, params);
    SalientRegion region = adjust_aspect_and_extract(image, box, params);
    region.used_threshold = mr.used_threshold;
    region.fallback_used = mr.empty;
    return region;
}

}  // namespace tryon
