#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tryon/grid.hpp"

namespace tryon {

// Entropy values in bits, bounded by log2(min(|N|, 256)).
struct EntropyMap {
    int h = 0, w = 0;
    std::vector<float> v;
    float at(int y, int x) const { return v[size_t(y) * w + x]; }
    float& at(int y, int x) { return v[size_t(y) * w + x]; }
};

struct BinaryMask {
    int h = 0, w = 0;
    std::vector<uint8_t> v;
    BinaryMask() = default;
    BinaryMask(int h_, int w_) : h(h_), w(w_), v(size_t(h_) * w_, 0) {}
    uint8_t at(int y, int x) const { return v[size_t(y) * w + x]; }
    uint8_t& at(int y, int x) { return v[size_t(y) * w + x]; }
    size_t count() const;
    bool empty() const { return count() == 0; }
};

struct SreParams {
    int neighborhood = 5;       // odd window side for the entropy histogram
    double threshold = 0.8;     // starting threshold E
    double e_min = 0.3;         // adaptive floor
    double e_step = 0.05;       // adaptive decrement
    int l_min = 16;             // minimum bbox side
    int expand_step = 8;        // growth increment per edge
    double edge_frac = 0.05;    // min fraction of mask pixels in a new edge strip
    int out_size = 32;          // crop output side
    bool normalize = true;      // threshold the max-normalized map; raw bits otherwise
};

struct Box {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

struct MaskResult {
    BinaryMask mask;
    double used_threshold = 0.0;
    bool empty = true;
};

struct SalientRegion {
    Box bbox;
    Grid3 crop;  // 3 x out_size x out_size
    double used_threshold = 0.0;
    bool fallback_used = false;
};

// Per-pixel Shannon entropy of the border-truncated neighborhood histogram
// over 256 intensity bins.
EntropyMap entropy_map(const Gray8& gray, int neighborhood = 5);

// Threshold the (optionally max-normalized) map at params.threshold; on an
// empty result lower the threshold by e_step until nonempty or below e_min.
MaskResult high_entropy_mask(const EntropyMap& map, const SreParams& params);

// Mass centroid rounded to the nearest pixel; empty mask falls back to the
// image center.
std::pair<int, int> entropy_centroid(const BinaryMask& mask, int img_w, int img_h);

// Grow an l_min square centered at the centroid, cycling up/right/down/left;
// each edge extends by expand_step while the added strip holds at least
// edge_frac mask pixels.
Box expand_region(const BinaryMask& mask, int cx, int cy, const SreParams& params);

// Symmetrically widen the shorter-relative dimension until the box matches
// the image aspect (within 1px of rounding), shifting inward at borders.
Box adjust_aspect(Box box, int img_w, int img_h);

SalientRegion adjust_aspect_and_extract(const Grid3& image, Box box, const SreParams& params);

// Full pipeline: grayscale, entropy, threshold, centroid, expansion, aspect
// fix, crop + resize.
SalientRegion extract_salient(const Grid3& image, const SreParams& params);

}  // namespace tryon
