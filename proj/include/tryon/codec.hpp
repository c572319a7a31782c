#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tryon/grid.hpp"

namespace tryon {

// Fixed linear image<->latent codec. Each f x f x c_in pixel block is
// flattened (channel-major) and projected by a row-orthonormal matrix P.
// Row 0 of P is the normalized all-ones direction, so latent channel 0 is
// proportional to the block-mean intensity.
struct CodecSpec {
    int f = 8;
    int c_in = 3;
    int c_lat = 4;
    uint64_t seed = 0;
    Eigen::MatrixXd P;  // c_lat x (c_in * f * f)

    int block_dim() const { return c_in * f * f; }
};

// Row 0 fixed to the block-mean direction; remaining rows from seeded
// Gram-Schmidt on pseudo-random vectors. Rejects c_lat > c_in*f^2.
CodecSpec build_codec(uint64_t seed, int f = 8, int c_lat = 4);

// Space-to-depth by factor f followed by P per spatial cell.
// Requires H, W divisible by f.
Grid3 encode(const Grid3& image, const CodecSpec& codec);

// Transpose projection and depth-to-space. No clamping; algebraic
// identities hold on this path.
Grid3 decode_unclamped(const Grid3& latent, const CodecSpec& codec);

// Image-export variant: decode then clamp to [0,1].
Grid3 decode(const Grid3& latent, const CodecSpec& codec);

}  // namespace tryon
