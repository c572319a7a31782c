#include "tryon/codec.hpp"

#include <cmath>
#include <stdexcept>

#include "tryon/util.hpp"

namespace tryon {

CodecSpec build_codec(uint64_t seed, int f, int c_lat) {
    if (f < 2) throw std::invalid_argument("build_codec: f must be >= 2");
    if (c_lat < 1) throw std::invalid_argument("build_codec: c_lat must be >= 1");
    CodecSpec spec;
    spec.f = f;
    spec.c_lat = c_lat;
    spec.seed = seed;
    const int n = spec.block_dim();
    if (c_lat > n)
        throw std::invalid_argument("build_codec: c_lat exceeds block dimension (rank impossible)");

    spec.P.resize(c_lat, n);
    spec.P.row(0).setConstant(1.0 / std::sqrt(double(n)));

    Rng rng(mix_seed(seed, 0x636f646563ULL));
    for (int r = 1; r < c_lat; ++r) {
        Eigen::VectorXd v(n);
        while (true) {
            for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
            for (int k = 0; k < r; ++k) v -= spec.P.row(k).dot(v) * spec.P.row(k).transpose();
            double norm = v.norm();
            if (norm > 1e-6) {  // redraw on (vanishingly unlikely) degeneracy
                spec.P.row(r) = v.transpose() / norm;
                break;
            }
        }
    }
    return spec;
}

Grid3 encode(const Grid3& image, const CodecSpec& codec) {
    if (image.c != codec.c_in) throw std::invalid_argument("encode: channel count mismatch");
    if (image.h % codec.f != 0 || image.w % codec.f != 0)
        throw std::invalid_argument("encode: image dims must be divisible by f");
    const int f = codec.f;
    const int hl = image.h / f, wl = image.w / f;
    Grid3 latent(codec.c_lat, hl, wl);
    Eigen::VectorXd block(codec.block_dim());
    for (int by = 0; by < hl; ++by) {
        for (int bx = 0; bx < wl; ++bx) {
            int i = 0;
            for (int ch = 0; ch < codec.c_in; ++ch)
                for (int dy = 0; dy < f; ++dy)
                    for (int dx = 0; dx < f; ++dx)
                        block[i++] = image.at(ch, by * f + dy, bx * f + dx);
            Eigen::VectorXd z = codec.P * block;
            for (int k = 0; k < codec.c_lat; ++k) latent.at(k, by, bx) = static_cast<float>(z[k]);
        }
    }
    return latent;
}

Grid3 decode_unclamped(const Grid3& latent, const CodecSpec& codec) {
    if (latent.c != codec.c_lat) throw std::invalid_argument("decode: latent channel mismatch");
    const int f = codec.f;
    Grid3 image(codec.c_in, latent.h * f, latent.w * f);
    Eigen::VectorXd z(codec.c_lat);
    for (int by = 0; by < latent.h; ++by) {
        for (int bx = 0; bx < latent.w; ++bx) {
            for (int k = 0; k < codec.c_lat; ++k) z[k] = latent.at(k, by, bx);
            Eigen::VectorXd block = codec.P.transpose() * z;
            int i = 0;
            for (int ch = 0; ch < codec.c_in; ++ch)
                for (int dy = 0; dy < f; ++dy)
                    for (int dx = 0; dx < f; ++dx)
                        image.at(ch, by * f + dy, bx * f + dx) = static_cast<float>(block[i++]);
        }
    }
    return image;
}

Grid3 decode(const Grid3& latent, const CodecSpec& codec) {
    return clamp01(decode_unclamped(latent, codec));
}

}  // namespace tryon
