#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tryon/grid.hpp"
#include "tryon/nn.hpp"

namespace tryon {

struct LossBreakdown {
    double denoise = 0.0;
    double mask = 0.0;
    double inpaint = 0.0;
    double total = 0.0;
    bool finite() const {
        return std::isfinite(denoise) && std::isfinite(mask) && std::isfinite(inpaint) &&
               std::isfinite(total);
    }
};

// Mean squared error over all elements; accumulation order is the flat
// channel-major element order for every loss here.
template <typename S>
double denoise_loss(const GridT<S>& eps, const GridT<S>& eps_hat) {
    if (!eps.same_shape(eps_hat)) throw std::invalid_argument("denoise_loss: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < eps.v.size(); ++i) {
        double d = double(eps_hat.v[i]) - double(eps.v[i]);
        acc += d * d;
    }
    return acc / double(eps.v.size());
}

// d(loss)/d(eps_hat)
template <typename S>
GridT<S> denoise_loss_grad(const GridT<S>& eps, const GridT<S>& eps_hat, double scale = 1.0) {
    GridT<S> g(eps.c, eps.h, eps.w);
    double k = 2.0 * scale / double(eps.v.size());
    for (size_t i = 0; i < eps.v.size(); ++i)
        g.v[i] = S(k * (double(eps_hat.v[i]) - double(eps.v[i])));
    return g;
}

// Replicates the token mask (0 = masked) onto the latent grid by patch.
// Returns 1 on cells covered by masked tokens.
inline std::vector<uint8_t> masked_cell_grid(const std::vector<uint8_t>& token_mask, int patch,
                                             int h, int w) {
    const int gw = w / patch;
    std::vector<uint8_t> cells(size_t(h) * w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int tok = (y / patch) * gw + (x / patch);
            cells[size_t(y) * w + x] = token_mask[size_t(tok)] ? 0 : 1;
        }
    return cells;
}

// MSE between true noise and the masked-pass prediction, restricted to latent
// cells covered by masked tokens and normalized by the number of covered
// elements. Empty mask is defined as 0.
template <typename S>
double mask_recon_loss(const GridT<S>& eps, const GridT<S>& eps_hat_masked,
                       const std::vector<uint8_t>& token_mask, int patch) {
    if (!eps.same_shape(eps_hat_masked)) throw std::invalid_argument("mask_recon_loss: shape mismatch");
    std::vector<uint8_t> cells = masked_cell_grid(token_mask, patch, eps.h, eps.w);
    double acc = 0.0;
    long cnt = 0;
    for (int ch = 0; ch < eps.c; ++ch)
        for (int y = 0; y < eps.h; ++y)
            for (int x = 0; x < eps.w; ++x) {
                if (!cells[size_t(y) * eps.w + x]) continue;
                double d = double(eps_hat_masked.at(ch, y, x)) - double(eps.at(ch, y, x));
                acc += d * d;
                ++cnt;
            }
    if (cnt == 0) return 0.0;
    return acc / double(cnt);
}

template <typename S>
GridT<S> mask_recon_loss_grad(const GridT<S>& eps, const GridT<S>& eps_hat_masked,
                              const std::vector<uint8_t>& token_mask, int patch, double scale = 1.0) {
    std::vector<uint8_t> cells = masked_cell_grid(token_mask, patch, eps.h, eps.w);
    long cnt = 0;
    for (uint8_t c : cells) cnt += c;
    cnt *= eps.c;
    GridT<S> g(eps.c, eps.h, eps.w, S(0));
    if (cnt == 0) return g;
    double k = 2.0 * scale / double(cnt);
    for (int ch = 0; ch < eps.c; ++ch)
        for (int y = 0; y < eps.h; ++y)
            for (int x = 0; x < eps.w; ++x)
                if (cells[size_t(y) * eps.w + x])
                    g.at(ch, y, x) =
                        S(k * (double(eps_hat_masked.at(ch, y, x)) - double(eps.at(ch, y, x))));
    return g;
}

// Channel 0 of the encoded mask, min-max normalized with an epsilon guard in
// the denominator. A constant channel maps to all zeros.
inline Grid3 normalize_latent_mask(const Grid3& mask_latent) {
    Grid3 m(1, mask_latent.h, mask_latent.w);
    float lo = mask_latent.at(0, 0, 0), hi = lo;
    for (int y = 0; y < mask_latent.h; ++y)
        for (int x = 0; x < mask_latent.w; ++x) {
            float v = mask_latent.at(0, y, x);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    double denom = double(hi) - double(lo) + 1e-8;
    for (int y = 0; y < mask_latent.h; ++y)
        for (int x = 0; x < mask_latent.w; ++x)
            m.at(0, y, x) = float((double(mask_latent.at(0, y, x)) - double(lo)) / denom);
    return m;
}

// Weighted MSE: mean over all elements of m*(eps-eps_hat)^2 with m broadcast
// across channels. With m identically 1 this reduces elementwise to
// denoise_loss under the same accumulation order.
template <typename S>
double inpaint_loss(const GridT<S>& eps, const GridT<S>& eps_hat, const Grid3& m) {
    if (!eps.same_shape(eps_hat)) throw std::invalid_argument("inpaint_loss: shape mismatch");
    if (m.c != 1 || m.h != eps.h || m.w != eps.w)
        throw std::invalid_argument("inpaint_loss: weight shape mismatch");
    double acc = 0.0;
    for (int ch = 0; ch < eps.c; ++ch)
        for (int y = 0; y < eps.h; ++y)
            for (int x = 0; x < eps.w; ++x) {
                double d = double(eps_hat.at(ch, y, x)) - double(eps.at(ch, y, x));
                acc += double(m.at(0, y, x)) * (d * d);
            }
    return acc / double(eps.v.size());
}

template <typename S>
GridT<S> inpaint_loss_grad(const GridT<S>& eps, const GridT<S>& eps_hat, const Grid3& m,
                           double scale = 1.0) {
    GridT<S> g(eps.c, eps.h, eps.w);
    double k = 2.0 * scale / double(eps.v.size());
    for (int ch = 0; ch < eps.c; ++ch)
        for (int y = 0; y < eps.h; ++y)
            for (int x = 0; x < eps.w; ++x)
                g.at(ch, y, x) = S(k * double(m.at(0, y, x)) *
                                   (double(eps_hat.at(ch, y, x)) - double(eps.at(ch, y, x))));
    return g;
}

// Token-space mask reconstruction: MSE between the side-interpolator output
// and the original (pre-masking) token values at masked positions. The
// alternate objective form selectable in training config.
template <typename S>
double token_recon_loss(const nn::Mat<S>& side_out, const nn::Mat<S>& tokens_orig,
                        const std::vector<uint8_t>& token_mask) {
    double acc = 0.0;
    long cnt = 0;
    for (int i = 0; i < int(token_mask.size()); ++i) {
        if (token_mask[size_t(i)]) continue;
        for (Eigen::Index j = 0; j < side_out.cols(); ++j) {
            double d = double(side_out(i, j)) - double(tokens_orig(i, j));
            acc += d * d;
            ++cnt;
        }
    }
    if (cnt == 0) return 0.0;
    return acc / double(cnt);
}

template <typename S>
void token_recon_loss_grad(const nn::Mat<S>& side_out, const nn::Mat<S>& tokens_orig,
                           const std::vector<uint8_t>& token_mask, double scale, nn::Mat<S>& d_side,
                           nn::Mat<S>& d_orig) {
    long cnt = 0;
    for (uint8_t m : token_mask) cnt += m ? 0 : 1;
    cnt *= side_out.cols();
    d_side.setZero(side_out.rows(), side_out.cols());
    d_orig.setZero(side_out.rows(), side_out.cols());
    if (cnt == 0) return;
    double k = 2.0 * scale / double(cnt);
    for (int i = 0; i < int(token_mask.size()); ++i) {
        if (token_mask[size_t(i)]) continue;
        for (Eigen::Index j = 0; j < side_out.cols(); ++j) {
            S g = S(k * (double(side_out(i, j)) - double(tokens_orig(i, j))));
            d_side(i, j) = g;
            d_orig(i, j) = -g;
        }
    }
}

inline LossBreakdown total_loss(double denoise, double mask, double inpaint) {
    LossBreakdown b;
    b.denoise = denoise;
    b.mask = mask;
    b.inpaint = inpaint;
    b.total = denoise + mask + inpaint;
    return b;
}

}  // namespace tryon
