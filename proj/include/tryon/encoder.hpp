#pragma once

#include "tryon/grid.hpp"
#include "tryon/nn.hpp"

namespace tryon {

struct EncoderConfig {
    int side = 32;       // input resolution (square)
    int patch = 8;
    int layers = 4;
    int dim = 64;
    int heads = 4;
    int mlp_ratio = 4;
    bool use_posenc = true;
    bool trainable = false;  // frozen seeded weights by default

    int tokens() const { return (side / patch) * (side / patch); }
    void validate() const {
        if (side % patch != 0) throw std::invalid_argument("encoder: side must be divisible by patch");
        if (layers < 2) throw std::invalid_argument("encoder: at least 2 layers required");
    }
};

// ViT-style image encoder exposing every block output as a feature stack.
template <typename S>
struct FeatureEncoder {
    EncoderConfig cfg;
    nn::Linear<S> patch_embed;  // [dim, 3*patch^2]
    nn::Mat<S> posenc;          // [tokens, dim], fixed
    std::vector<nn::Block<S>> blocks;

    void setup(const EncoderConfig& c) {
        cfg = c;
        cfg.validate();
        patch_embed.setup(cfg.dim, 3 * cfg.patch * cfg.patch);
        const int g = cfg.side / cfg.patch;
        posenc = cfg.use_posenc ? nn::sincos_embed_grid<S>(g, g, cfg.dim)
                                : nn::Mat<S>::Zero(g * g, cfg.dim);
        blocks.resize(size_t(cfg.layers));
        for (auto& b : blocks) b.setup(cfg.dim, cfg.heads, cfg.mlp_ratio * cfg.dim, false, false);
    }

    void init(Rng& rng) {
        patch_embed.init_xavier(rng);
        for (auto& b : blocks) b.init(rng);
    }

    struct Cache {
        nn::Mat<S> raw;        // [tokens, 3*patch^2]
        nn::Mat<S> embedded;   // [tokens, dim]
        std::vector<typename nn::Block<S>::Cache> bc;
        std::vector<nn::Mat<S>> stack;  // block outputs, depth order
    };

    const std::vector<nn::Mat<S>>& forward(const GridT<S>& image, Cache& c) const {
        if (image.c != 3 || image.h != cfg.side || image.w != cfg.side)
            throw std::invalid_argument("encoder: image shape mismatch");
        const int p = cfg.patch, g = cfg.side / p;
        c.raw.resize(g * g, 3 * p * p);
        for (int gy = 0; gy < g; ++gy)
            for (int gx = 0; gx < g; ++gx) {
                int tok = gy * g + gx;
                int i = 0;
                for (int ch = 0; ch < 3; ++ch)
                    for (int dy = 0; dy < p; ++dy)
                        for (int dx = 0; dx < p; ++dx)
                            c.raw(tok, i++) = image.at(ch, gy * p + dy, gx * p + dx);
            }
        c.embedded = patch_embed.apply(c.raw) + posenc;
        c.bc.resize(blocks.size());
        c.stack.clear();
        c.stack.reserve(blocks.size());
        nn::Mat<S> x = c.embedded;
        for (size_t l = 0; l < blocks.size(); ++l) {
            x = blocks[l].forward(x, nullptr, nullptr, c.bc[l]);
            c.stack.push_back(x);
        }
        return c.stack;
    }

    // dstack holds a gradient for every block output (zero matrices allowed).
    void backward(const std::vector<nn::Mat<S>>& dstack, const Cache& c, FeatureEncoder& g) const {
        nn::Mat<S> dx = dstack.back();
        for (int l = int(blocks.size()) - 1; l >= 0; --l) {
            dx = blocks[size_t(l)].backward(dx, c.bc[size_t(l)], g.blocks[size_t(l)], nullptr, nullptr);
            if (l > 0) dx += dstack[size_t(l) - 1];
        }
        patch_embed.backward(c.raw, dx, g.patch_embed);
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        patch_embed.visit(f, p + ".patch_embed");
        for (size_t l = 0; l < blocks.size(); ++l) blocks[l].visit(f, p + ".blk" + std::to_string(l));
    }
};

}  // namespace tryon
