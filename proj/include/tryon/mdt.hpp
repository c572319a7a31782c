#pragma once

#include <optional>

#include "tryon/grid.hpp"
#include "tryon/nn.hpp"

namespace tryon {

struct MdtConfig {
    int d_model = 128;
    int n_enc = 4;
    int n_dec = 2;
    int heads = 4;
    int patch = 2;
    int latent_side = 8;   // H_l = W_l
    int latent_ch = 4;
    int n_refs = 4;        // z_t, A, P, M_X
    int mlp_ratio = 4;
    int cond_tokens = 32;  // 2s
    double mask_ratio = 0.3;
    bool use_posenc = true;

    int in_ch() const { return latent_ch * n_refs; }
    int tokens() const { return (latent_side / patch) * (latent_side / patch); }
    void validate() const {
        if (latent_side % patch != 0)
            throw std::invalid_argument("mdt: latent side must be divisible by patch");
        if (d_model % heads != 0) throw std::invalid_argument("mdt: heads must divide d_model");
        if (n_dec > 0 && n_enc < n_dec + 1)
            throw std::invalid_argument("mdt: need n_enc >= n_dec + 1 for skip wiring");
    }
};

// Non-overlapping patch flattening, channel-major within each patch vector.
template <typename S>
nn::Mat<S> patchify_raw(const GridT<S>& g, int patch) {
    const int gh = g.h / patch, gw = g.w / patch;
    nn::Mat<S> out(gh * gw, g.c * patch * patch);
    for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
            int tok = gy * gw + gx;
            int i = 0;
            for (int ch = 0; ch < g.c; ++ch)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        out(tok, i++) = g.at(ch, gy * patch + dy, gx * patch + dx);
        }
    return out;
}

template <typename S>
GridT<S> unpatchify(const nn::Mat<S>& tokens, int patch, int ch, int h, int w) {
    const int gh = h / patch, gw = w / patch;
    if (tokens.rows() != gh * gw || tokens.cols() != ch * patch * patch)
        throw std::invalid_argument("unpatchify: token shape mismatch");
    GridT<S> out(ch, h, w);
    for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
            int tok = gy * gw + gx;
            int i = 0;
            for (int c = 0; c < ch; ++c)
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        out.at(c, gy * patch + dy, gx * patch + dx) = tokens(tok, i++);
        }
    return out;
}

// Token mask: 1 = kept, 0 = masked; exactly round(rho*p) masked positions,
// uniform without replacement.
inline std::vector<uint8_t> sample_token_mask(int p, double rho, Rng& rng) {
    if (rho <= 0.0 || rho >= 1.0) throw std::invalid_argument("token mask: rho must be in (0,1)");
    int n_masked = static_cast<int>(std::lround(rho * p));
    if (n_masked <= 0 || n_masked >= p)
        throw std::invalid_argument("token mask: rho*p rounds to an empty or full mask");
    std::vector<uint8_t> mask(size_t(p), 1);
    for (int idx : rng.choose(p, n_masked)) mask[size_t(idx)] = 0;
    return mask;
}

// Timestep embedding plus condition assembly. The timestep enters the model
// only through the condition rows; the null condition is a learned token
// block used for guidance dropout and unconditional prediction.
template <typename S>
struct Conditioner {
    nn::Linear<S> proj;           // [d_model, d_enc], shared by garment/salient features
    nn::Mat<S> null_tokens;       // [2s, d_model]
    nn::Linear<S> time_fc1, time_fc2;
    int d_model = 0;

    void setup(int d_model_, int d_enc, int cond_tokens) {
        d_model = d_model_;
        proj.setup(d_model, d_enc);
        null_tokens.setZero(cond_tokens, d_model);
        time_fc1.setup(d_model, d_model);
        time_fc2.setup(d_model, d_model);
    }

    void init(Rng& rng) {
        proj.init_xavier(rng);
        for (Eigen::Index i = 0; i < null_tokens.rows(); ++i)
            for (Eigen::Index j = 0; j < null_tokens.cols(); ++j)
                null_tokens(i, j) = S(0.02 * rng.gaussian());
        time_fc1.init_xavier(rng);
        time_fc2.init_xavier(rng);
    }

    struct TimeCache {
        nn::Mat<S> sincos, pre;
    };

    nn::Mat<S> time_embed(double t, TimeCache& c) const {
        c.sincos = nn::sincos_embed_scalar<S>(t, d_model);
        c.pre = time_fc1.apply(c.sincos);
        nn::Mat<S> h = c.pre.unaryExpr([](S v) { return nn::gelu(v); });
        return time_fc2.apply(h);
    }

    void time_backward(const nn::Mat<S>& dT, const TimeCache& c, Conditioner& g) const {
        nn::Mat<S> h = c.pre.unaryExpr([](S v) { return nn::gelu(v); });
        nn::Mat<S> dh = time_fc2.backward(h, dT, g.time_fc2);
        nn::Mat<S> dpre = dh.cwiseProduct(c.pre.unaryExpr([](S v) { return nn::gelu_grad(v); }));
        time_fc1.backward(c.sincos, dpre, g.time_fc1);
    }

    struct Cache {
        nn::Mat<S> fg, fs;  // projection inputs
        bool null_path = false;
    };

    nn::Mat<S> build(const nn::Mat<S>& fg, const nn::Mat<S>& fs, const nn::Mat<S>& t_embed,
                     Cache& c) const {
        if (fg.rows() != fs.rows() || fg.cols() != fs.cols())
            throw std::invalid_argument("condition: feature shape mismatch");
        if (2 * fg.rows() != null_tokens.rows())
            throw std::invalid_argument("condition: token count mismatch");
        c.fg = fg;
        c.fs = fs;
        c.null_path = false;
        nn::Mat<S> cond(2 * fg.rows(), d_model);
        cond.topRows(fg.rows()) = proj.apply(fg);
        cond.bottomRows(fs.rows()) = proj.apply(fs);
        cond.rowwise() += t_embed.row(0);
        return cond;
    }

    nn::Mat<S> build_null(const nn::Mat<S>& t_embed, Cache& c) const {
        c.null_path = true;
        nn::Mat<S> cond = null_tokens;
        cond.rowwise() += t_embed.row(0);
        return cond;
    }

    // Returns (dFg, dFs) into the provided matrices (sized on the conditional
    // path) and accumulates the broadcast timestep gradient into dT.
    void backward(const nn::Mat<S>& dcond, const Cache& c, Conditioner& g, nn::Mat<S>& dT,
                  nn::Mat<S>* dfg, nn::Mat<S>* dfs) const {
        dT.row(0) += dcond.colwise().sum();
        if (c.null_path) {
            g.null_tokens += dcond;
            return;
        }
        const Eigen::Index s = c.fg.rows();
        nn::Mat<S> d1 = proj.backward(c.fg, dcond.topRows(s), g.proj);
        nn::Mat<S> d2 = proj.backward(c.fs, dcond.bottomRows(s), g.proj);
        if (dfg) *dfg += d1;
        if (dfs) *dfs += d2;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        proj.visit(f, p + ".proj");
        f(p + ".null", null_tokens);
        time_fc1.visit(f, p + ".time_fc1");
        time_fc2.visit(f, p + ".time_fc2");
    }
};

// Masked diffusion transformer denoiser: patchified 16-channel latent input,
// cross-attending encoder/decoder blocks with long skips, side-interpolator
// reconstructing masked tokens between the two.
template <typename S>
struct MdtModel {
    MdtConfig cfg;
    nn::Linear<S> patch_embed;  // [d_model, patch^2 * in_ch]
    nn::Mat<S> posenc;          // [p, d_model]
    std::vector<nn::Block<S>> enc, dec;
    nn::Attention<S> side_attn;
    nn::Mat<S> mask_embed;  // [1, d_model]; side-interpolator query content
    nn::LayerNorm<S> final_ln;
    nn::Linear<S> final;  // [patch^2 * latent_ch, d_model]

    void setup(const MdtConfig& c) {
        cfg = c;
        cfg.validate();
        const int p_dim = cfg.patch * cfg.patch;
        patch_embed.setup(cfg.d_model, p_dim * cfg.in_ch());
        const int g = cfg.latent_side / cfg.patch;
        posenc = cfg.use_posenc ? nn::sincos_embed_grid<S>(g, g, cfg.d_model)
                                : nn::Mat<S>::Zero(g * g, cfg.d_model);
        enc.resize(size_t(cfg.n_enc));
        for (auto& b : enc) b.setup(cfg.d_model, cfg.heads, cfg.mlp_ratio * cfg.d_model, true, false);
        dec.resize(size_t(cfg.n_dec));
        for (auto& b : dec) b.setup(cfg.d_model, cfg.heads, cfg.mlp_ratio * cfg.d_model, true, true);
        side_attn.setup(cfg.d_model, cfg.heads);
        mask_embed.setZero(1, cfg.d_model);
        final_ln.setup(cfg.d_model);
        final.setup(p_dim * cfg.latent_ch, cfg.d_model);
    }

    void init(Rng& rng) {
        patch_embed.init_xavier(rng);
        for (auto& b : enc) b.init(rng);
        for (auto& b : dec) b.init(rng);
        side_attn.init(rng);
        for (Eigen::Index j = 0; j < mask_embed.cols(); ++j) mask_embed(0, j) = S(0.02 * rng.gaussian());
        // zero-init the output head so the initial prediction is exactly zero
        final.w.setZero();
        final.b.setZero();
    }

    // decoder block j (0-based) fuses the output of encoder block n_enc-2-j
    int skip_source(int j) const { return cfg.n_enc - 2 - j; }

    struct SideCache {
        std::vector<int> masked, unmasked;
        nn::Mat<S> qin, xu;
        typename nn::Attention<S>::Cache attn;
        bool active = false;
    };

    nn::Mat<S> side_interpolate(const nn::Mat<S>& x, const std::vector<uint8_t>& mask,
                                SideCache& c) const {
        c.masked.clear();
        c.unmasked.clear();
        for (int i = 0; i < int(mask.size()); ++i) (mask[size_t(i)] ? c.unmasked : c.masked).push_back(i);
        if (c.masked.empty()) {
            c.active = false;
            return x;
        }
        if (c.unmasked.empty())
            throw std::invalid_argument("side_interpolate: all tokens masked");
        c.active = true;
        c.qin.resize(Eigen::Index(c.masked.size()), cfg.d_model);
        for (size_t r = 0; r < c.masked.size(); ++r)
            c.qin.row(Eigen::Index(r)) = mask_embed.row(0) + posenc.row(c.masked[r]);
        c.xu.resize(Eigen::Index(c.unmasked.size()), cfg.d_model);
        for (size_t r = 0; r < c.unmasked.size(); ++r)
            c.xu.row(Eigen::Index(r)) = x.row(c.unmasked[r]);
        nn::Mat<S> att_out = side_attn.apply(c.qin, c.xu, c.attn);
        nn::Mat<S> y = x;
        for (size_t r = 0; r < c.masked.size(); ++r)
            y.row(c.masked[r]) += att_out.row(Eigen::Index(r));
        return y;
    }

    nn::Mat<S> side_backward(const nn::Mat<S>& dy, const SideCache& c, MdtModel& g) const {
        if (!c.active) return dy;
        nn::Mat<S> dx = dy;
        nn::Mat<S> datt(Eigen::Index(c.masked.size()), cfg.d_model);
        for (size_t r = 0; r < c.masked.size(); ++r) datt.row(Eigen::Index(r)) = dy.row(c.masked[r]);
        nn::Mat<S> dxu = nn::Mat<S>::Zero(c.xu.rows(), c.xu.cols());
        nn::Mat<S> dqin = side_attn.backward(datt, c.attn, g.side_attn, dxu);
        g.mask_embed.row(0) += dqin.colwise().sum();
        for (size_t r = 0; r < c.unmasked.size(); ++r) dx.row(c.unmasked[r]) += dxu.row(Eigen::Index(r));
        return dx;
    }

    struct Cache {
        nn::Mat<S> raw;  // [p, patch^2*in_ch]
        std::vector<uint8_t> token_mask;
        bool masked = false;
        nn::Mat<S> tokens_pre_mask;  // embed+posenc before zeroing (masked pass only)
        std::vector<typename nn::Block<S>::Cache> enc_c, dec_c;
        std::vector<nn::Mat<S>> enc_out;
        SideCache side;
        nn::Mat<S> side_out;  // tokens entering the decoder
        typename nn::LayerNorm<S>::Cache ln_c;
        nn::Mat<S> ln_out;
    };

    // refs = concat(z_t, E(A), E(P), E(M_X)) along channels. token_mask, when
    // given, selects the masked training pass; the plain pass is the
    // inference path and never touches the side-interpolator.
    GridT<S> forward(const GridT<S>& refs, const nn::Mat<S>& cond,
                     const std::vector<uint8_t>* token_mask, Cache& c) const {
        if (refs.c != cfg.in_ch())
            throw std::invalid_argument("mdt: expected " + std::to_string(cfg.in_ch()) +
                                        " input channels, got " + std::to_string(refs.c));
        if (refs.h != cfg.latent_side || refs.w != cfg.latent_side)
            throw std::invalid_argument("mdt: latent shape mismatch");
        c.raw = patchify_raw(refs, cfg.patch);
        nn::Mat<S> x = patch_embed.apply(c.raw) + posenc;
        c.masked = token_mask != nullptr;
        if (c.masked) {
            c.token_mask = *token_mask;
            if (int(c.token_mask.size()) != cfg.tokens())
                throw std::invalid_argument("mdt: token mask length mismatch");
            c.tokens_pre_mask = x;
            for (int i = 0; i < int(c.token_mask.size()); ++i)
                if (!c.token_mask[size_t(i)]) x.row(i).setZero();
        }
        c.enc_c.resize(enc.size());
        c.enc_out.resize(enc.size());
        for (size_t i = 0; i < enc.size(); ++i) {
            x = enc[i].forward(x, &cond, nullptr, c.enc_c[i]);
            c.enc_out[i] = x;
        }
        if (c.masked) x = side_interpolate(x, c.token_mask, c.side);
        c.side_out = x;
        c.dec_c.resize(dec.size());
        for (size_t j = 0; j < dec.size(); ++j)
            x = dec[j].forward(x, &cond, &c.enc_out[size_t(skip_source(int(j)))], c.dec_c[j]);
        c.ln_out = final_ln.apply(x, c.ln_c);
        nn::Mat<S> y = final.apply(c.ln_out);
        return unpatchify(y, cfg.patch, cfg.latent_ch, cfg.latent_side, cfg.latent_side);
    }

    // Accumulates parameter gradients into g and the condition gradient into
    // dcond.
    void backward(const GridT<S>& d_eps, const Cache& c, MdtModel& g, nn::Mat<S>& dcond) const {
        nn::Mat<S> dy = patchify_raw(d_eps, cfg.patch);
        nn::Mat<S> dx = final_ln.backward(final.backward(c.ln_out, dy, g.final), c.ln_c, g.final_ln);
        std::vector<nn::Mat<S>> dskip(enc.size());
        for (size_t i = 0; i < enc.size(); ++i)
            dskip[i] = nn::Mat<S>::Zero(c.enc_out[i].rows(), c.enc_out[i].cols());
        for (int j = int(dec.size()) - 1; j >= 0; --j)
            dx = dec[size_t(j)].backward(dx, c.dec_c[size_t(j)], g.dec[size_t(j)], &dcond,
                                         &dskip[size_t(skip_source(j))]);
        if (c.masked) dx = side_backward(dx, c.side, g);
        for (int i = int(enc.size()) - 1; i >= 0; --i) {
            dx += dskip[size_t(i)];
            dx = enc[size_t(i)].backward(dx, c.enc_c[size_t(i)], g.enc[size_t(i)], &dcond, nullptr);
        }
        if (c.masked)
            for (int i = 0; i < int(c.token_mask.size()); ++i)
                if (!c.token_mask[size_t(i)]) dx.row(i).setZero();
        patch_embed.backward(c.raw, dx, g.patch_embed);
    }

    // Backward entry for the token-space reconstruction objective: gradients
    // land on the side-interpolator output and on the pre-mask tokens; the
    // decoder is not part of that graph.
    void backward_tokens(const nn::Mat<S>& d_side_out, const nn::Mat<S>& d_tokens_pre,
                         const Cache& c, MdtModel& g, nn::Mat<S>& dcond) const {
        nn::Mat<S> dx = side_backward(d_side_out, c.side, g);
        for (int i = int(enc.size()) - 1; i >= 0; --i)
            dx = enc[size_t(i)].backward(dx, c.enc_c[size_t(i)], g.enc[size_t(i)], &dcond, nullptr);
        for (int i = 0; i < int(c.token_mask.size()); ++i)
            if (!c.token_mask[size_t(i)]) dx.row(i).setZero();
        dx += d_tokens_pre;
        patch_embed.backward(c.raw, dx, g.patch_embed);
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        patch_embed.visit(f, p + ".patch_embed");
        for (size_t i = 0; i < enc.size(); ++i) enc[i].visit(f, p + ".enc" + std::to_string(i));
        side_attn.visit(f, p + ".side.attn");
        f(p + ".side.mask_embed", mask_embed);
        for (size_t j = 0; j < dec.size(); ++j) dec[j].visit(f, p + ".dec" + std::to_string(j));
        final_ln.visit(f, p + ".final_ln");
        final.visit(f, p + ".final");
    }
};

}  // namespace tryon
