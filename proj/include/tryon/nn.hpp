#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tryon/util.hpp"

// Small dense NN toolkit, templated on the scalar so the same graph runs in
// f32 for training and f64 for finite-difference checks. Every layer carries
// an explicit forward cache and a hand-written backward; gradients accumulate
// into a parallel instance of the same structure.
namespace tryon::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
S gelu(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(M_SQRT1_2)));
}

template <typename S>
S gelu_grad(S x) {
    return S(0.5) * (S(1) + std::erf(x * S(M_SQRT1_2))) +
           x * std::exp(S(-0.5) * x * x) * S(0.3989422804014326779);
}

// rowwise softmax with max subtraction
template <typename S>
Mat<S> softmax_rows(const Mat<S>& x) {
    Mat<S> y = x;
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        S mx = y.row(r).maxCoeff();
        y.row(r) = (y.row(r).array() - mx).exp();
        y.row(r) /= y.row(r).sum();
    }
    return y;
}

// dx for y = softmax(x) rowwise given dy
template <typename S>
Mat<S> softmax_backward(const Mat<S>& y, const Mat<S>& dy) {
    Mat<S> dx = dy;
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
        S dot = y.row(r).dot(dy.row(r));
        dx.row(r) = y.row(r).array() * (dy.row(r).array() - dot);
    }
    return dx;
}

template <typename S>
struct Linear {
    Mat<S> w;  // [out, in]
    Mat<S> b;  // [1, out]

    void setup(int out, int in) {
        w.setZero(out, in);
        b.setZero(1, out);
    }

    void init_xavier(Rng& rng) {
        double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = S(rng.uniform(-limit, limit));
        b.setZero();
    }

    Mat<S> apply(const Mat<S>& x) const {
        Mat<S> y = x * w.transpose();
        y.rowwise() += b.row(0);
        return y;
    }

    // returns dx; x must be the forward input
    Mat<S> backward(const Mat<S>& x, const Mat<S>& dy, Linear& g) const {
        g.w.noalias() += dy.transpose() * x;
        g.b.row(0) += dy.colwise().sum();
        return dy * w;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        f(p + ".w", w);
        f(p + ".b", b);
    }
};

template <typename S>
struct LayerNorm {
    Mat<S> gamma, beta;  // [1, dim]
    S eps = S(1e-5);

    void setup(int dim) {
        gamma.setOnes(1, dim);
        beta.setZero(1, dim);
    }

    struct Cache {
        Mat<S> xhat;
        std::vector<S> rstd;
    };

    Mat<S> apply(const Mat<S>& x, Cache& c) const {
        const Eigen::Index n = x.cols();
        c.xhat.resize(x.rows(), n);
        c.rstd.resize(size_t(x.rows()));
        Mat<S> y(x.rows(), n);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            S mu = x.row(r).mean();
            S var = (x.row(r).array() - mu).square().sum() / S(n);
            S rstd = S(1) / std::sqrt(var + eps);
            c.rstd[size_t(r)] = rstd;
            c.xhat.row(r) = (x.row(r).array() - mu) * rstd;
            y.row(r) = c.xhat.row(r).array() * gamma.row(0).array() + beta.row(0).array();
        }
        return y;
    }

    Mat<S> backward(const Mat<S>& dy, const Cache& c, LayerNorm& g) const {
        const Eigen::Index n = dy.cols();
        Mat<S> dx(dy.rows(), n);
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
            Eigen::Array<S, 1, Eigen::Dynamic> dxhat = dy.row(r).array() * gamma.row(0).array();
            S m1 = dxhat.sum() / S(n);
            S m2 = (dxhat * c.xhat.row(r).array()).sum() / S(n);
            dx.row(r) = (dxhat - m1 - c.xhat.row(r).array() * m2) * c.rstd[size_t(r)];
        }
        g.gamma.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
        g.beta.row(0) += dy.colwise().sum();
        return dx;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        f(p + ".g", gamma);
        f(p + ".b", beta);
    }
};

template <typename S>
struct Mlp {
    Linear<S> fc1, fc2;

    void setup(int dim, int hidden) {
        fc1.setup(hidden, dim);
        fc2.setup(dim, hidden);
    }

    void init(Rng& rng) {
        fc1.init_xavier(rng);
        fc2.init_xavier(rng);
    }

    struct Cache {
        Mat<S> x, pre;
    };

    Mat<S> apply(const Mat<S>& x, Cache& c) const {
        c.x = x;
        c.pre = fc1.apply(x);
        Mat<S> h = c.pre.unaryExpr([](S v) { return gelu(v); });
        return fc2.apply(h);
    }

    Mat<S> backward(const Mat<S>& dy, const Cache& c, Mlp& g) const {
        Mat<S> h = c.pre.unaryExpr([](S v) { return gelu(v); });
        Mat<S> dh = fc2.backward(h, dy, g.fc2);
        Mat<S> dpre = dh.cwiseProduct(c.pre.unaryExpr([](S v) { return gelu_grad(v); }));
        return fc1.backward(c.x, dpre, g.fc1);
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        fc1.visit(f, p + ".fc1");
        fc2.visit(f, p + ".fc2");
    }
};

// Multi-head scaled dot-product attention. Queries come from xq, keys and
// values from xkv (pass the same matrix for self-attention).
template <typename S>
struct Attention {
    Linear<S> wq, wk, wv, wo;
    int heads = 1;

    void setup(int dim, int n_heads) {
        if (dim % n_heads != 0) throw std::invalid_argument("attention: heads must divide dim");
        heads = n_heads;
        wq.setup(dim, dim);
        wk.setup(dim, dim);
        wv.setup(dim, dim);
        wo.setup(dim, dim);
    }

    void init(Rng& rng) {
        wq.init_xavier(rng);
        wk.init_xavier(rng);
        wv.init_xavier(rng);
        wo.init_xavier(rng);
    }

    struct Cache {
        Mat<S> xq, xkv, q, k, v, ctx;
        std::vector<Mat<S>> att;  // per-head softmax output [n, m]
    };

    Mat<S> apply(const Mat<S>& xq, const Mat<S>& xkv, Cache& c) const {
        const int dh = int(wq.w.rows()) / heads;
        const S scale = S(1) / std::sqrt(S(dh));
        c.xq = xq;
        c.xkv = xkv;
        c.q = wq.apply(xq);
        c.k = wk.apply(xkv);
        c.v = wv.apply(xkv);
        c.att.resize(size_t(heads));
        c.ctx.resize(xq.rows(), wq.w.rows());
        for (int h = 0; h < heads; ++h) {
            auto qh = c.q.middleCols(h * dh, dh);
            auto kh = c.k.middleCols(h * dh, dh);
            auto vh = c.v.middleCols(h * dh, dh);
            Mat<S> scores = qh * kh.transpose() * scale;
            c.att[size_t(h)] = softmax_rows(scores);
            c.ctx.middleCols(h * dh, dh) = c.att[size_t(h)] * vh;
        }
        return wo.apply(c.ctx);
    }

    // returns dxq; adds the key/value path gradient into dxkv
    Mat<S> backward(const Mat<S>& dy, const Cache& c, Attention& g, Mat<S>& dxkv) const {
        const int dh = int(wq.w.rows()) / heads;
        const S scale = S(1) / std::sqrt(S(dh));
        Mat<S> dctx = wo.backward(c.ctx, dy, g.wo);
        Mat<S> dq(c.q.rows(), c.q.cols()), dk(c.k.rows(), c.k.cols()), dv(c.v.rows(), c.v.cols());
        for (int h = 0; h < heads; ++h) {
            auto vh = c.v.middleCols(h * dh, dh);
            auto qh = c.q.middleCols(h * dh, dh);
            auto kh = c.k.middleCols(h * dh, dh);
            const Mat<S>& att = c.att[size_t(h)];
            Mat<S> dctx_h = dctx.middleCols(h * dh, dh);
            Mat<S> datt = dctx_h * vh.transpose();
            dv.middleCols(h * dh, dh) = att.transpose() * dctx_h;
            Mat<S> dscores = softmax_backward(att, datt);
            dq.middleCols(h * dh, dh) = dscores * kh * scale;
            dk.middleCols(h * dh, dh) = dscores.transpose() * qh * scale;
        }
        Mat<S> dxq = wq.backward(c.xq, dq, g.wq);
        dxkv += wk.backward(c.xkv, dk, g.wk);
        dxkv += wv.backward(c.xkv, dv, g.wv);
        return dxq;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        wq.visit(f, p + ".wq");
        wk.visit(f, p + ".wk");
        wv.visit(f, p + ".wv");
        wo.visit(f, p + ".wo");
    }
};

// Pre-norm transformer block: self-attention, optional cross-attention over a
// condition sequence, MLP, all residual. Decoder blocks additionally fuse a
// long skip at entry via a learned linear on [x, skip].
template <typename S>
struct Block {
    bool cross = false;
    bool fuse_skip = false;
    Linear<S> skip_fuse;  // [dim, 2*dim]
    LayerNorm<S> ln1, ln2, ln3;
    Attention<S> self_attn, cross_attn;
    Mlp<S> mlp;

    void setup(int dim, int heads, int mlp_hidden, bool with_cross, bool with_skip) {
        cross = with_cross;
        fuse_skip = with_skip;
        if (with_skip) skip_fuse.setup(dim, 2 * dim);
        ln1.setup(dim);
        self_attn.setup(dim, heads);
        if (with_cross) {
            ln2.setup(dim);
            cross_attn.setup(dim, heads);
        }
        ln3.setup(dim);
        mlp.setup(dim, mlp_hidden);
    }

    void init(Rng& rng) {
        if (fuse_skip) skip_fuse.init_xavier(rng);
        self_attn.init(rng);
        if (cross) cross_attn.init(rng);
        mlp.init(rng);
    }

    struct Cache {
        Mat<S> fuse_in;  // [n, 2*dim] when fuse_skip
        typename LayerNorm<S>::Cache c1, c2, c3;
        typename Attention<S>::Cache a_self, a_cross;
        typename Mlp<S>::Cache m;
    };

    Mat<S> forward(const Mat<S>& x_in, const Mat<S>* cond, const Mat<S>* skip, Cache& c) const {
        Mat<S> x = x_in;
        if (fuse_skip) {
            if (!skip) throw std::invalid_argument("block: missing skip input");
            c.fuse_in.resize(x.rows(), 2 * x.cols());
            c.fuse_in << x, *skip;
            x = skip_fuse.apply(c.fuse_in);
        }
        Mat<S> n1 = ln1.apply(x, c.c1);
        x += self_attn.apply(n1, n1, c.a_self);
        if (cross) {
            if (!cond) throw std::invalid_argument("block: missing condition");
            Mat<S> n2 = ln2.apply(x, c.c2);
            x += cross_attn.apply(n2, *cond, c.a_cross);
        }
        Mat<S> n3 = ln3.apply(x, c.c3);
        x += mlp.apply(n3, c.m);
        return x;
    }

    // returns dx_in; accumulates into dcond / dskip when present
    Mat<S> backward(const Mat<S>& dy, const Cache& c, Block& g, Mat<S>* dcond, Mat<S>* dskip) const {
        Mat<S> dx = dy;
        dx += ln3.backward(mlp.backward(dy, c.m, g.mlp), c.c3, g.ln3);
        if (cross) {
            Mat<S> dq = cross_attn.backward(dx, c.a_cross, g.cross_attn, *dcond);
            dx += ln2.backward(dq, c.c2, g.ln2);
        }
        Mat<S> dkv = Mat<S>::Zero(c.a_self.xkv.rows(), c.a_self.xkv.cols());
        Mat<S> dq = self_attn.backward(dx, c.a_self, g.self_attn, dkv);
        dx += ln1.backward(dq + dkv, c.c1, g.ln1);
        if (fuse_skip) {
            Mat<S> dfuse = skip_fuse.backward(c.fuse_in, dx, g.skip_fuse);
            const Eigen::Index dim = dx.cols();
            *dskip += dfuse.rightCols(dim);
            return dfuse.leftCols(dim);
        }
        return dx;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        if (fuse_skip) skip_fuse.visit(f, p + ".skip");
        ln1.visit(f, p + ".ln1");
        self_attn.visit(f, p + ".attn");
        if (cross) {
            ln2.visit(f, p + ".ln2");
            cross_attn.visit(f, p + ".xattn");
        }
        ln3.visit(f, p + ".ln3");
        mlp.visit(f, p + ".mlp");
    }
};

// Fixed sinusoidal embedding of a scalar position.
template <typename S>
Mat<S> sincos_embed_scalar(double t, int dim) {
    if (dim % 2 != 0) throw std::invalid_argument("sincos: dim must be even");
    const int half = dim / 2;
    Mat<S> e(1, dim);
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
        e(0, i) = S(std::sin(t * freq));
        e(0, half + i) = S(std::cos(t * freq));
    }
    return e;
}

// Fixed 2-D sinusoidal grid embedding, row-major token order; half the
// channels encode y, half x.
template <typename S>
Mat<S> sincos_embed_grid(int grid_h, int grid_w, int dim) {
    if (dim % 4 != 0) throw std::invalid_argument("sincos grid: dim must be divisible by 4");
    const int half = dim / 2;
    Mat<S> e(grid_h * grid_w, dim);
    for (int gy = 0; gy < grid_h; ++gy)
        for (int gx = 0; gx < grid_w; ++gx) {
            int tok = gy * grid_w + gx;
            e.block(tok, 0, 1, half) = sincos_embed_scalar<S>(double(gy), half);
            e.block(tok, half, 1, half) = sincos_embed_scalar<S>(double(gx), half);
        }
    return e;
}

}  // namespace tryon::nn
