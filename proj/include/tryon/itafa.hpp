#pragma once

#include "tryon/complexity.hpp"
#include "tryon/nn.hpp"

namespace tryon {

// Image-timestep adaptive feature aggregation: one softmax weight per encoder
// layer, produced from the timestep embedding and the complexity vector,
// blended by the learnable scalar alpha. The complexity statistics are
// treated as constants during backprop.
template <typename S>
struct Itafa {
    nn::Linear<S> t_proj;  // [layers, d_model]
    nn::Linear<S> c_proj;  // [layers, 3]
    nn::Mat<S> alpha;      // 1x1, clamped to [0,1] at read time

    void setup(int layers, int d_model) {
        t_proj.setup(layers, d_model);
        c_proj.setup(layers, 3);
        alpha.setConstant(1, 1, S(0.5));
    }

    // zero projections give exactly uniform weights at the start of training
    void init(Rng&) {
        t_proj.w.setZero();
        t_proj.b.setZero();
        c_proj.w.setZero();
        c_proj.b.setZero();
        alpha.setConstant(1, 1, S(0.5));
    }

    S alpha_clamped() const { return clamp(alpha(0, 0), S(0), S(1)); }

    nn::Mat<S> timestep_logits(const nn::Mat<S>& t_embed) const {
        if (t_embed.cols() != t_proj.w.cols())
            throw std::invalid_argument("itafa: timestep embedding dim mismatch");
        return t_proj.apply(t_embed);
    }

    nn::Mat<S> complexity_logits(const ComplexityVector& c) const {
        nn::Mat<S> cv(1, 3);
        cv << S(c.sparsity), S(c.variance), S(c.gradient);
        return c_proj.apply(cv);
    }

    static nn::Mat<S> combine_and_normalize(const nn::Mat<S>& w_t, const nn::Mat<S>& w_i, S a) {
        nn::Mat<S> com = a * w_t + (S(1) - a) * w_i;
        return nn::softmax_rows(com);
    }

    static nn::Mat<S> aggregate(const std::vector<nn::Mat<S>>& f, const nn::Mat<S>& weights) {
        if (Eigen::Index(f.size()) != weights.cols())
            throw std::invalid_argument("itafa: weight count must equal layer count");
        nn::Mat<S> out = nn::Mat<S>::Zero(f[0].rows(), f[0].cols());
        for (size_t l = 0; l < f.size(); ++l) out += weights(0, Eigen::Index(l)) * f[l];
        return out;
    }

    struct Cache {
        nn::Mat<S> t_embed;      // [1, d_model]
        nn::Mat<S> cvec;         // [1, 3]
        nn::Mat<S> logits_t, logits_c, weights;  // [1, layers]
        const std::vector<nn::Mat<S>>* stack = nullptr;
    };

    nn::Mat<S> forward(const std::vector<nn::Mat<S>>& f, const nn::Mat<S>& t_embed,
                       const ComplexityVector& c, Cache& cache) const {
        cache.t_embed = t_embed;
        cache.cvec.resize(1, 3);
        cache.cvec << S(c.sparsity), S(c.variance), S(c.gradient);
        cache.logits_t = t_proj.apply(t_embed);
        cache.logits_c = c_proj.apply(cache.cvec);
        S a = alpha_clamped();
        cache.weights = nn::softmax_rows<S>(a * cache.logits_t + (S(1) - a) * cache.logits_c);
        cache.stack = &f;
        return aggregate(f, cache.weights);
    }

    // returns d(t_embed); optionally accumulates per-layer gradients of the
    // feature stack (aggregation path only)
    nn::Mat<S> backward(const nn::Mat<S>& d_out, const Cache& c, Itafa& g,
                        std::vector<nn::Mat<S>>* dstack = nullptr) const {
        const auto& f = *c.stack;
        nn::Mat<S> dw(1, Eigen::Index(f.size()));
        for (size_t l = 0; l < f.size(); ++l) {
            dw(0, Eigen::Index(l)) = d_out.cwiseProduct(f[l]).sum();
            if (dstack) (*dstack)[l] += c.weights(0, Eigen::Index(l)) * d_out;
        }
        nn::Mat<S> dcom = nn::softmax_backward(c.weights, dw);
        S a = alpha_clamped();
        nn::Mat<S> dlt = a * dcom;
        nn::Mat<S> dlc = (S(1) - a) * dcom;
        g.alpha(0, 0) += dcom.cwiseProduct(c.logits_t - c.logits_c).sum();
        nn::Mat<S> dt = t_proj.backward(c.t_embed, dlt, g.t_proj);
        c_proj.backward(c.cvec, dlc, g.c_proj);
        return dt;
    }

    template <typename F>
    void visit(F&& f, const std::string& p) {
        t_proj.visit(f, p + ".t_proj");
        c_proj.visit(f, p + ".c_proj");
        f(p + ".alpha", alpha);
    }
};

}  // namespace tryon
