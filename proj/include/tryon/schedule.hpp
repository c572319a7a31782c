#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tryon/grid.hpp"

namespace tryon {

// Per-timestep noise coefficients. alpha_bar[t] is the product of alphas
// strictly below t, so alpha_bar[0] == 1 and q_sample at t=0 is the identity.
struct DiffusionSchedule {
    int t_train = 1000;
    std::vector<double> beta, alpha, alpha_bar;

    static DiffusionSchedule linear(int t_train = 1000, double beta_min = 1e-4,
                                    double beta_max = 0.02) {
        if (t_train < 1) throw std::invalid_argument("schedule: t_train must be >= 1");
        DiffusionSchedule s;
        s.t_train = t_train;
        s.beta.resize(size_t(t_train));
        s.alpha.resize(size_t(t_train));
        s.alpha_bar.resize(size_t(t_train));
        double prod = 1.0;
        for (int t = 0; t < t_train; ++t) {
            double frac = t_train > 1 ? double(t) / double(t_train - 1) : 0.0;
            s.beta[size_t(t)] = beta_min + (beta_max - beta_min) * frac;
            s.alpha[size_t(t)] = 1.0 - s.beta[size_t(t)];
            s.alpha_bar[size_t(t)] = prod;  // product of alphas below t
            prod *= s.alpha[size_t(t)];
        }
        return s;
    }

    void check_t(int t) const {
        if (t < 0 || t >= t_train) throw std::invalid_argument("schedule: t out of range");
    }

    // Uniform-stride ascending sub-sequence of length gamma.
    std::vector<int> sample_steps(int gamma) const {
        if (gamma < 1 || gamma > t_train)
            throw std::invalid_argument("schedule: sampling steps out of range");
        std::vector<int> steps(size_t(gamma));
        for (int i = 0; i < gamma; ++i)
            steps[size_t(i)] = int((long long)(i) * t_train / gamma);
        return steps;
    }
};

// z_t = sqrt(abar_t) z0 + sqrt(1-abar_t) eps
template <typename T>
GridT<T> q_sample(const GridT<T>& z0, int t, const GridT<T>& eps, const DiffusionSchedule& s) {
    s.check_t(t);
    if (!z0.same_shape(eps)) throw std::invalid_argument("q_sample: shape mismatch");
    double ab = s.alpha_bar[size_t(t)];
    double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    GridT<T> out(z0.c, z0.h, z0.w);
    for (size_t i = 0; i < z0.v.size(); ++i)
        out.v[i] = T(a * double(z0.v[i]) + b * double(eps.v[i]));
    return out;
}

// Deterministic DDIM update (eta = 0).
template <typename T>
GridT<T> ddim_step(const GridT<T>& z_t, const GridT<T>& eps_t, int t, int t_prev,
                   const DiffusionSchedule& s) {
    if (t_prev < 0 || t <= t_prev) throw std::invalid_argument("ddim_step: need t > t_prev >= 0");
    s.check_t(t);
    if (!z_t.same_shape(eps_t)) throw std::invalid_argument("ddim_step: shape mismatch");
    double ab_t = s.alpha_bar[size_t(t)];
    double ab_p = s.alpha_bar[size_t(t_prev)];
    double sa_t = std::sqrt(ab_t), sb_t = std::sqrt(1.0 - ab_t);
    double sa_p = std::sqrt(ab_p), sb_p = std::sqrt(1.0 - ab_p);
    GridT<T> out(z_t.c, z_t.h, z_t.w);
    for (size_t i = 0; i < z_t.v.size(); ++i) {
        double z0_hat = (double(z_t.v[i]) - sb_t * double(eps_t.v[i])) / sa_t;
        out.v[i] = T(sa_p * z0_hat + sb_p * double(eps_t.v[i]));
    }
    return out;
}

template <typename T>
GridT<T> predict_z0(const GridT<T>& z_t, const GridT<T>& eps_t, int t, const DiffusionSchedule& s) {
    s.check_t(t);
    double ab_t = s.alpha_bar[size_t(t)];
    double sa_t = std::sqrt(ab_t), sb_t = std::sqrt(1.0 - ab_t);
    GridT<T> out(z_t.c, z_t.h, z_t.w);
    for (size_t i = 0; i < z_t.v.size(); ++i)
        out.v[i] = T((double(z_t.v[i]) - sb_t * double(eps_t.v[i])) / sa_t);
    return out;
}

struct CfgConfig {
    double alpha_cfg = 2.0;
    double beta_scale = 1.0;
    int gamma_steps = 30;
};

// Cosine-power guidance ramp. t counts down across the sampling loop:
// t = gamma gives 1 (no guidance), t = 0 gives the full alpha_cfg.
inline double cfg_scale(double t_index, const CfgConfig& cfg) {
    if (t_index < 0.0 || t_index > double(cfg.gamma_steps))
        throw std::invalid_argument("cfg_scale: t out of [0, gamma]");
    double delta =
        (1.0 - std::cos(std::pow(1.0 - t_index / double(cfg.gamma_steps), cfg.beta_scale) * M_PI)) /
        2.0;
    return 1.0 + (cfg.alpha_cfg - 1.0) * delta;
}

// eps_uncond + alpha_eff * (eps_cond - eps_uncond)
template <typename T>
GridT<T> guided_eps(const GridT<T>& eps_uncond, const GridT<T>& eps_cond, double alpha_eff) {
    if (!eps_uncond.same_shape(eps_cond)) throw std::invalid_argument("guided_eps: shape mismatch");
    GridT<T> out(eps_uncond.c, eps_uncond.h, eps_uncond.w);
    for (size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = T(double(eps_uncond.v[i]) +
                     alpha_eff * (double(eps_cond.v[i]) - double(eps_uncond.v[i])));
    return out;
}

}  // namespace tryon
