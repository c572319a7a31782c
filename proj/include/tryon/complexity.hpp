#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tryon/nn.hpp"

namespace tryon {

// Feature-stack complexity summary: sparsity is the fraction of near-zero
// activations, variance the population variance over all elements, gradient
// the mean forward-difference magnitude along token and embedding axes.
struct ComplexityVector {
    double sparsity = 0.0;
    double variance = 0.0;
    double gradient = 0.0;
};

template <typename S>
double stack_sparsity(const std::vector<nn::Mat<S>>& f, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("sparsity: delta must be positive");
    if (f.empty() || f[0].size() == 0) throw std::invalid_argument("sparsity: empty stack");
    long long hits = 0, total = 0;
    for (const auto& layer : f) {
        total += layer.size();
        for (Eigen::Index i = 0; i < layer.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.cols(); ++j)
                if (std::abs(double(layer(i, j))) < delta) ++hits;
    }
    return double(hits) / double(total);
}

template <typename S>
double stack_variance(const std::vector<nn::Mat<S>>& f) {
    long long total = 0;
    for (const auto& layer : f) total += layer.size();
    if (total < 2) throw std::invalid_argument("variance: need at least 2 elements");
    double sum = 0.0;
    for (const auto& layer : f)
        for (Eigen::Index i = 0; i < layer.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.cols(); ++j) sum += double(layer(i, j));
    double mean = sum / double(total);
    double acc = 0.0;
    for (const auto& layer : f)
        for (Eigen::Index i = 0; i < layer.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.cols(); ++j) {
                double d = double(layer(i, j)) - mean;
                acc += d * d;
            }
    return acc / double(total);
}

template <typename S>
double stack_gradient_magnitude(const std::vector<nn::Mat<S>>& f) {
    if (f.empty()) throw std::invalid_argument("gradient_magnitude: empty stack");
    const Eigen::Index s = f[0].rows(), d = f[0].cols();
    if (s < 2 || d < 2) throw std::invalid_argument("gradient_magnitude: needs s >= 2 and d >= 2");
    double acc = 0.0;
    for (const auto& layer : f)
        for (Eigen::Index j = 0; j + 1 < s; ++j)
            for (Eigen::Index k = 0; k + 1 < d; ++k) {
                double dj = double(layer(j + 1, k)) - double(layer(j, k));
                double dk = double(layer(j, k + 1)) - double(layer(j, k));
                acc += std::sqrt(dj * dj + dk * dk);
            }
    return acc / (double(f.size()) * double(s - 1) * double(d - 1));
}

template <typename S>
ComplexityVector complexity_vector(const std::vector<nn::Mat<S>>& f, double delta) {
    ComplexityVector c;
    c.sparsity = stack_sparsity(f, delta);
    c.variance = stack_variance(f);
    c.gradient = stack_gradient_magnitude(f);
    return c;
}

}  // namespace tryon
