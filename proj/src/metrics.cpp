#include "tryon/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tryon {

double masked_mse(const Grid3& a, const Grid3& b, const Grid3& mask) {
    if (!a.same_shape(b)) throw std::invalid_argument("masked_mse: shape mismatch");
    if (mask.c != 1 || mask.h != a.h || mask.w != a.w)
        throw std::invalid_argument("masked_mse: mask shape mismatch");
    double acc = 0.0;
    long cnt = 0;
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) {
            if (mask.at(0, y, x) <= 0.5f) continue;
            for (int ch = 0; ch < a.c; ++ch) {
                double d = double(a.at(ch, y, x)) - double(b.at(ch, y, x));
                acc += d * d;
            }
            ++cnt;
        }
    if (cnt == 0) return 0.0;
    return acc / (double(cnt) * a.c);
}

double psnr_from_mse(double mse) {
    return 10.0 * std::log10(1.0 / std::max(mse, 1e-12));
}

namespace {

constexpr int kWin = 11;

// 11-tap Gaussian, sigma 1.5, normalized
std::vector<double> gaussian_kernel() {
    std::vector<double> k(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        k[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

}  // namespace

double ssim(const Grid3& a, const Grid3& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    if (a.h < kWin || a.w < kWin) throw std::invalid_argument("ssim: image smaller than window");
    static const std::vector<double> kernel = gaussian_kernel();
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

    double total = 0.0;
    long count = 0;
    const int oh = a.h - kWin + 1, ow = a.w - kWin + 1;
    std::vector<double> col(kWin);
    for (int ch = 0; ch < a.c; ++ch) {
        // horizontal pass then vertical pass for the five filtered moments
        const int fh = a.h, fw = ow;
        std::vector<double> ma(fh * fw), mb(fh * fw), maa(fh * fw), mbb(fh * fw), mab(fh * fw);
        for (int y = 0; y < fh; ++y)
            for (int x = 0; x < fw; ++x) {
                double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                for (int k = 0; k < kWin; ++k) {
                    double va = a.at(ch, y, x + k), vb = b.at(ch, y, x + k);
                    sa += kernel[k] * va;
                    sb += kernel[k] * vb;
                    saa += kernel[k] * va * va;
                    sbb += kernel[k] * vb * vb;
                    sab += kernel[k] * va * vb;
                }
                ma[y * fw + x] = sa;
                mb[y * fw + x] = sb;
                maa[y * fw + x] = saa;
                mbb[y * fw + x] = sbb;
                mab[y * fw + x] = sab;
            }
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double mu_a = 0, mu_b = 0, raw_aa = 0, raw_bb = 0, raw_ab = 0;
                for (int k = 0; k < kWin; ++k) {
                    mu_a += kernel[k] * ma[(y + k) * fw + x];
                    mu_b += kernel[k] * mb[(y + k) * fw + x];
                    raw_aa += kernel[k] * maa[(y + k) * fw + x];
                    raw_bb += kernel[k] * mbb[(y + k) * fw + x];
                    raw_ab += kernel[k] * mab[(y + k) * fw + x];
                }
                double var_a = raw_aa - mu_a * mu_a;
                double var_b = raw_bb - mu_b * mu_b;
                double cov = raw_ab - mu_a * mu_b;
                double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
                double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
                total += num / den;
                ++count;
            }
    }
    return total / count;
}

}  // namespace tryon
