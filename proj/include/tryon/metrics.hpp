#pragma once

#include "tryon/grid.hpp"

namespace tryon {

// Mean squared error restricted to mask=1 pixels, averaged over channels.
double masked_mse(const Grid3& a, const Grid3& b, const Grid3& mask);

// Peak signal-to-noise ratio for [0,1] images; mse floored at 1e-12.
double psnr_from_mse(double mse);

// Mean structural similarity over all channels, 11x11 Gaussian window
// (sigma 1.5), K1=0.01, K2=0.03, dynamic range 1. Valid-window region only.
double ssim(const Grid3& a, const Grid3& b);

}  // namespace tryon
