#pragma once

#include <utility>

#include "vcube/image.hpp"

namespace vcube {

// Per-stream temporal smoothing state. All math runs in float64 so the
// recursions are reproducible bit-for-bit; quantization to 8-bit is the
// serializer's business. History buffers start empty and adopt the first
// frame unchanged.
struct TemporalState {
    double w = 0.5;    // blending weight, (0, 1]
    int border_n = 10; // min-pool radius separating border from interior

    ImageD alpha_h;  // empty until the first frame
    ImageD color_h;  // empty until the first frame; 3 channels
};

// alpha' = w * alpha + (1 - w) * alpha_h, then alpha_h <- alpha'. The first
// call primes the history and returns alpha unchanged.
// Throws DimensionMismatch when alpha disagrees with the primed history.
ImageD smooth_alpha(TemporalState& state, const ImageD& alpha);

// Splits alpha' into a stable interior and a fluctuating border band:
// interior = min-pool over a (2n+1) x (2n+1) window (pixels outside the
// image count as 0), border = alpha' - interior.
std::pair<ImageD, ImageD> border_maps(const ImageD& alpha_prime, int n);

// Color recursion, evaluated in exactly this order:
//   I' = ((alpha' - (1-w) * border) * I + (1-w) * border * I_h) / alpha'
//   I_h <- w * alpha * I + (1 - w * alpha) * I_h     (raw alpha, not alpha')
// Pixels with alpha' = 0 output black and skip the division. The first call
// primes I_h and returns I unchanged.
ImageD smooth_color(TemporalState& state, const ImageD& color, const ImageD& alpha,
                    const ImageD& alpha_prime, const ImageD& border);

// One frame through the full recursion: alpha blend, border split, color
// blend. Returns (color', alpha').
std::pair<ImageD, ImageD> smooth_frame(TemporalState& state, const ImageD& color,
                                       const ImageD& alpha);

}  // namespace vcube
