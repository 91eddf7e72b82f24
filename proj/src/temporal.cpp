#include "vcube/temporal.hpp"

#include <algorithm>

#include "vcube/error.hpp"

namespace vcube {

namespace {

void require_shape(const ImageD& a, const ImageD& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height())
        throw DimensionMismatch(what);
}

// One-dimensional min over a centered window of 2n+1 samples, zero outside
// the array. Window size is small (21 by default), so the direct scan wins
// over a monotonic queue in clarity and is fast enough.
void min_pass_rows(const ImageD& in, int n, ImageD& out) {
    int w = in.width(), h = in.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = (x - n < 0 || x + n >= w) ? 0.0 : in.at(x, y);
            int lo = std::max(0, x - n), hi = std::min(w - 1, x + n);
            for (int i = lo; i <= hi; ++i) m = std::min(m, in.at(i, y));
            out.at(x, y) = m;
        }
}

void min_pass_cols(const ImageD& in, int n, ImageD& out) {
    int w = in.width(), h = in.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = (y - n < 0 || y + n >= h) ? 0.0 : in.at(x, y);
            int lo = std::max(0, y - n), hi = std::min(h - 1, y + n);
            for (int i = lo; i <= hi; ++i) m = std::min(m, in.at(x, i));
            out.at(x, y) = m;
        }
}

}  // namespace

ImageD smooth_alpha(TemporalState& state, const ImageD& alpha) {
    if (state.alpha_h.pixels().empty()) {
        state.alpha_h = alpha;
        return alpha;
    }
    require_shape(state.alpha_h, alpha, "alpha history and input differ in size");
    ImageD out(alpha.width(), alpha.height());
    for (int y = 0; y < alpha.height(); ++y)
        for (int x = 0; x < alpha.width(); ++x)
            out.at(x, y) = state.w * alpha.at(x, y) + (1.0 - state.w) * state.alpha_h.at(x, y);
    state.alpha_h = out;
    return out;
}

std::pair<ImageD, ImageD> border_maps(const ImageD& alpha_prime, int n) {
    int w = alpha_prime.width(), h = alpha_prime.height();
    ImageD interior(w, h), border(w, h);
    if (n <= 0) {
        interior = alpha_prime;
    } else {
        ImageD rows(w, h);
        min_pass_rows(alpha_prime, n, rows);
        min_pass_cols(rows, n, interior);
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) border.at(x, y) = alpha_prime.at(x, y) - interior.at(x, y);
    return {std::move(interior), std::move(border)};
}

ImageD smooth_color(TemporalState& state, const ImageD& color, const ImageD& alpha,
                    const ImageD& alpha_prime, const ImageD& border) {
    if (state.color_h.pixels().empty()) {
        state.color_h = color;
        return color;
    }
    require_shape(state.color_h, color, "color history and input differ in size");
    int w = color.width(), h = color.height(), ch = color.channels();
    ImageD out(w, h, ch);
    double wgt = state.w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double ap = alpha_prime.at(x, y);
            double bd = border.at(x, y);
            double a = alpha.at(x, y);
            for (int c = 0; c < ch; ++c) {
                double i = color.at(x, y, c);
                double ih = state.color_h.at(x, y, c);
                if (ap > 0.0)
                    out.at(x, y, c) = ((ap - (1.0 - wgt) * bd) * i + (1.0 - wgt) * bd * ih) / ap;
                else
                    out.at(x, y, c) = 0.0;
                state.color_h.at(x, y, c) = wgt * a * i + (1.0 - wgt * a) * ih;
            }
        }
    return out;
}

std::pair<ImageD, ImageD> smooth_frame(TemporalState& state, const ImageD& color,
                                       const ImageD& alpha) {
    ImageD ap = smooth_alpha(state, alpha);
    auto [interior, border] = border_maps(ap, state.border_n);
    (void)interior;
    ImageD cp = smooth_color(state, color, alpha, ap, border);
    return {std::move(cp), std::move(ap)};
}

}  // namespace vcube
