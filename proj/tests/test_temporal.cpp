#include <doctest.h>

#include <cmath>

#include "vcube/error.hpp"
#include "vcube/temporal.hpp"

using namespace vcube;

namespace {

// Small deterministic LCG for test data; independent of the library RNG.
struct Lcg {
    uint32_t s;
    double next() {
        s = s * 1664525u + 1013904223u;
        return (s >> 8) / double(1 << 24);
    }
};

ImageD random_image(int w, int h, int ch, uint32_t seed) {
    ImageD img(w, h, ch);
    Lcg g{seed};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) img.at(x, y, c) = g.next();
    return img;
}

}  // namespace

TEST_CASE("alpha blend: direct formula, first-frame priming, w=1 passthrough") {
    TemporalState st;
    ImageD zero(8, 8, 1, 0.0);
    ImageD one(8, 8, 1, 1.0);

    // First frame passes through and primes the history.
    ImageD first = smooth_alpha(st, zero);
    CHECK(first.at(3, 3) == 0.0);
    // Now a fully opaque frame blends halfway.
    ImageD ap = smooth_alpha(st, one);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(ap.at(x, y) == 0.5);
    // History advanced to the blended value.
    CHECK(st.alpha_h.at(0, 0) == 0.5);

    TemporalState pass;
    pass.w = 1.0;
    smooth_alpha(pass, zero);
    ImageD again = smooth_alpha(pass, one);
    CHECK(again.at(2, 5) == 1.0);

    ImageD wrong(4, 4, 1, 0.0);
    CHECK_THROWS_AS(smooth_alpha(st, wrong), DimensionMismatch);
}

TEST_CASE("alpha blend: geometric convergence to a constant input") {
    TemporalState st;
    ImageD start(4, 4, 1, 0.0);
    ImageD target(4, 4, 1, 0.8);
    smooth_alpha(st, start);
    double expect_gap = 0.8;
    for (int t = 1; t <= 12; ++t) {
        ImageD ap = smooth_alpha(st, target);
        expect_gap *= 1.0 - st.w;
        CHECK(std::abs(target.at(1, 1) - ap.at(1, 1)) == doctest::Approx(expect_gap).epsilon(1e-12));
    }
}

TEST_CASE("border split: constant image, n=0, and brute-force window minimum") {
    int w = 33, h = 21, n = 4;
    ImageD ones(w, h, 1, 1.0);
    auto [interior, border] = border_maps(ones, n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool inside = x >= n && y >= n && x < w - n && y < h - n;
            CHECK(interior.at(x, y) == (inside ? 1.0 : 0.0));
            CHECK(border.at(x, y) == (inside ? 0.0 : 1.0));
        }

    ImageD rnd = random_image(w, h, 1, 77);
    auto [i0, b0] = border_maps(rnd, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            CHECK(i0.at(x, y) == rnd.at(x, y));
            CHECK(b0.at(x, y) == 0.0);
        }

    auto [ir, br] = border_maps(rnd, n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double m = 1e300;
            for (int dy = -n; dy <= n; ++dy)
                for (int dx = -n; dx <= n; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    double v =
                        (nx < 0 || ny < 0 || nx >= w || ny >= h) ? 0.0 : rnd.at(nx, ny);
                    m = std::min(m, v);
                }
            CHECK(ir.at(x, y) == m);  // exact equality against the brute-force scan
            CHECK(br.at(x, y) == rnd.at(x, y) - m);
        }
}

TEST_CASE("color blend: collapse without border, history update, brute-force float64") {
    int w = 16, h = 12;
    TemporalState st;
    ImageD c0 = random_image(w, h, 3, 11);
    ImageD a0 = random_image(w, h, 1, 12);
    ImageD ap0 = smooth_alpha(st, a0);
    auto [i0, b0] = border_maps(ap0, st.border_n);
    ImageD out0 = smooth_color(st, c0, a0, ap0, b0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) CHECK(out0.at(x, y, c) == c0.at(x, y, c));

    // Zero border: I' = I exactly even though history differs.
    ImageD c1 = random_image(w, h, 3, 21);
    ImageD ones(w, h, 1, 1.0);
    ImageD zeros(w, h, 1, 0.0);
    ImageD hist_before = st.color_h;
    ImageD out1 = smooth_color(st, c1, ones, ones, zeros);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                CHECK(out1.at(x, y, c) == c1.at(x, y, c));
                // alpha = 1, w = 0.5: history moves to the midpoint.
                double want = 0.5 * c1.at(x, y, c) + 0.5 * hist_before.at(x, y, c);
                CHECK(st.color_h.at(x, y, c) == want);
            }

    // Random everything against a per-pixel float64 oracle, exact equality.
    ImageD c2 = random_image(w, h, 3, 31);
    ImageD a2 = random_image(w, h, 1, 32);
    ImageD ap2 = random_image(w, h, 1, 33);
    ImageD bd2 = random_image(w, h, 1, 34);
    ImageD hist = st.color_h;
    ImageD out2 = smooth_color(st, c2, a2, ap2, bd2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double ap = ap2.at(x, y), bd = bd2.at(x, y), a = a2.at(x, y);
                double i = c2.at(x, y, c), ih = hist.at(x, y, c);
                double want = ap > 0.0 ? ((ap - 0.5 * bd) * i + 0.5 * bd * ih) / ap : 0.0;
                CHECK(out2.at(x, y, c) == want);
                CHECK(st.color_h.at(x, y, c) == 0.5 * a * i + (1.0 - 0.5 * a) * ih);
            }
}

TEST_CASE("full frame recursion: range preservation and convergence") {
    int w = 48, h = 36;
    TemporalState st;
    ImageD c_start = random_image(w, h, 3, 41);
    ImageD a_start = random_image(w, h, 1, 42);
    smooth_frame(st, c_start, a_start);

    ImageD c_tgt = random_image(w, h, 3, 51);
    // Opaque target: at convergence the min-pool border vanishes away from
    // the image edge, exposing the interior color passthrough.
    ImageD a_tgt(w, h, 1, 1.0);
    ImageD last_a, last_c;
    for (int t = 0; t < 40; ++t) {
        auto [cp, ap] = smooth_frame(st, c_tgt, a_tgt);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                CHECK(ap.at(x, y) >= 0.0);
                CHECK(ap.at(x, y) <= 1.0);
            }
        last_a = ap;
        last_c = cp;
    }
    // Alpha converges geometrically: after 40 steps the gap is ~(1/2)^40.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            CHECK(std::abs(last_a.at(x, y) - a_tgt.at(x, y)) < 1e-9);
    // Interior colors (border ~ 0 at convergence) match the input sequence.
    auto [interior, border] = border_maps(last_a, st.border_n);
    long checked = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (border.at(x, y) > 1e-9) continue;
            for (int c = 0; c < 3; ++c)
                CHECK(std::abs(last_c.at(x, y, c) - c_tgt.at(x, y, c)) < 1e-9);
            ++checked;
        }
    CHECK(checked > 100);
}
