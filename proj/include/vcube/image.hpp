#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vcube/error.hpp"

namespace vcube {

// Row-major interleaved image. T is uint8_t for captured color, float for
// depth maps, double for the blending/smoothing stages.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int w, int h, int c = 1, T fill = T{})
        : w_(w), h_(h), c_(c), data_(static_cast<size_t>(w) * h * c, fill) {}

    int width() const { return w_; }
    int height() const { return h_; }
    int channels() const { return c_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    T& at(int x, int y, int c = 0) { return data_[(static_cast<size_t>(y) * w_ + x) * c_ + c]; }
    const T& at(int x, int y, int c = 0) const {
        return data_[(static_cast<size_t>(y) * w_ + x) * c_ + c];
    }
    bool inside(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& pixels() { return data_; }
    const std::vector<T>& pixels() const { return data_; }

    bool same_shape(const Image& o) const {
        return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
    }
    void fill(T v) { data_.assign(data_.size(), v); }

private:
    int w_ = 0, h_ = 0, c_ = 0;
    std::vector<T> data_;
};

using ImageU8 = Image<uint8_t>;
using ImageF = Image<float>;
using ImageD = Image<double>;

// Clamped bilinear sample of channel c; caller guarantees a non-empty image.
template <typename T>
double bilinear(const Image<T>& im, double x, double y, int c = 0) {
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    int x0 = clampi(static_cast<int>(std::floor(x)), 0, im.width() - 1);
    int y0 = clampi(static_cast<int>(std::floor(y)), 0, im.height() - 1);
    int x1 = clampi(x0 + 1, 0, im.width() - 1);
    int y1 = clampi(y0 + 1, 0, im.height() - 1);
    double fx = x - std::floor(x), fy = y - std::floor(y);
    double a = im.at(x0, y0, c) * (1 - fx) + im.at(x1, y0, c) * fx;
    double b = im.at(x0, y1, c) * (1 - fx) + im.at(x1, y1, c) * fx;
    return a * (1 - fy) + b * fy;
}

// --- File formats -----------------------------------------------------------
// PPM/PGM: binary 8-bit. PFM: float32 little-endian, bottom-up rows (standard
// layout, scale field -1.0). PNG: write-only, 8-bit gray/RGB/RGBA.

void write_ppm(const std::string& path, const ImageU8& rgb);
ImageU8 read_ppm(const std::string& path);
void write_pgm(const std::string& path, const ImageU8& gray);
ImageU8 read_pgm(const std::string& path);
void write_pfm(const std::string& path, const ImageF& depth);
ImageF read_pfm(const std::string& path);
void write_png(const std::string& path, const ImageU8& img);

}  // namespace vcube
