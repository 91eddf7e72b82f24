#include "vcube/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vcube/error.hpp"

namespace vcube {

namespace {

constexpr char kMagic[4] = {'V', 'C', 'P', 'F'};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void put_f32(std::vector<uint8_t>& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

uint32_t get_u32(const uint8_t* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

uint8_t clamp_byte(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Integer BT.601 full-range conversion. For gray pixels the chroma terms
// cancel exactly, which keeps grayscale frames lossless at q = 1.
void rgb_to_ycbcr(uint8_t r, uint8_t g, uint8_t b, uint8_t& y, uint8_t& cb, uint8_t& cr) {
    y = clamp_byte(0.299 * r + 0.587 * g + 0.114 * b);
    cb = clamp_byte(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
    cr = clamp_byte(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
}

void ycbcr_to_rgb(uint8_t y, uint8_t cb, uint8_t cr, uint8_t& r, uint8_t& g, uint8_t& b) {
    double yd = y, cbd = cb - 128.0, crd = cr - 128.0;
    r = clamp_byte(yd + 1.402 * crd);
    g = clamp_byte(yd - 0.344136 * cbd - 0.714136 * crd);
    b = clamp_byte(yd + 1.772 * cbd);
}

std::vector<uint8_t> quantize(const std::vector<uint8_t>& plane, int q) {
    if (q <= 1) return plane;
    std::vector<uint8_t> out(plane.size());
    for (size_t i = 0; i < plane.size(); ++i)
        out[i] = static_cast<uint8_t>((plane[i] + q / 2) / q);
    return out;
}

std::vector<uint8_t> dequantize(const std::vector<uint8_t>& plane, int q) {
    if (q <= 1) return plane;
    std::vector<uint8_t> out(plane.size());
    for (size_t i = 0; i < plane.size(); ++i)
        out[i] = static_cast<uint8_t>(std::min(255, int(plane[i]) * q));
    return out;
}

std::vector<uint8_t> encode_plane(const std::vector<uint8_t>& plane, int w, int h, int q) {
    return rle_encode(block_scan(quantize(plane, q), w, h));
}

std::vector<uint8_t> decode_plane(const std::vector<uint8_t>& bytes, int w, int h, int q) {
    return dequantize(block_unscan(rle_decode(bytes), w, h), q);
}

}  // namespace

std::vector<uint8_t> rle_encode(const std::vector<uint8_t>& values) {
    std::vector<uint8_t> out;
    size_t i = 0;
    while (i < values.size()) {
        uint8_t v = values[i];
        size_t j = i;
        while (j < values.size() && values[j] == v) ++j;
        put_u32(out, static_cast<uint32_t>(j - i));
        out.push_back(v);
        i = j;
    }
    return out;
}

std::vector<uint8_t> rle_decode(const std::vector<uint8_t>& bytes) {
    if (bytes.size() % 5 != 0) throw IoError("run-length stream length not a multiple of 5");
    std::vector<uint8_t> out;
    for (size_t i = 0; i < bytes.size(); i += 5) {
        uint32_t count = get_u32(&bytes[i]);
        out.insert(out.end(), count, bytes[i + 4]);
    }
    return out;
}

std::vector<uint8_t> block_scan(const std::vector<uint8_t>& plane, int w, int h) {
    if (w % 8 || h % 8) throw DimensionMismatch("block scan wants multiples of 8");
    std::vector<uint8_t> out;
    out.reserve(plane.size());
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) out.push_back(plane[(by + y) * w + bx + x]);
    return out;
}

std::vector<uint8_t> block_unscan(const std::vector<uint8_t>& scanned, int w, int h) {
    if (w % 8 || h % 8) throw DimensionMismatch("block scan wants multiples of 8");
    if (scanned.size() != static_cast<size_t>(w) * h)
        throw IoError("decoded plane has the wrong pixel count");
    std::vector<uint8_t> out(scanned.size());
    size_t i = 0;
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) out[(by + y) * w + bx + x] = scanned[i++];
    return out;
}

int quant_step(int quality) {
    return std::max(1, static_cast<int>(std::lround((101.0 - quality) / 10.0)));
}

std::vector<uint8_t> WireFrame::to_bytes() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(version);
    put_u16(out, cube_id);
    put_u32(out, frame_index);
    for (float v : viewpoint) put_f32(out, v);
    put_u32(out, static_cast<uint32_t>(color_payload.size()));
    put_u32(out, static_cast<uint32_t>(alpha_payload.size()));

    uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data(), static_cast<uInt>(out.size()));
    crc = crc32(crc, color_payload.data(), static_cast<uInt>(color_payload.size()));
    crc = crc32(crc, alpha_payload.data(), static_cast<uInt>(alpha_payload.size()));
    put_u32(out, crc);

    out.insert(out.end(), color_payload.begin(), color_payload.end());
    out.insert(out.end(), alpha_payload.begin(), alpha_payload.end());
    return out;
}

WireFrame WireFrame::from_bytes(const std::vector<uint8_t>& bytes) {
    constexpr size_t kHeader = 35;
    if (bytes.size() < kHeader) throw IoError("wire frame shorter than its header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("bad wire magic");
    WireFrame wf;
    wf.version = bytes[4];
    if (wf.version != 1) throw IoError("unsupported wire version");
    wf.cube_id = static_cast<uint16_t>(bytes[5] | bytes[6] << 8);
    wf.frame_index = get_u32(&bytes[7]);
    for (int i = 0; i < 3; ++i) {
        uint32_t bits = get_u32(&bytes[11 + 4 * i]);
        std::memcpy(&wf.viewpoint[i], &bits, 4);
    }
    uint32_t clen = get_u32(&bytes[23]);
    uint32_t alen = get_u32(&bytes[27]);
    uint32_t want_crc = get_u32(&bytes[31]);
    if (bytes.size() != kHeader + size_t(clen) + alen) throw IoError("wire frame length mismatch");

    wf.color_payload.assign(bytes.begin() + kHeader, bytes.begin() + kHeader + clen);
    wf.alpha_payload.assign(bytes.begin() + kHeader + clen, bytes.end());

    uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data(), 31);
    crc = crc32(crc, wf.color_payload.data(), static_cast<uInt>(wf.color_payload.size()));
    crc = crc32(crc, wf.alpha_payload.data(), static_cast<uInt>(wf.alpha_payload.size()));
    if (crc != want_crc) throw IoError("wire frame checksum mismatch");
    return wf;
}

WireFrame encode_portrait(const PortraitFrame& frame, int quality) {
    const int w = frame.color.width(), h = frame.color.height();
    const int q = quant_step(quality);

    std::vector<uint8_t> yp(static_cast<size_t>(w) * h);
    std::vector<uint8_t> cbf(yp.size()), crf(yp.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            rgb_to_ycbcr(frame.color.at(x, y, 0), frame.color.at(x, y, 1), frame.color.at(x, y, 2),
                         yp[i], cbf[i], crf[i]);
        }
    // 2x2 mean subsampling of the chroma planes.
    int cw = w / 2, chh = h / 2;
    std::vector<uint8_t> cb(static_cast<size_t>(cw) * chh), cr(cb.size());
    for (int y = 0; y < chh; ++y)
        for (int x = 0; x < cw; ++x) {
            size_t a = static_cast<size_t>(2 * y) * w + 2 * x;
            size_t b = a + w;
            cb[static_cast<size_t>(y) * cw + x] =
                static_cast<uint8_t>((cbf[a] + cbf[a + 1] + cbf[b] + cbf[b + 1] + 2) / 4);
            cr[static_cast<size_t>(y) * cw + x] =
                static_cast<uint8_t>((crf[a] + crf[a + 1] + crf[b] + crf[b + 1] + 2) / 4);
        }

    WireFrame wf;
    wf.cube_id = static_cast<uint16_t>(frame.cube_id);
    wf.frame_index = frame.frame_index;
    for (int i = 0; i < 3; ++i) wf.viewpoint[i] = static_cast<float>(frame.viewpoint[i]);

    wf.color_payload.push_back(static_cast<uint8_t>(q));
    put_u16(wf.color_payload, static_cast<uint16_t>(w));
    put_u16(wf.color_payload, static_cast<uint16_t>(h));
    for (auto* enc : {&yp, &cb, &cr}) {
        int pw = enc == &yp ? w : cw, ph = enc == &yp ? h : chh;
        auto bytes = encode_plane(*enc, pw, ph, q);
        put_u32(wf.color_payload, static_cast<uint32_t>(bytes.size()));
        wf.color_payload.insert(wf.color_payload.end(), bytes.begin(), bytes.end());
    }

    std::vector<uint8_t> ap(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            ap[static_cast<size_t>(y) * w + x] = clamp_byte(255.0 * frame.alpha.at(x, y));
    wf.alpha_payload = rle_encode(ap);
    return wf;
}

PortraitFrame decode_portrait(const WireFrame& wire) {
    const auto& cp = wire.color_payload;
    if (cp.size() < 5) throw IoError("color payload shorter than its sub-header");
    int q = cp[0];
    int w = cp[1] | cp[2] << 8;
    int h = cp[3] | cp[4] << 8;
    if (w <= 0 || h <= 0 || w % 8 || h % 8) throw IoError("bad portrait dimensions");
    int cw = w / 2, chh = h / 2;

    size_t off = 5;
    std::vector<std::vector<uint8_t>> planes;
    for (int p = 0; p < 3; ++p) {
        if (off + 4 > cp.size()) throw IoError("truncated color payload");
        uint32_t len = get_u32(&cp[off]);
        off += 4;
        if (off + len > cp.size()) throw IoError("truncated color plane");
        std::vector<uint8_t> bytes(cp.begin() + off, cp.begin() + off + len);
        off += len;
        int pw = p == 0 ? w : cw, ph = p == 0 ? h : chh;
        planes.push_back(decode_plane(bytes, pw, ph, q));
    }

    std::vector<uint8_t> ap = rle_decode(wire.alpha_payload);
    if (ap.size() != static_cast<size_t>(w) * h) throw IoError("alpha plane size mismatch");

    PortraitFrame out;
    out.cube_id = wire.cube_id;
    out.frame_index = wire.frame_index;
    out.viewpoint = Vector3d(wire.viewpoint[0], wire.viewpoint[1], wire.viewpoint[2]);
    out.color = ImageU8(w, h, 3, 0);
    out.alpha = ImageF(w, h, 1, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            // Chroma upsampling by replication of the 2x2 block value.
            size_t ci = static_cast<size_t>(y / 2) * cw + x / 2;
            uint8_t r, g, b;
            ycbcr_to_rgb(planes[0][i], planes[1][ci], planes[2][ci], r, g, b);
            out.color.at(x, y, 0) = r;
            out.color.at(x, y, 1) = g;
            out.color.at(x, y, 2) = b;
            out.alpha.at(x, y) = static_cast<float>(ap[i] / 255.0);
        }
    return out;
}

}  // namespace vcube
