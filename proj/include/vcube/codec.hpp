#pragma once

#include <cstdint>
#include <vector>

#include "vcube/lumi_render.hpp"

namespace vcube {

// One encoded portrait ready for the wire. Byte layout of to_bytes():
//   [magic "VCPF" 4B][version 1B][cube id u16 LE][frame index u32 LE]
//   [viewpoint 3 x f32 LE][color bytes u32 LE][alpha bytes u32 LE]
//   [crc32 u32 LE][color payload][alpha payload]
// The CRC (zlib polynomial) covers the 31 header bytes before it plus both
// payloads, so truncated or corrupted messages are rejected on parse.
struct WireFrame {
    uint8_t version = 1;
    uint16_t cube_id = 0;
    uint32_t frame_index = 0;
    float viewpoint[3] = {0, 0, 0};
    std::vector<uint8_t> color_payload;
    std::vector<uint8_t> alpha_payload;

    std::vector<uint8_t> to_bytes() const;
    // Throws IoError on bad magic, version, checksum, or truncation.
    static WireFrame from_bytes(const std::vector<uint8_t>& bytes);
};

// Run-length coding used by both payloads: repeated [count u32 LE][value u8]
// records. Runs may span any structural boundary of the plane they encode.
std::vector<uint8_t> rle_encode(const std::vector<uint8_t>& values);
std::vector<uint8_t> rle_decode(const std::vector<uint8_t>& bytes);

// Reorders a plane into 8x8 tiles, left-to-right then top-to-bottom, each
// tile row-major — the scan order the color payload is run-length coded in.
// Width and height must be multiples of 8.
std::vector<uint8_t> block_scan(const std::vector<uint8_t>& plane, int w, int h);
std::vector<uint8_t> block_unscan(const std::vector<uint8_t>& scanned, int w, int h);

// Quantization step for a quality setting in 1..100: q = max(1, round((101 -
// quality) / 10)). Quality 91+ is lossless per 8-bit plane (q = 1).
int quant_step(int quality);

// Color path: integer BT.601 YCbCr, 2x2 mean-subsampled chroma, uniform
// quantization by quant_step, block-scan + run-length per plane. The color
// payload is self-describing: [q u8][width u16 LE][height u16 LE], then
// [u32 LE length][RLE bytes] for each of Y, Cb, Cr. The alpha plane (alpha
// rounded to 8 bits) is run-length coded in raster order, unquantized.
// Grayscale frames at q = 1 round-trip bit-exactly.
WireFrame encode_portrait(const PortraitFrame& frame, int quality);
PortraitFrame decode_portrait(const WireFrame& wire);

}  // namespace vcube
