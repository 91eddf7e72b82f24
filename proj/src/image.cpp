#include "vcube/image.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace vcube {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

void read_pnm_header(std::ifstream& f, const char* magic, int& w, int& h) {
    std::string m;
    f >> m;
    if (m != magic) throw IoError(std::string("bad magic, expected ") + magic);
    int maxval = 0;
    f >> w >> h >> maxval;
    if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PNM header");
    f.get();  // single whitespace before raster
}

bool host_is_little_endian() {
    uint16_t x = 1;
    uint8_t b;
    std::memcpy(&b, &x, 1);
    return b == 1;
}

}  // namespace

void write_ppm(const std::string& path, const ImageU8& rgb) {
    if (rgb.channels() != 3) throw DimensionMismatch("write_ppm wants 3 channels");
    auto f = open_out(path);
    f << "P6\n" << rgb.width() << " " << rgb.height() << "\n255\n";
    f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

ImageU8 read_ppm(const std::string& path) {
    auto f = open_in(path);
    int w, h;
    read_pnm_header(f, "P6", w, h);
    ImageU8 img(w, h, 3);
    f.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!f) throw IoError("short PPM raster: " + path);
    return img;
}

void write_pgm(const std::string& path, const ImageU8& gray) {
    if (gray.channels() != 1) throw DimensionMismatch("write_pgm wants 1 channel");
    auto f = open_out(path);
    f << "P5\n" << gray.width() << " " << gray.height() << "\n255\n";
    f.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

ImageU8 read_pgm(const std::string& path) {
    auto f = open_in(path);
    int w, h;
    read_pnm_header(f, "P5", w, h);
    ImageU8 img(w, h, 1);
    f.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!f) throw IoError("short PGM raster: " + path);
    return img;
}

void write_pfm(const std::string& path, const ImageF& depth) {
    if (depth.channels() != 1) throw DimensionMismatch("write_pfm wants 1 channel");
    if (!host_is_little_endian()) throw IoError("PFM writer assumes little-endian host");
    auto f = open_out(path);
    f << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
    // PFM stores rows bottom-up.
    for (int y = depth.height() - 1; y >= 0; --y)
        f.write(reinterpret_cast<const char*>(&depth.at(0, y)),
                static_cast<std::streamsize>(sizeof(float)) * depth.width());
}

ImageF read_pfm(const std::string& path) {
    auto f = open_in(path);
    std::string magic;
    f >> magic;
    if (magic != "Pf") throw IoError("bad PFM magic: " + path);
    int w, h;
    double scale;
    f >> w >> h >> scale;
    if (w <= 0 || h <= 0 || scale >= 0) throw IoError("unsupported PFM header (want little-endian)");
    f.get();
    ImageF img(w, h, 1);
    for (int y = h - 1; y >= 0; --y)
        f.read(reinterpret_cast<char*>(&img.at(0, y)),
               static_cast<std::streamsize>(sizeof(float)) * w);
    if (!f) throw IoError("short PFM raster: " + path);
    return img;
}

namespace {

void png_chunk(std::ofstream& f, const char type[4], const std::vector<uint8_t>& payload) {
    auto be32 = [&](uint32_t v) {
        uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
        f.write(reinterpret_cast<char*>(b), 4);
    };
    be32(static_cast<uint32_t>(payload.size()));
    f.write(type, 4);
    if (!payload.empty()) f.write(reinterpret_cast<const char*>(payload.data()),
                                  static_cast<std::streamsize>(payload.size()));
    uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!payload.empty()) crc = crc32(crc, payload.data(), static_cast<uInt>(payload.size()));
    be32(crc);
}

}  // namespace

void write_png(const std::string& path, const ImageU8& img) {
    int c = img.channels();
    uint8_t color_type;
    if (c == 1) color_type = 0;
    else if (c == 3) color_type = 2;
    else if (c == 4) color_type = 6;
    else throw DimensionMismatch("write_png wants 1, 3 or 4 channels");

    auto f = open_out(path);
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    f.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<uint8_t> ihdr(13);
    auto put32 = [](uint8_t* p, uint32_t v) {
        p[0] = uint8_t(v >> 24); p[1] = uint8_t(v >> 16); p[2] = uint8_t(v >> 8); p[3] = uint8_t(v);
    };
    put32(&ihdr[0], static_cast<uint32_t>(img.width()));
    put32(&ihdr[4], static_cast<uint32_t>(img.height()));
    ihdr[8] = 8;           // bit depth
    ihdr[9] = color_type;
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    png_chunk(f, "IHDR", ihdr);

    // Filter type 0 per scanline; fixed zlib level keeps output byte-stable.
    std::vector<uint8_t> raw;
    raw.reserve((static_cast<size_t>(img.width()) * c + 1) * img.height());
    for (int y = 0; y < img.height(); ++y) {
        raw.push_back(0);
        const uint8_t* row = &img.at(0, y, 0);
        raw.insert(raw.end(), row, row + static_cast<size_t>(img.width()) * c);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> idat(bound);
    if (compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("PNG deflate failed");
    idat.resize(bound);
    png_chunk(f, "IDAT", idat);
    png_chunk(f, "IEND", {});
}

}  // namespace vcube
