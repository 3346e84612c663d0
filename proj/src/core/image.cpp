#include "core/image.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace texsplat {

namespace {

void write_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

uint32_t read_u32_be(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& payload) {
    write_u32_be(out, uint32_t(payload.size()));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uint32_t crc = crc32(0, out.data() + start, uInt(out.size() - start));
    write_u32_be(out, crc);
}

std::vector<uint8_t> zlib_compress(const std::vector<uint8_t>& in) {
    uLongf bound = compressBound(uLong(in.size()));
    std::vector<uint8_t> out(bound);
    if (compress2(out.data(), &bound, in.data(), uLong(in.size()), 6) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    out.resize(bound);
    return out;
}

std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t size, size_t expect) {
    std::vector<uint8_t> out(expect);
    uLongf out_len = uLongf(expect);
    int rc = uncompress(out.data(), &out_len, data, uLong(size));
    if (rc != Z_OK || out_len != expect) throw std::runtime_error("png: inflate failed");
    return out;
}

uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return uint8_t(a);
    if (pb <= pc) return uint8_t(b);
    return uint8_t(c);
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const void* data, size_t size) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    f.write(static_cast<const char*>(data), std::streamsize(size));
    if (!f) throw std::runtime_error("short write: " + path);
}

} // namespace

Image load_png(const std::string& path) {
    std::vector<uint8_t> buf = read_file(path);
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
        throw std::runtime_error("not a PNG file: " + path);

    uint32_t w = 0, h = 0;
    int bit_depth = 0, color_type = 0;
    std::vector<uint8_t> idat;
    size_t pos = 8;
    bool seen_end = false;
    while (pos + 8 <= buf.size() && !seen_end) {
        uint32_t len = read_u32_be(&buf[pos]);
        if (pos + 12 + len > buf.size()) throw std::runtime_error("truncated PNG: " + path);
        const char* type = reinterpret_cast<const char*>(&buf[pos + 4]);
        const uint8_t* payload = &buf[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            w = read_u32_be(payload);
            h = read_u32_be(payload + 4);
            bit_depth = payload[8];
            color_type = payload[9];
            if (payload[12] != 0) throw std::runtime_error("interlaced PNG unsupported: " + path);
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_end = true;
        }
        pos += 12 + len;
    }
    if (w == 0 || h == 0 || idat.empty()) throw std::runtime_error("malformed PNG: " + path);
    if (bit_depth != 8) throw std::runtime_error("only 8-bit PNG supported: " + path);

    int ch;
    switch (color_type) {
    case 0: ch = 1; break;
    case 2: ch = 3; break;
    case 4: ch = 2; break;
    case 6: ch = 4; break;
    default: throw std::runtime_error("unsupported PNG color type: " + path);
    }

    size_t stride = size_t(w) * ch;
    std::vector<uint8_t> raw = zlib_decompress(idat.data(), idat.size(), (stride + 1) * h);

    std::vector<uint8_t> px(stride * h);
    std::vector<uint8_t> prev(stride, 0);
    for (uint32_t y = 0; y < h; ++y) {
        uint8_t filter = raw[(stride + 1) * y];
        const uint8_t* src = &raw[(stride + 1) * y + 1];
        uint8_t* dst = &px[stride * y];
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= size_t(ch) ? dst[i - ch] : 0;
            int b = prev[i];
            int c = i >= size_t(ch) ? prev[i - ch] : 0;
            int v = src[i];
            switch (filter) {
            case 0: break;
            case 1: v += a; break;
            case 2: v += b; break;
            case 3: v += (a + b) / 2; break;
            case 4: v += paeth(a, b, c); break;
            default: throw std::runtime_error("bad PNG filter: " + path);
            }
            dst[i] = uint8_t(v);
        }
        std::memcpy(prev.data(), dst, stride);
    }

    Image img(int(h), int(w), ch);
    for (size_t i = 0; i < px.size(); ++i) img.data[i] = float(px[i]) / 255.0f;
    return img;
}

void save_png(const Image& img, const std::string& path) {
    if (img.c != 3 && img.c != 4) throw std::runtime_error("save_png expects 3 or 4 channels");
    size_t stride = size_t(img.w) * img.c;
    std::vector<uint8_t> raw((stride + 1) * img.h);
    for (int y = 0; y < img.h; ++y) {
        raw[(stride + 1) * y] = 0; // filter: none
        for (size_t i = 0; i < stride; ++i) {
            float v = img.data[stride * y + i];
            v = std::min(std::max(v, 0.0f), 1.0f);
            raw[(stride + 1) * y + 1 + i] = uint8_t(std::lround(v * 255.0f));
        }
    }

    std::vector<uint8_t> out;
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);

    std::vector<uint8_t> ihdr;
    write_u32_be(ihdr, uint32_t(img.w));
    write_u32_be(ihdr, uint32_t(img.h));
    ihdr.push_back(8);                          // bit depth
    ihdr.push_back(img.c == 3 ? 2 : 6);         // color type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);                          // no interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_compress(raw));
    append_chunk(out, "IEND", {});
    write_file(path, out.data(), out.size());
}

Image load_tgim(const std::string& path) {
    std::vector<uint8_t> buf = read_file(path);
    if (buf.size() < 16 || std::memcmp(buf.data(), "TGIM", 4) != 0)
        throw std::runtime_error("not a TGIM file: " + path);
    auto rd = [&](size_t off) {
        uint32_t v;
        std::memcpy(&v, &buf[off], 4);
        return v;
    };
    uint32_t h = rd(4), w = rd(8), c = rd(12);
    size_t n = size_t(h) * w * c;
    if (buf.size() != 16 + n * 4) throw std::runtime_error("truncated TGIM file: " + path);
    Image img{int(h), int(w), int(c)};
    std::memcpy(img.data.data(), &buf[16], n * 4);
    return img;
}

void save_tgim(const Image& img, const std::string& path) {
    std::vector<uint8_t> buf(16 + img.data.size() * 4);
    std::memcpy(buf.data(), "TGIM", 4);
    uint32_t dims[3] = {uint32_t(img.h), uint32_t(img.w), uint32_t(img.c)};
    std::memcpy(buf.data() + 4, dims, 12);
    std::memcpy(buf.data() + 16, img.data.data(), img.data.size() * 4);
    write_file(path, buf.data(), buf.size());
}

} // namespace texsplat
