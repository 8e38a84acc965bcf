#include "bspec/io_util.hpp"

#include "bspec/errors.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace bspec::io {

void put_u8(std::string& buf, std::uint8_t v) {
    buf.push_back(static_cast<char>(v));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint8_t Reader::u8() {
    if (off + 1 > buf.size()) throw CacheError("file truncated");
    return static_cast<std::uint8_t>(buf[off++]);
}

std::uint32_t Reader::u32() {
    if (off + 4 > buf.size()) throw CacheError("file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[off + i])) << (8 * i);
    off += 4;
    return v;
}

double Reader::f64() {
    if (off + 8 > buf.size()) throw CacheError("file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[off + i])) << (8 * i);
    off += 8;
    return std::bit_cast<double>(bits);
}

void Reader::expect_magic(const char* magic4) {
    if (off + 4 > buf.size()) throw CacheError("file truncated");
    if (std::memcmp(buf.data() + off, magic4, 4) != 0)
        throw CacheError(std::string("bad magic, expected ") + magic4);
    off += 4;
}

std::uint32_t crc32(const std::string& buf, std::size_t count) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
                static_cast<uInt>(count)));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CacheError("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CacheError("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CacheError("short write: " + path);
}

} // namespace bspec::io
