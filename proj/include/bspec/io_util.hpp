#pragma once

#include <cstdint>
#include <string>

namespace bspec::io {

// Little-endian serialization into a byte string.
void put_u8(std::string& buf, std::uint8_t v);
void put_u32(std::string& buf, std::uint32_t v);
void put_f64(std::string& buf, double v);

// Range-checked reader over a byte buffer; throws CacheError on underrun.
struct Reader {
    const std::string& buf;
    std::size_t off = 0;

    std::uint8_t u8();
    std::uint32_t u32();
    double f64();
    void expect_magic(const char* magic4);
    bool at_end() const { return off == buf.size(); }
};

std::uint32_t crc32(const std::string& buf, std::size_t count);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

} // namespace bspec::io
