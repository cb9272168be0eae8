#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "weakcat/errors.hpp"

namespace weakcat {

using Fingerprint = std::array<std::uint8_t, 32>;

// 32-byte digest of an ordered token list (four seeded FNV-1a streams)
Fingerprint fingerprint_tokens(const std::vector<std::string>& tokens);
std::string fingerprint_hex(const Fingerprint& fp);
Fingerprint fingerprint_parse_hex(const std::string& hex);

// little-endian binary writer
class BinWriter {
public:
    explicit BinWriter(const std::string& path);
    void u8(std::uint8_t v);
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void bytes(const void* data, std::size_t n);
    void str16(const std::string& s); // u16 length prefix + UTF-8 bytes
    void close();

private:
    std::ofstream out_;
    std::string path_;
};

// little-endian binary reader; throws CorruptFile on short reads
class BinReader {
public:
    explicit BinReader(const std::string& path);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void bytes(void* data, std::size_t n);
    std::string str16();
    bool at_end();

private:
    std::ifstream in_;
    std::string path_;
};

} // namespace weakcat
