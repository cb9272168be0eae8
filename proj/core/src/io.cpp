#include "weakcat/io.hpp"

#include <bit>

namespace weakcat {

Fingerprint fingerprint_tokens(const std::vector<std::string>& tokens) {
    // four FNV-1a streams with distinct offset bases, separator 0x0a between tokens
    static const std::uint64_t offsets[4] = {
        0xcbf29ce484222325ULL, 0x84222325cbf29ce4ULL,
        0x9e3779b97f4a7c15ULL, 0xc6a4a7935bd1e995ULL};
    const std::uint64_t prime = 0x100000001b3ULL;
    std::uint64_t h[4];
    for (int i = 0; i < 4; ++i) h[i] = offsets[i];
    auto feed = [&](std::uint8_t b) {
        for (int i = 0; i < 4; ++i) {
            h[i] ^= b;
            h[i] *= prime;
        }
    };
    for (const auto& t : tokens) {
        for (unsigned char c : t) feed(c);
        feed('\n');
    }
    Fingerprint fp;
    for (int i = 0; i < 4; ++i)
        for (int b = 0; b < 8; ++b)
            fp[i * 8 + b] = static_cast<std::uint8_t>(h[i] >> (8 * b));
    return fp;
}

std::string fingerprint_hex(const Fingerprint& fp) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : fp) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

Fingerprint fingerprint_parse_hex(const std::string& hex) {
    if (hex.size() != 64) throw CorruptFile("bad fingerprint length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw CorruptFile("bad fingerprint digit");
    };
    Fingerprint fp;
    for (std::size_t i = 0; i < 32; ++i)
        fp[i] = static_cast<std::uint8_t>(nib(hex[2 * i]) << 4 | nib(hex[2 * i + 1]));
    return fp;
}

BinWriter::BinWriter(const std::string& path)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw Error("cannot open for writing: " + path);
}

void BinWriter::u8(std::uint8_t v) { bytes(&v, 1); }

void BinWriter::u16(std::uint16_t v) {
    std::uint8_t b[2] = {std::uint8_t(v), std::uint8_t(v >> 8)};
    bytes(b, 2);
}

void BinWriter::u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = std::uint8_t(v >> (8 * i));
    bytes(b, 4);
}

void BinWriter::u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
    bytes(b, 8);
}

void BinWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void BinWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinWriter::bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw Error("write failed: " + path_);
}

void BinWriter::str16(const std::string& s) {
    if (s.size() > 0xffff) throw Error("string too long for u16 prefix");
    u16(static_cast<std::uint16_t>(s.size()));
    if (!s.empty()) bytes(s.data(), s.size());
}

void BinWriter::close() {
    out_.close();
    if (!out_) throw Error("close failed: " + path_);
}

BinReader::BinReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error("cannot open for reading: " + path);
}

void BinReader::bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
        throw CorruptFile("unexpected end of file: " + path_);
}

std::uint8_t BinReader::u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
}

std::uint16_t BinReader::u16() {
    std::uint8_t b[2];
    bytes(b, 2);
    return std::uint16_t(b[0] | b[1] << 8);
}

std::uint32_t BinReader::u32() {
    std::uint8_t b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = v << 8 | b[i];
    return v;
}

std::uint64_t BinReader::u64() {
    std::uint8_t b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
    return v;
}

float BinReader::f32() { return std::bit_cast<float>(u32()); }
double BinReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinReader::str16() {
    std::uint16_t n = u16();
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
}

bool BinReader::at_end() {
    return in_.peek() == std::ifstream::traits_type::eof();
}

} // namespace weakcat
