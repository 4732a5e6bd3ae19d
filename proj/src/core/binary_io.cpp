#include "sead/core/binary_io.hpp"

#include "sead/core/error.hpp"
#include "sead/core/rng.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace sead::io {

void Writer::bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), c, c + n);
}

void Writer::floats(std::span<const float> v) {
    const auto le = floats_to_le(v);
    bytes(le.data(), le.size());
}

void Writer::swap_bytes(void* p, std::size_t n) {
    auto* c = static_cast<unsigned char*>(p);
    std::reverse(c, c + n);
}

void Reader::need(std::size_t n) {
    if (remaining() < n) {
        fail(ErrorCode::Format, context_ + ": truncated data (needed " + std::to_string(n) + " bytes at offset " +
                                    std::to_string(pos_) + ", " + std::to_string(remaining()) + " available)");
    }
}

void Reader::bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
}

std::uint32_t Reader::u32() {
    unsigned char b[4];
    bytes(b, 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

std::uint64_t Reader::u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
}

std::int64_t Reader::i64() { return static_cast<std::int64_t>(u64()); }

std::string Reader::str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

void Reader::floats(std::span<float> out) {
    const std::size_t n = out.size() * sizeof(float);
    need(n);
    const auto v = floats_from_le(data_.subspan(pos_, n));
    std::copy(v.begin(), v.end(), out.begin());
    pos_ += n;
}

std::vector<float> floats_from_le(std::span<const unsigned char> bytes) {
    std::vector<float> out(bytes.size() / sizeof(float));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const unsigned char* b = bytes.data() + 4 * i;
        const std::uint32_t u =
            std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
        out[i] = std::bit_cast<float>(u);
    }
    return out;
}

std::vector<unsigned char> floats_to_le(std::span<const float> values) {
    std::vector<unsigned char> out(values.size() * sizeof(float));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto u = std::bit_cast<std::uint32_t>(values[i]);
        out[4 * i + 0] = static_cast<unsigned char>(u & 0xff);
        out[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
        out[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
        out[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    return out;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorCode::Io, "error reading '" + path.string() + "'");
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const unsigned char> data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorCode::Io, "error writing '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

std::uint64_t digest_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.value();
}

} // namespace sead::io
