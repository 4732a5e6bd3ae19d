#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sead::io {

// Little-endian byte buffers for the on-disk formats.
class Writer {
public:
    void u32(std::uint32_t v) { put(&v, sizeof v); }
    void u64(std::uint64_t v) { put(&v, sizeof v); }
    void i64(std::int64_t v) { put(&v, sizeof v); }
    void bytes(const void* p, std::size_t n);
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void floats(std::span<const float> v);

    const std::vector<unsigned char>& buffer() const { return buf_; }

private:
    template <typename T>
    void put(T* v, std::size_t n) {
        if constexpr (std::endian::native == std::endian::big) swap_bytes(v, n);
        bytes(v, n);
    }
    static void swap_bytes(void* p, std::size_t n);
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    Reader(std::span<const unsigned char> data, std::string context) : data_(data), context_(std::move(context)) {}

    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    std::string str();
    void bytes(void* out, std::size_t n);
    void floats(std::span<float> out);

    std::size_t remaining() const { return data_.size() - pos_; }
    const std::string& context() const { return context_; }

private:
    void need(std::size_t n);
    std::span<const unsigned char> data_;
    std::size_t pos_ = 0;
    std::string context_;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const unsigned char> data);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::vector<float> floats_from_le(std::span<const unsigned char> bytes);
std::vector<unsigned char> floats_to_le(std::span<const float> values);

std::uint64_t digest_file(const std::filesystem::path& path);

} // namespace sead::io
