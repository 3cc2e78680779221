#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace evtag {

using Bytes = std::vector<std::byte>;

// Whole-file I/O. Failures raise Error(IoFailure).
Bytes read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Little-endian tensor codecs, independent of host byte order.
Bytes encode_f32_le(std::span<const float> values);
Bytes encode_f64_le(std::span<const double> values);
Bytes encode_u32_le(std::span<const std::uint32_t> values);
Bytes encode_u64_le(std::span<const std::uint64_t> values);
std::vector<float> decode_f32_le(std::span<const std::byte> bytes);
std::vector<double> decode_f64_le(std::span<const std::byte> bytes);
std::vector<std::uint32_t> decode_u32_le(std::span<const std::byte> bytes);
std::vector<std::uint64_t> decode_u64_le(std::span<const std::byte> bytes);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::span<const std::byte> bytes);

}  // namespace evtag
