#include "evtag/binary_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "evtag/error.hpp"

namespace evtag {
namespace {

template <typename Word>
Word to_little_endian(Word w) {
  if constexpr (std::endian::native == std::endian::little) {
    return w;
  } else {
    Word out = 0;
    for (std::size_t i = 0; i < sizeof(Word); ++i) {
      out = (out << 8) | ((w >> (8 * i)) & 0xFF);
    }
    return out;
  }
}

template <typename T, typename Word>
Bytes encode(std::span<const T> values) {
  static_assert(sizeof(T) == sizeof(Word));
  Bytes out(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Word w = to_little_endian(std::bit_cast<Word>(values[i]));
    std::memcpy(out.data() + i * sizeof(T), &w, sizeof(T));
  }
  return out;
}

template <typename T, typename Word>
std::vector<T> decode(std::span<const std::byte> bytes) {
  if (bytes.size() % sizeof(T) != 0) {
    throw Error(ErrorCode::SizeMismatch,
                "byte length " + std::to_string(bytes.size()) +
                    " is not a multiple of " + std::to_string(sizeof(T)));
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    Word w;
    std::memcpy(&w, bytes.data() + i * sizeof(T), sizeof(T));
    out[i] = std::bit_cast<T>(to_little_endian(w));
  }
  return out;
}

}  // namespace

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  Bytes out;
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  out.resize(static_cast<std::size_t>(size));
  if (!in.read(reinterpret_cast<char*>(out.data()), size)) {
    throw Error(ErrorCode::IoFailure, "short read on " + path.string());
  }
  return out;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

Bytes encode_f32_le(std::span<const float> values) {
  return encode<float, std::uint32_t>(values);
}
Bytes encode_f64_le(std::span<const double> values) {
  return encode<double, std::uint64_t>(values);
}
Bytes encode_u32_le(std::span<const std::uint32_t> values) {
  return encode<std::uint32_t, std::uint32_t>(values);
}
Bytes encode_u64_le(std::span<const std::uint64_t> values) {
  return encode<std::uint64_t, std::uint64_t>(values);
}
std::vector<float> decode_f32_le(std::span<const std::byte> bytes) {
  return decode<float, std::uint32_t>(bytes);
}
std::vector<double> decode_f64_le(std::span<const std::byte> bytes) {
  return decode<double, std::uint64_t>(bytes);
}
std::vector<std::uint32_t> decode_u32_le(std::span<const std::byte> bytes) {
  return decode<std::uint32_t, std::uint32_t>(bytes);
}

std::vector<std::uint64_t> decode_u64_le(std::span<const std::byte> bytes) {
  return decode<std::uint64_t, std::uint64_t>(bytes);
}

std::string sha256_hex(std::span<const std::byte> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace evtag
