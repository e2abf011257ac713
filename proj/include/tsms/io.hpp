#pragma once

// On-disk formats.
//
// Tensor file ("FTEN"), all integers little-endian:
//   magic "FTEN" | u16 version = 1 | u8 dtype (0 = f32, 1 = f64) | u8 ndim |
//   ndim × u32 dims | row-major payload
// ndim 3 is (channels, height, width); ndim 2 and 1 read as a single channel.
//
// Mask file: binary PGM (P5), maxval 255, one byte per pixel holding the
// object id. The filename stem starts with the decimal frame index.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "tsms/core.hpp"

namespace tsms::io {

namespace fs = std::filesystem;

enum class TensorDtype : std::uint8_t { f32 = 0, f64 = 1 };

inline constexpr std::string_view kTensorMagic = "FTEN";
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::string_view kTensorExtension = ".ften";
inline constexpr std::string_view kMaskExtension = ".pgm";

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string() + " for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failed for " + path.string());
  return bytes;
}

/// Writes to a sibling temp file, then renames over the target.
inline void atomic_write(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(Errc::io, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(Errc::io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

/// Leading decimal digits of the stem ("007_left" -> 7); nullopt if none.
inline std::optional<FrameIndex> frame_index_from_stem(std::string_view stem) {
  std::size_t n = 0;
  while (n < stem.size() && std::isdigit(static_cast<unsigned char>(stem[n]))) ++n;
  if (n == 0 || n > 18) return std::nullopt;
  FrameIndex value = 0;
  for (std::size_t i = 0; i < n; ++i) value = value * 10 + (stem[i] - '0');
  return value;
}

inline std::string frame_stem(FrameIndex frame_index) {
  std::string digits = std::to_string(frame_index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return digits;
}

// ---------------------------------------------------------------------------
// Tensor container

namespace detail {

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <class U>
U get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<U>(v);
}

}  // namespace detail

inline std::string encode_tensor(const FeatureMap& map, TensorDtype dtype = TensorDtype::f64) {
  std::string out;
  const std::size_t elem = dtype == TensorDtype::f64 ? 8 : 4;
  out.reserve(4 + 2 + 2 + 12 + map.size() * elem);
  out.append(kTensorMagic);
  detail::put_le<std::uint16_t>(out, kTensorVersion);
  out.push_back(static_cast<char>(dtype));
  out.push_back(3);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.channels()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.height()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.width()));
  for (double v : map.data()) {
    if (dtype == TensorDtype::f64) {
      detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    } else {
      detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

inline FeatureMap decode_tensor(std::string_view bytes, FrameIndex frame_index) {
  constexpr std::size_t kFixedHeader = 8;
  if (bytes.size() < 4 || bytes.substr(0, 4) != kTensorMagic) {
    throw Error(Errc::bad_magic, "tensor file does not start with FTEN");
  }
  if (bytes.size() < kFixedHeader) throw Error(Errc::truncated, "tensor header truncated");
  const auto version = detail::get_le<std::uint16_t>(bytes, 4);
  if (version != kTensorVersion) {
    throw Error(Errc::unsupported_version, "tensor version " + std::to_string(version) + " not supported");
  }
  const auto dtype_code = static_cast<std::uint8_t>(bytes[6]);
  if (dtype_code > 1) {
    throw Error(Errc::unsupported_dtype, "tensor dtype code " + std::to_string(dtype_code) + " not supported");
  }
  const auto dtype = static_cast<TensorDtype>(dtype_code);
  const auto ndim = static_cast<std::uint8_t>(bytes[7]);
  if (ndim < 1 || ndim > 3) {
    throw Error(Errc::dimension_mismatch, "tensor ndim " + std::to_string(ndim) + " not in 1..3");
  }
  if (bytes.size() < kFixedHeader + 4u * ndim) throw Error(Errc::truncated, "tensor dims truncated");

  std::uint32_t dims[3] = {1, 1, 1};
  for (std::size_t i = 0; i < ndim; ++i) {
    dims[3 - ndim + i] = detail::get_le<std::uint32_t>(bytes, kFixedHeader + 4 * i);
  }
  for (auto d : dims) {
    if (d == 0 || d > (1u << 30)) throw Error(Errc::dimension_mismatch, "tensor dim out of range");
  }
  const std::size_t count = std::size_t{dims[0]} * dims[1] * dims[2];
  const std::size_t elem = dtype == TensorDtype::f64 ? 8 : 4;
  const std::size_t payload_start = kFixedHeader + 4u * ndim;
  const std::size_t payload = bytes.size() - payload_start;
  if (payload < count * elem) {
    throw Error(Errc::truncated, "tensor payload has " + std::to_string(payload) + " bytes, header needs " +
                                     std::to_string(count * elem));
  }
  if (payload > count * elem) {
    throw Error(Errc::dimension_mismatch, "tensor payload has " + std::to_string(payload - count * elem) +
                                              " trailing bytes");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = payload_start + i * elem;
    data[i] = dtype == TensorDtype::f64
                  ? std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, at))
                  : static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, at)));
  }
  return FeatureMap::make(frame_index, static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                          static_cast<int>(dims[2]), std::move(data));
}

inline void write_tensor(const FeatureMap& map, const fs::path& path,
                         TensorDtype dtype = TensorDtype::f64) {
  atomic_write(path, encode_tensor(map, dtype));
}

/// Frame index defaults to the filename's leading digits, else 0.
inline FeatureMap read_tensor(const fs::path& path, std::optional<FrameIndex> frame_index = std::nullopt) {
  const auto index = frame_index ? *frame_index : frame_index_from_stem(path.stem().string()).value_or(0);
  try {
    return decode_tensor(read_file(path), index);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// PGM masks

inline std::string encode_pgm(const LabelMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  const auto labels = mask.labels();
  out.append(reinterpret_cast<const char*>(labels.data()), labels.size());
  return out;
}

inline LabelMask decode_pgm(std::string_view bytes, FrameIndex frame_index) {
  std::size_t pos = 0;
  auto fail = [](const std::string& why) -> Error { return Error(Errc::malformed_pgm, why); };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("not a binary PGM (P5)");
  pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1L << 30)) throw fail("PGM header value too large");
      ++pos;
    }
    if (pos == start) throw fail("PGM header truncated or non-numeric");
    return v;
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  if (width < 1 || height < 1) throw fail("PGM dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw fail("PGM maxval must be in 1..255 for label masks");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw fail("PGM header not terminated by whitespace");
  }
  ++pos;
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos != expected) {
    throw fail("PGM payload has " + std::to_string(bytes.size() - pos) + " bytes, header says " +
               std::to_string(width) + "x" + std::to_string(height));
  }
  std::vector<std::uint8_t> labels(expected);
  std::memcpy(labels.data(), bytes.data() + pos, expected);
  return LabelMask::make(frame_index, static_cast<int>(height), static_cast<int>(width), std::move(labels));
}

inline void write_mask(const LabelMask& mask, const fs::path& path) { atomic_write(path, encode_pgm(mask)); }

inline LabelMask read_mask(const fs::path& path, std::optional<FrameIndex> frame_index = std::nullopt) {
  const auto index = frame_index ? *frame_index : frame_index_from_stem(path.stem().string()).value_or(0);
  try {
    return decode_pgm(read_file(path), index);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

/// Files in `dir` with the given extension, keyed by the frame index their
/// stem encodes. Rejects undecodable stems and duplicate indices.
inline std::map<FrameIndex, fs::path> index_directory(const fs::path& dir, std::string_view extension) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::io, dir.string() + " is not a directory");
  std::map<FrameIndex, fs::path> out;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file() || item.path().extension() != extension) continue;
    const auto stem = item.path().stem().string();
    const auto index = frame_index_from_stem(stem);
    if (!index) {
      throw Error(Errc::invalid_config, item.path().string() + ": filename does not start with a frame index");
    }
    auto [it, inserted] = out.emplace(*index, item.path());
    if (!inserted) {
      // Report the pair in a stable order.
      auto names = std::minmax(it->second.filename().string(), item.path().filename().string());
      throw Error(Errc::duplicate_index, "frame index " + std::to_string(*index) + " appears twice (" +
                                             names.first + ", " + names.second + ")");
    }
  }
  if (out.empty()) {
    throw Error(Errc::io, dir.string() + " contains no " + std::string(extension) + " files");
  }
  return out;
}

inline FrameSequence<LabelMask> read_mask_dir(const fs::path& dir) {
  std::vector<LabelMask> frames;
  for (const auto& [index, path] : index_directory(dir, kMaskExtension)) {
    frames.push_back(read_mask(path, index));
  }
  const auto h = frames.front().height();
  const auto w = frames.front().width();
  for (const auto& f : frames) {
    if (f.height() != h || f.width() != w) {
      throw Error(Errc::dimension_mismatch, dir.string() + ": frame " + std::to_string(f.frame_index()) +
                                                " is " + std::to_string(f.width()) + "x" +
                                                std::to_string(f.height()) + ", expected " +
                                                std::to_string(w) + "x" + std::to_string(h));
    }
  }
  return FrameSequence<LabelMask>(std::move(frames));
}

inline void write_mask_dir(const FrameSequence<LabelMask>& frames, const fs::path& dir) {
  for (const auto& f : frames) {
    write_mask(f, dir / (frame_stem(f.frame_index()) + std::string(kMaskExtension)));
  }
}

inline std::vector<FeatureMap> read_tensor_dir(const fs::path& dir) {
  std::vector<FeatureMap> out;
  for (const auto& [index, path] : index_directory(dir, kTensorExtension)) {
    out.push_back(read_tensor(path, index));
  }
  return out;
}

}  // namespace tsms::io
