#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dualbev/tensor.hpp"

namespace dualbev {

// BTSR layout, all integers little-endian:
//   "BTSR" | u8 version (=1) | u8 rank | 6 zero bytes
//   rank x u64 extents
//   volume x f32 payload (row-major)
inline constexpr std::uint8_t kBtsrVersion = 1;
inline constexpr std::size_t kBtsrHeaderBytes = 12;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor tensor_read(const std::filesystem::path& path);
void tensor_write(const Tensor& t, const std::filesystem::path& path);

// Shared helpers for the little-endian binary formats in this library.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dualbev
