#include "dualbev/btsr.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "dualbev/error.hpp"

namespace dualbev {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.rank() == 0) throw Error(Errc::EmptyShape, "cannot encode an empty tensor");
  std::vector<std::uint8_t> out;
  out.reserve(kBtsrHeaderBytes + 8 * t.rank() + 4 * t.size());
  for (char c : {'B', 'T', 'S', 'R'}) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kBtsrVersion);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  out.insert(out.end(), 6, 0);
  for (auto e : t.shape()) put_u64(out, e);
  for (float x : t.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(x);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBtsrHeaderBytes || std::memcmp(bytes.data(), "BTSR", 4) != 0)
    throw Error(Errc::BadMagic, "missing BTSR magic");
  if (bytes[4] != kBtsrVersion)
    throw Error(Errc::UnsupportedVersion, "BTSR version " + std::to_string(bytes[4]));
  const std::size_t rank = bytes[5];
  if (rank > kMaxRank) throw Error(Errc::RankOverflow, "rank " + std::to_string(rank));
  if (rank == 0) throw Error(Errc::EmptyShape, "rank 0 tensor");
  const std::size_t extents_end = kBtsrHeaderBytes + 8 * rank;
  if (bytes.size() < extents_end) throw Error(Errc::TruncatedPayload, "truncated extents");

  Shape shape(rank);
  std::size_t volume = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    const std::uint64_t e = get_u64(bytes.data() + kBtsrHeaderBytes + 8 * i);
    if (e == 0) throw Error(Errc::EmptyShape, "zero extent");
    if (volume > (std::uint64_t{1} << 40) / e)
      throw Error(Errc::TruncatedPayload, "declared volume exceeds any plausible payload");
    shape[i] = static_cast<std::size_t>(e);
    volume *= shape[i];
  }
  const std::size_t payload = bytes.size() - extents_end;
  if (payload != volume * 4)
    throw Error(Errc::TruncatedPayload, "payload has " + std::to_string(payload) +
                                            " bytes, shape " + shape_string(shape) + " needs " +
                                            std::to_string(volume * 4));
  std::vector<float> data(volume);
  const std::uint8_t* p = bytes.data() + extents_end;
  for (std::size_t i = 0; i < volume; ++i, p += 4) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    data[i] = std::bit_cast<float>(bits);
  }
  return Tensor(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::IoFailure, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

Tensor tensor_read(const std::filesystem::path& path) {
  return decode_tensor(read_file_bytes(path));
}

void tensor_write(const Tensor& t, const std::filesystem::path& path) {
  write_file_bytes(path, encode_tensor(t));
}

}  // namespace dualbev
