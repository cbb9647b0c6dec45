#include "dualbev/lookup_table.hpp"

#include <cstring>

#include "dualbev/btsr.hpp"
#include "dualbev/error.hpp"
#include "dualbev/parallel.hpp"

namespace dualbev {
namespace {

template <TableKind Kind>
constexpr const char* magic() {
  return Kind == TableKind::HeightTrans ? "HTLT" : "LSPT";
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr std::size_t kTableHeaderBytes = 8 + 7 * 4;

}  // namespace

template <TableKind Kind>
PoolTable<Kind>::PoolTable(TableGeometry geometry, std::vector<PoolRecord> records)
    : geometry_(geometry), records_(std::move(records)) {
  const std::size_t cells = geometry_.n_cells();
  const std::size_t plane = geometry_.plane();
  offsets_.assign(cells + 1, 0);
  std::uint32_t prev = 0;
  for (const auto& r : records_) {
    if (r.bev_cell >= cells || r.cam >= geometry_.n_cams || r.feat_index >= plane ||
        r.depth_index >= plane * geometry_.n_bins || r.depth_index % plane != r.feat_index)
      throw Error(Errc::IndexOutOfRange, "table record outside its declared geometry");
    if (r.bev_cell < prev) throw Error(Errc::IndexOutOfRange, "table records not sorted by cell");
    prev = r.bev_cell;
    ++offsets_[r.bev_cell + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) offsets_[c + 1] += offsets_[c];
}

template <TableKind Kind>
std::vector<std::uint8_t> encode_table(const PoolTable<Kind>& table) {
  std::vector<std::uint8_t> out;
  out.reserve(kTableHeaderBytes + 16 * table.size());
  const char* m = magic<Kind>();
  out.insert(out.end(), m, m + 4);
  out.push_back(kTableVersion);
  out.insert(out.end(), 3, 0);
  const auto& g = table.geometry();
  for (auto v : {g.n_cams, g.feat_h, g.feat_w, g.n_bins, g.ny, g.nx}) put_u32(out, v);
  put_u32(out, static_cast<std::uint32_t>(table.size()));
  for (const auto& r : table.records()) {
    put_u32(out, r.bev_cell);
    put_u32(out, r.cam);
    put_u32(out, r.feat_index);
    put_u32(out, r.depth_index);
  }
  return out;
}

template <TableKind Kind>
PoolTable<Kind> decode_table(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTableHeaderBytes || std::memcmp(bytes.data(), magic<Kind>(), 4) != 0)
    throw Error(Errc::BadMagic, std::string("expected ") + magic<Kind>() + " table");
  if (bytes[4] != kTableVersion)
    throw Error(Errc::UnsupportedVersion, "table version " + std::to_string(bytes[4]));
  const std::uint8_t* p = bytes.data() + 8;
  TableGeometry g{get_u32(p), get_u32(p + 4), get_u32(p + 8), get_u32(p + 12), get_u32(p + 16),
                  get_u32(p + 20)};
  const std::size_t n = get_u32(p + 24);
  if (bytes.size() != kTableHeaderBytes + 16 * n)
    throw Error(Errc::TruncatedPayload, "table payload length does not match record count");
  std::vector<PoolRecord> records(n);
  p = bytes.data() + kTableHeaderBytes;
  for (auto& r : records) {
    r = {get_u32(p), get_u32(p + 4), get_u32(p + 8), get_u32(p + 12)};
    p += 16;
  }
  return PoolTable<Kind>(g, std::move(records));
}

template <TableKind Kind>
void table_write(const PoolTable<Kind>& table, const std::filesystem::path& path) {
  write_file_bytes(path, encode_table(table));
}

template <TableKind Kind>
PoolTable<Kind> table_read(const std::filesystem::path& path) {
  return decode_table<Kind>(read_file_bytes(path));
}

template <TableKind Kind>
Tensor pool_scatter(const ViewInputs& inputs, const PoolTable<Kind>& table, PoolWeight weight,
                    int threads) {
  inputs.validate();
  const auto& g = table.geometry();
  if (inputs.n_cams() != g.n_cams || inputs.height() != g.feat_h || inputs.width() != g.feat_w ||
      inputs.n_bins() != g.n_bins)
    throw Error(Errc::IndexOutOfRange, "table geometry does not match input tensors");

  const std::size_t channels = inputs.channels();
  const std::size_t plane = g.plane();
  const std::size_t cells = g.n_cells();

  // Channel-last copy of I so each gathered feature is one contiguous run.
  std::vector<float> feat_hwc(inputs.features.size());
  const float* src = inputs.features.ptr();
  for (std::size_t cam = 0; cam < g.n_cams; ++cam)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t p = 0; p < plane; ++p)
        feat_hwc[(cam * plane + p) * channels + c] = src[(cam * channels + c) * plane + p];

  const float* depth = inputs.depth.ptr();
  const float* mask = inputs.mask.ptr();
  const std::size_t depth_stride = std::size_t{g.n_bins} * plane;

  Tensor out({channels, g.ny, g.nx});
  float* dst = out.ptr();
  parallel_ranges(cells, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(channels);
    for (std::size_t cell = begin; cell < end; ++cell) {
      const auto recs = table.cell(cell);
      if (recs.empty()) continue;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const auto& r : recs) {
        double w = static_cast<double>(depth[r.cam * depth_stride + r.depth_index]);
        if (weight == PoolWeight::DepthMask) w *= static_cast<double>(mask[r.cam * plane + r.feat_index]);
        const float* f = feat_hwc.data() + (r.cam * plane + r.feat_index) * channels;
        for (std::size_t c = 0; c < channels; ++c) acc[c] += w * static_cast<double>(f[c]);
      }
      for (std::size_t c = 0; c < channels; ++c) dst[c * cells + cell] = static_cast<float>(acc[c]);
    }
  });
  return out;
}

#define DUALBEV_INSTANTIATE_TABLE(K)                                                         \
  template class PoolTable<K>;                                                               \
  template std::vector<std::uint8_t> encode_table<K>(const PoolTable<K>&);                   \
  template PoolTable<K> decode_table<K>(std::span<const std::uint8_t>);                      \
  template void table_write<K>(const PoolTable<K>&, const std::filesystem::path&);           \
  template PoolTable<K> table_read<K>(const std::filesystem::path&);                         \
  template Tensor pool_scatter<K>(const ViewInputs&, const PoolTable<K>&, PoolWeight, int);

DUALBEV_INSTANTIATE_TABLE(TableKind::HeightTrans)
DUALBEV_INSTANTIATE_TABLE(TableKind::LssPool)

#undef DUALBEV_INSTANTIATE_TABLE

}  // namespace dualbev
