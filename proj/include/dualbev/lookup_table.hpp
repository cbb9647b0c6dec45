#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "dualbev/inputs.hpp"
#include "dualbev/tensor.hpp"

namespace dualbev {

/// One precomputed correspondence between a BEV cell and a camera position.
/// feat_index = v * W + u; depth_index = k * H * W + v * W + u.
struct PoolRecord {
  std::uint32_t bev_cell = 0;
  std::uint32_t cam = 0;
  std::uint32_t feat_index = 0;
  std::uint32_t depth_index = 0;

  bool operator==(const PoolRecord&) const = default;
};

struct TableGeometry {
  std::uint32_t n_cams = 0;
  std::uint32_t feat_h = 0;
  std::uint32_t feat_w = 0;
  std::uint32_t n_bins = 0;
  std::uint32_t ny = 0;
  std::uint32_t nx = 0;

  [[nodiscard]] std::size_t n_cells() const noexcept { return std::size_t{ny} * nx; }
  [[nodiscard]] std::size_t plane() const noexcept { return std::size_t{feat_h} * feat_w; }
  bool operator==(const TableGeometry&) const = default;
};

enum class TableKind { HeightTrans, LssPool };

/// Records sorted by BEV cell with per-cell contiguous ranges. Immutable
/// once built; rebuilding from the same inputs gives identical records.
template <TableKind Kind>
class PoolTable {
 public:
  PoolTable() = default;
  /// `records` must already be ordered by bev_cell; ranges are derived.
  PoolTable(TableGeometry geometry, std::vector<PoolRecord> records);

  [[nodiscard]] const TableGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] std::span<const PoolRecord> records() const noexcept { return records_; }
  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }

  /// Records of one cell.
  [[nodiscard]] std::span<const PoolRecord> cell(std::size_t c) const noexcept {
    return std::span<const PoolRecord>(records_).subspan(offsets_[c], offsets_[c + 1] - offsets_[c]);
  }
  [[nodiscard]] std::size_t cell_count(std::size_t c) const noexcept {
    return offsets_[c + 1] - offsets_[c];
  }

  bool operator==(const PoolTable& o) const { return geometry_ == o.geometry_ && records_ == o.records_; }

 private:
  TableGeometry geometry_;
  std::vector<PoolRecord> records_;
  std::vector<std::size_t> offsets_;
};

using HtLookupTable = PoolTable<TableKind::HeightTrans>;
using LssPoolTable = PoolTable<TableKind::LssPool>;

// File layout, little-endian: 4-byte magic ("HTLT" or "LSPT") | u8 version
// (=1) | 3 zero bytes | u32 n_cams, feat_h, feat_w, n_bins, ny, nx,
// n_records | n_records x u32 {bev_cell, cam, feat_index, depth_index}.
inline constexpr std::uint8_t kTableVersion = 1;

template <TableKind Kind>
std::vector<std::uint8_t> encode_table(const PoolTable<Kind>& table);
template <TableKind Kind>
PoolTable<Kind> decode_table(std::span<const std::uint8_t> bytes);

template <TableKind Kind>
void table_write(const PoolTable<Kind>& table, const std::filesystem::path& path);
template <TableKind Kind>
PoolTable<Kind> table_read(const std::filesystem::path& path);

/// How a record's depth and mask values weight the gathered feature.
enum class PoolWeight { DepthOnly, DepthMask };

/// Scatter-sum over a table: for each cell, accumulate
/// weight * I[cam, :, feat_index] in table order with 64-bit accumulators.
/// Returns [C, ny, nx]. Cells are split across `threads`; the result is
/// bitwise independent of the thread count.
template <TableKind Kind>
Tensor pool_scatter(const ViewInputs& inputs, const PoolTable<Kind>& table, PoolWeight weight,
                    int threads = 1);

}  // namespace dualbev
