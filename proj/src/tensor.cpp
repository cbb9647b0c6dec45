#include "dualbev/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "dualbev/error.hpp"

namespace dualbev {
namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw Error(Errc::EmptyShape, "tensor rank must be at least 1");
  if (shape.size() > kMaxRank)
    throw Error(Errc::RankOverflow, "rank " + std::to_string(shape.size()) + " exceeds 8");
  for (auto e : shape)
    if (e == 0) throw Error(Errc::EmptyShape, "zero extent in shape " + shape_string(shape));
}

}  // namespace

std::size_t shape_volume(const Shape& shape) noexcept {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_volume(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (data_.size() != shape_volume(shape_))
    throw Error(Errc::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                         " does not match shape " + shape_string(shape_));
  check_finite();
}

Tensor Tensor::full(Shape shape, float value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  t.check_finite();
  return t;
}

Tensor Tensor::reshaped(Shape shape) const {
  validate_shape(shape);
  if (shape_volume(shape) != data_.size())
    throw Error(Errc::ShapeMismatch,
                "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

Tensor Tensor::slice(std::size_t i) const {
  if (rank() < 2) throw Error(Errc::ShapeMismatch, "slice needs rank >= 2");
  if (i >= shape_[0]) throw Error(Errc::IndexOutOfRange, "slice index out of range");
  Tensor t;
  t.shape_.assign(shape_.begin() + 1, shape_.end());
  const std::size_t n = shape_volume(t.shape_);
  t.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(i * n),
                 data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
  return t;
}

void Tensor::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i]))
      throw Error(Errc::NonFiniteValue, "non-finite value at flat index " + std::to_string(i));
}

bool Tensor::bitwise_equal(const Tensor& other) const noexcept {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(Errc::EmptyShape, "cannot stack zero tensors");
  const Shape& inner = parts.front().shape();
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Tensor out(shape);
  const std::size_t n = shape_volume(inner);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].shape() != inner)
      throw Error(Errc::ShapeMismatch, "stack: part " + std::to_string(i) + " has shape " +
                                           shape_string(parts[i].shape()) + ", expected " +
                                           shape_string(inner));
    std::memcpy(out.ptr() + i * n, parts[i].ptr(), n * sizeof(float));
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw Error(Errc::ShapeMismatch, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

double relative_l2(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw Error(Errc::ShapeMismatch, shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  double num = 0.0, den = 0.0, an = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    num += d * d;
    den += static_cast<double>(b[i]) * b[i];
    an += static_cast<double>(a[i]) * a[i];
  }
  if (den == 0.0) return std::sqrt(an);
  return std::sqrt(num / den);
}

}  // namespace dualbev
