#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ballbot/errors.hpp"

namespace ballbot::nn {

// Dense row-major tensor; shape is explicit, storage is flat.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(count(shape_)), T(0));
  }

  static std::int64_t count(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T(0)); }

  Tensor reshaped(std::vector<std::int64_t> shape) const {
    if (count(shape) != size())
      throw InvalidParameter("tensor reshape: element count mismatch");
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;   // false: buffers (BatchNorm running stats)
  bool weight_decay = false;  // true only for weight matrices

  explicit Param(std::string n, std::vector<std::int64_t> shape, bool train = true,
                 bool decay = false)
      : name(std::move(n)), value(shape), grad(std::move(shape)), trainable(train),
        weight_decay(decay) {}
};

}  // namespace ballbot::nn
