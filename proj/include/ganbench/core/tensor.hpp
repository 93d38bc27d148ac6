#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ganbench::core {

// Dense row-major tensor. Storage is shared between copies (shallow copy);
// use clone() when an independent buffer is required. The shape is fixed at
// construction; reshaped() returns a view over the same storage.
template <typename T>
class Tensor {
 public:
  Tensor() : data_(std::make_shared<std::vector<T>>()) {}

  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(count(shape_), T(0))) {}

  Tensor(std::vector<int64_t> shape, std::vector<T> values)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(std::move(values))) {
    if (static_cast<int64_t>(data_->size()) != count(shape_))
      throw std::invalid_argument("Tensor: data size does not match shape");
  }

  static Tensor full(std::vector<int64_t> shape, T v) {
    Tensor t(std::move(shape));
    std::fill(t.begin(), t.end(), v);
    return t;
  }
  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor ones(std::vector<int64_t> shape) { return full(std::move(shape), T(1)); }
  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int64_t size() const { return static_cast<int64_t>(data_->size()); }
  bool empty() const { return data_->empty(); }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }
  T& operator[](int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

  T* begin() { return data(); }
  T* end() { return data() + size(); }
  const T* begin() const { return data(); }
  const T* end() const { return data() + size(); }

  // 2D/4D accessors for the common layouts ([rows, cols] and NCHW).
  T& at2(int64_t i, int64_t j) { return (*data_)[static_cast<size_t>(i * shape_[1] + j)]; }
  const T& at2(int64_t i, int64_t j) const { return (*data_)[static_cast<size_t>(i * shape_[1] + j)]; }
  T& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
    return (*data_)[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  const T& at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return (*data_)[static_cast<size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  // View with a new shape over the same storage. -1 in at most one position
  // infers that dimension.
  Tensor reshaped(std::vector<int64_t> shape) const {
    int64_t known = 1;
    int infer = -1;
    for (size_t i = 0; i < shape.size(); ++i) {
      if (shape[i] == -1) {
        if (infer >= 0) throw std::invalid_argument("reshape: more than one -1");
        infer = static_cast<int>(i);
      } else {
        known *= shape[i];
      }
    }
    if (infer >= 0) {
      if (known == 0 || size() % known != 0)
        throw std::invalid_argument("reshape: cannot infer dimension");
      shape[static_cast<size_t>(infer)] = size() / known;
    }
    if (count(shape) != size()) throw std::invalid_argument("reshape: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_->size());
    for (size_t i = 0; i < data_->size(); ++i) out[i] = static_cast<U>((*data_)[i]);
    return Tensor<U>(shape_, std::move(out));
  }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::shared_ptr<std::vector<T>> data_;
};

inline std::string shape_str(const std::vector<int64_t>& s) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

}  // namespace ganbench::core
