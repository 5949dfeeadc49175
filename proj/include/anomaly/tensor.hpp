#pragma once

// Dense fixed-size arrays over the index set {0,1,2}, addressed index-literally.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace anomaly {

using Complex = std::complex<double>;
using Matrix3c = Eigen::Matrix3cd;

inline constexpr int kDim = 3;

template <int Rank>
class CubeArray {
 public:
  static constexpr std::size_t kSize = [] {
    std::size_t n = 1;
    for (int i = 0; i < Rank; ++i) n *= kDim;
    return n;
  }();

  CubeArray() { data_.fill(Complex{0.0, 0.0}); }

  template <typename... Idx>
  Complex& operator()(Idx... idx) {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset(idx...)];
  }
  template <typename... Idx>
  const Complex& operator()(Idx... idx) const {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset(idx...)];
  }

  const std::array<Complex, kSize>& data() const { return data_; }
  std::array<Complex, kSize>& data() { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  CubeArray& operator+=(const CubeArray& o) {
    for (std::size_t i = 0; i < kSize; ++i) data_[i] += o.data_[i];
    return *this;
  }
  CubeArray& operator-=(const CubeArray& o) {
    for (std::size_t i = 0; i < kSize; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  CubeArray& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend CubeArray operator+(CubeArray a, const CubeArray& b) { return a += b; }
  friend CubeArray operator-(CubeArray a, const CubeArray& b) { return a -= b; }
  friend CubeArray operator*(Complex s, CubeArray a) { return a *= s; }
  friend CubeArray operator*(double s, CubeArray a) { return a *= Complex{s, 0.0}; }

  friend double max_abs_diff(const CubeArray& a, const CubeArray& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < kSize; ++i) m = std::max(m, std::abs(a.data_[i] - b.data_[i]));
    return m;
  }

 private:
  template <typename... Idx>
  static std::size_t offset(Idx... idx) {
    std::size_t off = 0;
    ((off = off * kDim + static_cast<std::size_t>(idx)), ...);
    return off;
  }

  std::array<Complex, kSize> data_;
};

using Tensor3 = CubeArray<3>;
using Tensor4 = CubeArray<4>;
using Tensor5 = CubeArray<5>;

}  // namespace anomaly
