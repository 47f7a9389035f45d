#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seisuno {

using cdouble = std::complex<double>;

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

/// Dense row-major N-dimensional array. Immutable shape; element type is
/// either double or std::complex<double> (see Tensor / CTensor aliases).
template <typename T>
class BasicTensor {
public:
    BasicTensor() = default;

    explicit BasicTensor(std::vector<std::size_t> shape, T fill = T{})
        : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

    static BasicTensor from_data(std::vector<std::size_t> shape, std::vector<T> data) {
        BasicTensor t;
        check(checked_numel(shape) == data.size(), "tensor: data size does not match shape");
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    static BasicTensor scalar(T v) { return BasicTensor({1}, v); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t numel() const { return data_.size(); }
    bool same_shape(const BasicTensor& o) const { return shape_ == o.shape_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }

    /// Strides in elements, row-major.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(shape_.size(), 1);
        for (std::size_t i = shape_.size(); i-- > 1;) s[i - 1] = s[i] * shape_[i];
        return s;
    }

    T& at(std::span<const std::size_t> idx) { return data_[flat_index(idx)]; }
    const T& at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }
    T& at(std::initializer_list<std::size_t> idx) { return at(std::span<const std::size_t>(idx.begin(), idx.size())); }
    const T& at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        check(idx.size() == shape_.size(), "tensor: index rank mismatch");
        std::size_t flat = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            check(idx[a] < shape_[a], "tensor: index out of range");
            flat = flat * shape_[a] + idx[a];
        }
        return flat;
    }

    BasicTensor reshaped(std::vector<std::size_t> shape) const {
        check(checked_numel(shape) == numel(), "tensor: reshape changes element count");
        BasicTensor t = *this;
        t.shape_ = std::move(shape);
        return t;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    static std::size_t checked_numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) {
            check(e > 0, "tensor: zero or negative extent");
            n *= e;
        }
        return n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using CTensor = BasicTensor<cdouble>;

// ---- elementwise helpers -------------------------------------------------

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    check(a.same_shape(b), "add: shape mismatch");
    BasicTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
    return out;
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    check(a.same_shape(b), "sub: shape mismatch");
    BasicTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
    return out;
}

template <typename T, typename S>
BasicTensor<T> scaled(const BasicTensor<T>& a, S s) {
    BasicTensor<T> out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * s;
    return out;
}

inline double sum(const Tensor& a) {
    double s = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += a[i];
    return s;
}

inline double mean(const Tensor& a) { return sum(a) / static_cast<double>(a.numel()); }

inline double max_abs(const Tensor& a) {
    double m = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

inline double max_abs(const CTensor& a) {
    double m = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

inline bool all_finite(const Tensor& a) {
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

inline bool all_finite(const CTensor& a) {
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
    return true;
}

/// ||a - b||_2 / ||b||_2, with an absolute fallback when b is zero.
template <typename T>
double rel_l2_error(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    check(a.same_shape(b), "rel_l2_error: shape mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        num += std::norm(cdouble(a[i]) - cdouble(b[i]));
        den += std::norm(cdouble(b[i]));
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

}  // namespace seisuno
