#pragma once

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "ropewarp/error.hpp"

namespace ropewarp {

// ===== Dense row-major tensors =====
//
// Value semantics, double precision. Rank 0 is a scalar holding exactly one
// element; the element count of any shape is the product of its extents.

template <typename T>
class BasicTensor {
public:
    BasicTensor() : data_(1, T{}) {}

    explicit BasicTensor(std::vector<std::size_t> shape, T fill = T{})
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    static BasicTensor from_data(std::vector<std::size_t> shape, std::vector<T> data) {
        if (count(shape) != data.size()) {
            std::ostringstream msg;
            msg << "tensor data length " << data.size() << " does not match shape (expected "
                << count(shape) << ")";
            throw ShapeError(msg.str());
        }
        BasicTensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }

    template <typename... Ix>
    T& operator()(Ix... ix) {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }

    template <typename... Ix>
    const T& operator()(Ix... ix) const {
        return data_[flat_index({static_cast<std::size_t>(ix)...})];
    }

    T& at(std::span<const std::size_t> ix) { return data_[flat_index(ix)]; }
    const T& at(std::span<const std::size_t> ix) const { return data_[flat_index(ix)]; }

    std::size_t flat_index(std::initializer_list<std::size_t> ix) const {
        return flat_index(std::span<const std::size_t>(ix.begin(), ix.size()));
    }

    std::size_t flat_index(std::span<const std::size_t> ix) const {
        if (ix.size() != shape_.size())
            throw ShapeError("index rank does not match tensor rank");
        std::size_t flat = 0;
        for (std::size_t a = 0; a < ix.size(); ++a) {
            if (ix[a] >= shape_[a])
                throw ShapeError("tensor index out of range");
            flat = flat * shape_[a] + ix[a];
        }
        return flat;
    }

    // Row-major reinterpretation; element count must be preserved.
    BasicTensor reshaped(std::vector<std::size_t> shape) const {
        if (count(shape) != data_.size())
            throw ShapeError("reshape changes element count");
        BasicTensor t;
        t.shape_ = std::move(shape);
        t.data_ = data_;
        return t;
    }

    // out.shape[k] = shape[axes[k]]; axes must be a permutation of 0..rank-1.
    BasicTensor permuted(std::span<const std::size_t> axes) const {
        if (axes.size() != shape_.size())
            throw ShapeError("permutation rank does not match tensor rank");
        std::vector<bool> seen(shape_.size(), false);
        std::vector<std::size_t> out_shape(shape_.size());
        for (std::size_t k = 0; k < axes.size(); ++k) {
            if (axes[k] >= shape_.size() || seen[axes[k]])
                throw ShapeError("invalid axis permutation");
            seen[axes[k]] = true;
            out_shape[k] = shape_[axes[k]];
        }
        BasicTensor out(out_shape);
        std::vector<std::size_t> src(shape_.size(), 0);
        std::vector<std::size_t> dst(shape_.size(), 0);
        for (std::size_t flat = 0; flat < data_.size(); ++flat) {
            for (std::size_t k = 0; k < axes.size(); ++k) dst[k] = src[axes[k]];
            out.at(dst) = data_[flat];
            for (std::size_t a = shape_.size(); a-- > 0;) {
                if (++src[a] < shape_[a]) break;
                src[a] = 0;
            }
        }
        return out;
    }

    BasicTensor permuted(std::initializer_list<std::size_t> axes) const {
        return permuted(std::span<const std::size_t>(axes.begin(), axes.size()));
    }

    bool same_shape(const BasicTensor& other) const { return shape_ == other.shape_; }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }

private:
    std::vector<std::size_t> shape_;  // empty = scalar
    std::vector<T> data_;             // row-major
};

using Tensor = BasicTensor<double>;
using ComplexTensor = BasicTensor<std::complex<double>>;

// ===== Elementwise helpers =====

namespace detail {

inline void require_same_shape(const auto& a, const auto& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": operand shapes differ");
}

}  // namespace detail

template <typename T>
BasicTensor<T> operator+(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    detail::require_same_shape(a, b, "add");
    BasicTensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

template <typename T>
BasicTensor<T> operator-(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    detail::require_same_shape(a, b, "subtract");
    BasicTensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

template <typename T, typename S>
BasicTensor<T> scaled(const BasicTensor<T>& a, S factor) {
    BasicTensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
    return out;
}

}  // namespace ropewarp
