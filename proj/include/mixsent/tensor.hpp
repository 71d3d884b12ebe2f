// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixsent {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteValue : std::runtime_error {
    explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major tensor of 64-bit floats. The carrier for all model
// parameters and activations; desk-scale sizes, so no view machinery.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, double fill);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape), 0.0); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t numel() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_cache_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_cache_ + c]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
    std::size_t cols_cache_ = 0;  // last dimension, for at()
};

std::string shape_str(const Tensor& t);

// Throws NonFiniteValue naming `op` if any element is NaN or infinite.
void require_finite(const Tensor& t, const char* op);

}  // namespace mixsent
