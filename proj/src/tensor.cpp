// SPDX-License-Identifier: Apache-2.0
#include "mixsent/tensor.hpp"

#include <cmath>
#include <sstream>

namespace mixsent {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {
    cols_cache_ = shape_.empty() ? 0 : shape_.back();
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != product(shape_)) {
        throw ShapeMismatch("tensor data size does not match shape");
    }
    cols_cache_ = shape_.empty() ? 0 : shape_.back();
}

std::size_t Tensor::rows() const {
    if (shape_.size() != 2) throw ShapeMismatch("rows(): tensor is not 2-D: " + shape_str(*this));
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (shape_.size() != 2) throw ShapeMismatch("cols(): tensor is not 2-D: " + shape_str(*this));
    return shape_[1];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < t.shape().size(); ++i) {
        if (i) os << ',';
        os << t.shape()[i];
    }
    os << ']';
    return os.str();
}

void require_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) {
        throw NonFiniteValue(std::string(op) + ": non-finite value in result " + shape_str(t));
    }
}

}  // namespace mixsent
