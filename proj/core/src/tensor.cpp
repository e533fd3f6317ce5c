#include "blq/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace blq {

std::int64_t shape_elements(const std::vector<std::int64_t>& shape) {
    if (shape.empty()) {
        throw std::invalid_argument("empty shape");
    }
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d <= 0) {
            throw std::invalid_argument("shape dimensions must be positive, got " +
                                        std::to_string(d));
        }
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_elements(shape) != static_cast<std::int64_t>(data.size())) {
        throw std::invalid_argument("tensor data length does not match shape");
    }
}

Tensor::Tensor(std::vector<std::int64_t> shape_) : shape(std::move(shape_)) {
    data.assign(static_cast<std::size_t>(shape_elements(shape)), 0.0f);
}

std::int64_t Tensor::element_count() const {
    return static_cast<std::int64_t>(data.size());
}

std::int64_t argmax(std::span<const float> values) {
    if (values.empty()) {
        throw std::invalid_argument("argmax of empty span");
    }
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < static_cast<std::int64_t>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

bool all_finite(std::span<const float> values) {
    for (float v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace blq
