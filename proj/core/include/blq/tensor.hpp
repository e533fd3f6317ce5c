#ifndef BLQ_TENSOR_HPP
#define BLQ_TENSOR_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace blq {

/// Dense row-major float array with an explicit shape. Shapes are
/// (channels, height, width) for images, (rows, cols) for matrices or a
/// single flat length for vectors.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_);
    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::int64_t> shape_);

    std::int64_t element_count() const;

    std::span<const float> view() const { return data; }
    std::span<float> view() { return data; }

    bool operator==(const Tensor&) const = default;
};

/// Product of a shape's dimensions; throws on non-positive dimensions.
std::int64_t shape_elements(const std::vector<std::int64_t>& shape);

/// Index of the largest element, lowest index on ties.
std::int64_t argmax(std::span<const float> values);

/// True when every element is finite.
bool all_finite(std::span<const float> values);

} // namespace blq

#endif // BLQ_TENSOR_HPP
