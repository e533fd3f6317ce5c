#ifndef BLQ_NETWORK_HPP
#define BLQ_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "blq/rng.hpp"
#include "blq/tensor.hpp"

namespace blq {

enum class LayerKind : std::uint8_t {
    Convolution,
    FullyConnected,
    ReLU,
    Sigmoid,
    MaxPool,
    Softmax,
};

/// One layer of a feed-forward stack. Only the fields relevant to `kind`
/// are meaningful; the factory functions below set them.
struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    // Convolution
    std::int64_t out_channels = 0;
    std::int64_t kernel_h = 0;
    std::int64_t kernel_w = 0;
    std::int64_t stride = 1;
    std::int64_t padding = 0;
    // FullyConnected
    std::int64_t out_features = 0;
    // MaxPool
    std::int64_t window = 0;
    std::int64_t pool_stride = 0;

    static LayerSpec conv(std::int64_t out_channels, std::int64_t kernel,
                          std::int64_t stride = 1, std::int64_t padding = 0);
    static LayerSpec fc(std::int64_t out_features);
    static LayerSpec relu();
    static LayerSpec sigmoid();
    static LayerSpec maxpool(std::int64_t window, std::int64_t stride);
    static LayerSpec softmax();

    bool is_weight_layer() const {
        return kind == LayerKind::Convolution || kind == LayerKind::FullyConnected;
    }

    bool operator==(const LayerSpec&) const = default;
};

/// (channels, height, width) of an activation tensor.
struct Dims {
    std::int64_t c = 0;
    std::int64_t h = 0;
    std::int64_t w = 0;

    std::int64_t elements() const { return c * h * w; }
    bool operator==(const Dims&) const = default;
};

struct NetworkSpec {
    std::string name;
    Dims input_shape;
    std::vector<LayerSpec> layers;

    bool operator==(const NetworkSpec&) const = default;
};

/// Output dims of one layer given its input dims; throws DataError when
/// the layer does not fit (e.g. non-positive spatial output).
Dims layer_output_dims(const LayerSpec& layer, const Dims& in);

/// Dims after each layer, starting from spec.input_shape. Validates the
/// whole chain; throws DataError on the first inconsistency.
std::vector<Dims> chain_dims(const NetworkSpec& spec);

/// Indices into spec.layers of the convolution/fully-connected layers.
std::vector<std::size_t> weight_layer_indices(const NetworkSpec& spec);

/// Reduction length of a weight layer: in_channels*kh*kw for convolution,
/// in_features for fully-connected.
std::int64_t reduction_length(const LayerSpec& layer, const Dims& in);

/// FP32 parameters of one weight layer. Weight rows are laid out
/// input-channel-major, then kernel row, then kernel column, so one output
/// kernel's reduction axis is contiguous.
struct WeightBlob {
    Tensor weights;          // (out, reduction) row-major
    std::vector<float> bias; // out entries, full precision

    bool operator==(const WeightBlob&) const = default;
};

struct Fp32Network {
    NetworkSpec spec;
    std::vector<WeightBlob> weights; // one per weight layer, in layer order

    bool operator==(const Fp32Network&) const = default;
};

/// Deterministic random parameters from a SplitMix64 stream seeded with
/// `seed`: weights uniform in [-1,1]/sqrt(reduction), biases uniform in
/// [-0.1, 0.1], drawn layer by layer in layer order.
Fp32Network make_random_network(const NetworkSpec& spec, std::uint64_t seed);

} // namespace blq

#endif // BLQ_NETWORK_HPP
