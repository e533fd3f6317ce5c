#include "blq/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "blq/errors.hpp"

namespace blq {

LayerSpec LayerSpec::conv(std::int64_t out_channels, std::int64_t kernel,
                          std::int64_t stride, std::int64_t padding) {
    if (out_channels < 1 || kernel < 1 || stride < 1 || padding < 0) {
        throw std::invalid_argument("invalid convolution geometry");
    }
    LayerSpec s;
    s.kind = LayerKind::Convolution;
    s.out_channels = out_channels;
    s.kernel_h = kernel;
    s.kernel_w = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::fc(std::int64_t out_features) {
    if (out_features < 1) {
        throw std::invalid_argument("invalid fully-connected width");
    }
    LayerSpec s;
    s.kind = LayerKind::FullyConnected;
    s.out_features = out_features;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    return s;
}

LayerSpec LayerSpec::sigmoid() {
    LayerSpec s;
    s.kind = LayerKind::Sigmoid;
    return s;
}

LayerSpec LayerSpec::maxpool(std::int64_t window, std::int64_t stride) {
    if (window < 1 || stride < 1) {
        throw std::invalid_argument("invalid maxpool geometry");
    }
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.window = window;
    s.pool_stride = stride;
    return s;
}

LayerSpec LayerSpec::softmax() {
    LayerSpec s;
    s.kind = LayerKind::Softmax;
    return s;
}

Dims layer_output_dims(const LayerSpec& layer, const Dims& in) {
    switch (layer.kind) {
    case LayerKind::Convolution: {
        std::int64_t oh = (in.h + 2 * layer.padding - layer.kernel_h) / layer.stride + 1;
        std::int64_t ow = (in.w + 2 * layer.padding - layer.kernel_w) / layer.stride + 1;
        if (in.h + 2 * layer.padding < layer.kernel_h ||
            in.w + 2 * layer.padding < layer.kernel_w || oh < 1 || ow < 1) {
            throw DataError("convolution output would be empty for input " +
                            std::to_string(in.h) + "x" + std::to_string(in.w));
        }
        return Dims{layer.out_channels, oh, ow};
    }
    case LayerKind::FullyConnected:
        return Dims{layer.out_features, 1, 1};
    case LayerKind::ReLU:
    case LayerKind::Sigmoid:
        return in;
    case LayerKind::Softmax:
        return in;
    case LayerKind::MaxPool: {
        if (in.h < layer.window || in.w < layer.window) {
            throw DataError("maxpool window larger than input");
        }
        std::int64_t oh = (in.h - layer.window) / layer.pool_stride + 1;
        std::int64_t ow = (in.w - layer.window) / layer.pool_stride + 1;
        return Dims{in.c, oh, ow};
    }
    }
    throw std::logic_error("unreachable layer kind");
}

std::vector<Dims> chain_dims(const NetworkSpec& spec) {
    if (spec.input_shape.c < 1 || spec.input_shape.h < 1 || spec.input_shape.w < 1) {
        throw DataError("network input shape must be positive");
    }
    std::vector<Dims> out;
    out.reserve(spec.layers.size());
    Dims cur = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        try {
            cur = layer_output_dims(spec.layers[i], cur);
        } catch (const DataError& e) {
            throw DataError("layer " + std::to_string(i) + ": " + e.what());
        }
        out.push_back(cur);
    }
    return out;
}

std::vector<std::size_t> weight_layer_indices(const NetworkSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (spec.layers[i].is_weight_layer()) {
            out.push_back(i);
        }
    }
    return out;
}

std::int64_t reduction_length(const LayerSpec& layer, const Dims& in) {
    switch (layer.kind) {
    case LayerKind::Convolution:
        return in.c * layer.kernel_h * layer.kernel_w;
    case LayerKind::FullyConnected:
        return in.elements();
    default:
        throw std::invalid_argument("reduction_length of a non-weight layer");
    }
}

Fp32Network make_random_network(const NetworkSpec& spec, std::uint64_t seed) {
    chain_dims(spec); // validate before allocating
    Fp32Network net;
    net.spec = spec;
    SplitMix64 rng(seed);
    Dims cur = spec.input_shape;
    for (const LayerSpec& layer : spec.layers) {
        if (layer.is_weight_layer()) {
            std::int64_t red = reduction_length(layer, cur);
            std::int64_t rows = layer.kind == LayerKind::Convolution
                                    ? layer.out_channels
                                    : layer.out_features;
            WeightBlob blob;
            blob.weights = Tensor({rows, red});
            double scale = 1.0 / std::sqrt(static_cast<double>(red));
            for (float& w : blob.weights.data) {
                w = static_cast<float>(rng.uniform(-scale, scale));
            }
            blob.bias.resize(static_cast<std::size_t>(rows));
            for (float& b : blob.bias) {
                b = static_cast<float>(rng.uniform(-0.1, 0.1));
            }
            net.weights.push_back(std::move(blob));
        }
        cur = layer_output_dims(layer, cur);
    }
    return net;
}

} // namespace blq
