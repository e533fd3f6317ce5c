#ifndef BLQ_FORWARD_HPP
#define BLQ_FORWARD_HPP

#include <cstdint>
#include <vector>

#include "blq/network.hpp"
#include "blq/quant.hpp"
#include "blq/tensor.hpp"

namespace blq {

/// Lowers one convolution input to a (out_h*out_w) x (in_c*kh*kw) matrix.
/// Row p is the receptive field of output position p; columns are ordered
/// input-channel-major, then kernel row, then kernel column — the same
/// order as weight rows and quantization regions, so one kernel's
/// reduction axis is contiguous.
Tensor im2col(const Tensor& input, const LayerSpec& conv);

/// Elementwise / windowed non-weight layers: ReLU, sigmoid, softmax
/// (max-subtracted), maxpool.
Tensor apply_activation(const LayerSpec& layer, const Tensor& input);

/// FP32 reference path. Convolution runs as im2col + matrix multiply with
/// double-width accumulation in fixed ascending-index order.
/// `capture`, when non-null, receives every layer output in order.
Tensor forward_fp32(const Fp32Network& net, const Tensor& input,
                    std::vector<Tensor>* capture = nullptr);

enum class QuantMode : std::uint8_t {
    WeightOnly,           // quantized weights, real activations
    WeightAndActivation,  // activations quantized per region at runtime
};

/// Quantized parameters of one weight layer: one QuantizedTensor per
/// output row (kernel), all rows sharing the same region tiling of the
/// reduction axis. Codes and per-region code sums are cached unpacked for
/// the forward paths; the code sums are the correction terms of the
/// affine dequantization cross term.
struct QuantizedLayer {
    std::vector<QuantizedTensor> rows;
    std::vector<float> bias;
    std::int64_t reduction = 0;
    // derived caches, rebuilt on load
    std::vector<std::uint8_t> codes;             // rows x reduction, unpacked
    std::vector<std::int64_t> region_code_sums;  // rows x region_count

    void rebuild_caches();
    bool operator==(const QuantizedLayer& o) const {
        return rows == o.rows && bias == o.bias && reduction == o.reduction;
    }
};

struct QuantizedNetwork {
    NetworkSpec spec;
    std::vector<QuantizedLayer> layers; // one per weight layer
    QuantMode mode = QuantMode::WeightOnly;
    int weight_bits = 8;
    std::int64_t weight_region_size = 0;     // 0 = one region per reduction row
    int activation_bits = 8;                 // weight-and-activation mode only
    std::int64_t activation_region_size = 0; // 0 = one region per row

    bool operator==(const QuantizedNetwork&) const = default;
};

/// Quantizes every weight row independently with regions of `region_size`
/// (0 = the row's full reduction length, i.e. one shared range per
/// kernel). Biases stay in full precision. In weight-and-activation mode
/// activations will be quantized at runtime with `act_bits` /
/// `act_region_size` (0 defaults: same as the weight settings).
QuantizedNetwork quantize_network(const Fp32Network& net, int bits,
                                  std::int64_t region_size, QuantMode mode,
                                  int act_bits = 0,
                                  std::int64_t act_region_size = -1);

/// Forward pass with per-row globally quantized weights (one region per
/// reduction row). Requires a network built with region_size 0.
Tensor forward_dq(const QuantizedNetwork& net, const Tensor& input,
                  std::vector<Tensor>* capture = nullptr);

/// Forward pass with region-local quantized weights. Each region partial
/// sum is dequantized with its own (x_min, step) and the affine cross
/// term before the partials are summed.
Tensor forward_lq(const QuantizedNetwork& net, const Tensor& input,
                  std::vector<Tensor>* capture = nullptr);

} // namespace blq

#endif // BLQ_FORWARD_HPP
