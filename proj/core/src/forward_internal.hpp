#ifndef BLQ_FORWARD_INTERNAL_HPP
#define BLQ_FORWARD_INTERNAL_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "blq/forward.hpp"
#include "blq/network.hpp"
#include "blq/quant.hpp"
#include "blq/tensor.hpp"

// Shared between the direct quantized path and the lookup-table path.
// Both must run the exact same floating-point expressions so their
// outputs are bit-identical; keep every dequantization formula here.

namespace blq::detail {

/// Weight-only region partial: step * sum(code_j * a_j) + x_min * sum(a_j).
inline double wq_region_value(const QuantParams& wp, double code_dot, double act_sum) {
    return wp.step * code_dot + wp.x_min * act_sum;
}

/// Weight-and-activation segment partial over `len` elements where both
/// parameter sets are constant. Expands the product of two affine maps:
///   sum W*a ~ s_w*s_a*T + s_w*amin*Sw + wmin*s_a*Sa + len*wmin*amin
/// with T = sum(wcode*acode), Sw = sum(wcode), Sa = sum(acode).
inline double waq_segment_value(const QuantParams& wp, const QuantParams& ap,
                                std::int64_t code_dot, std::int64_t wcode_sum,
                                std::int64_t acode_sum, std::int64_t len) {
    return wp.step * ap.step * static_cast<double>(code_dot) +
           wp.step * ap.x_min * static_cast<double>(wcode_sum) +
           wp.x_min * ap.step * static_cast<double>(acode_sum) +
           static_cast<double>(len) * wp.x_min * ap.x_min;
}

/// Intersection segment of a weight region and an activation region.
struct Segment {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::int64_t wregion = 0;
    std::int64_t aregion = 0;
    bool whole_wregion = false; // segment covers its weight region exactly
};

/// Splits [0, N) at the boundaries of both partitions, ascending.
std::vector<Segment> intersect_partitions(const RegionPartition& wpart,
                                          const RegionPartition& apart);

/// Applies `weight_fn` to each convolution/fully-connected layer (with the
/// layer's input dims and activation tensor) and the standard ops to the
/// rest. Checks every layer output for non-finite values and reports the
/// layer index on failure. `capture`, when non-null, receives each layer
/// output.
using WeightLayerFn = std::function<Tensor(std::size_t weight_index, const LayerSpec&,
                                           const Dims& in, const Tensor& x)>;
Tensor walk_layers(const NetworkSpec& spec, const Tensor& input,
                   const WeightLayerFn& weight_fn, std::vector<Tensor>* capture);

/// Flattens the sample into reduction rows for a weight layer: im2col
/// matrix for convolution, a single row for fully-connected.
Tensor weight_layer_rows(const LayerSpec& layer, const Dims& in, const Tensor& x);

/// Output tensor shape for a weight layer given the row matrix.
Tensor weight_layer_output(const LayerSpec& layer, const Dims& in,
                           std::int64_t positions);

} // namespace blq::detail

#endif // BLQ_FORWARD_INTERNAL_HPP
