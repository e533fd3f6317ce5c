#include "blq/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "blq/errors.hpp"
#include "forward_internal.hpp"

namespace blq {

Tensor im2col(const Tensor& input, const LayerSpec& conv) {
    if (conv.kind != LayerKind::Convolution) {
        throw std::invalid_argument("im2col requires a convolution layer");
    }
    if (input.shape.size() != 3) {
        throw DataError("im2col expects a (c, h, w) input tensor");
    }
    Dims in{input.shape[0], input.shape[1], input.shape[2]};
    Dims out = layer_output_dims(conv, in);
    std::int64_t red = reduction_length(conv, in);
    std::int64_t positions = out.h * out.w;

    Tensor cols({positions, red});
    const float* src = input.data.data();
    float* dst = cols.data.data();
    for (std::int64_t oy = 0; oy < out.h; ++oy) {
        for (std::int64_t ox = 0; ox < out.w; ++ox) {
            float* row = dst + (oy * out.w + ox) * red;
            std::int64_t j = 0;
            for (std::int64_t ic = 0; ic < in.c; ++ic) {
                for (std::int64_t ky = 0; ky < conv.kernel_h; ++ky) {
                    std::int64_t iy = oy * conv.stride + ky - conv.padding;
                    for (std::int64_t kx = 0; kx < conv.kernel_w; ++kx, ++j) {
                        std::int64_t ix = ox * conv.stride + kx - conv.padding;
                        if (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w) {
                            row[j] = src[(ic * in.h + iy) * in.w + ix];
                        }
                    }
                }
            }
        }
    }
    return cols;
}

namespace {

Tensor maxpool(const LayerSpec& layer, const Tensor& input) {
    Dims in{input.shape[0], input.shape[1], input.shape[2]};
    Dims out = layer_output_dims(layer, in);
    Tensor r({out.c, out.h, out.w});
    for (std::int64_t c = 0; c < in.c; ++c) {
        for (std::int64_t oy = 0; oy < out.h; ++oy) {
            for (std::int64_t ox = 0; ox < out.w; ++ox) {
                float best = -std::numeric_limits<float>::infinity();
                for (std::int64_t ky = 0; ky < layer.window; ++ky) {
                    for (std::int64_t kx = 0; kx < layer.window; ++kx) {
                        std::int64_t iy = oy * layer.pool_stride + ky;
                        std::int64_t ix = ox * layer.pool_stride + kx;
                        best = std::max(best, input.data[(c * in.h + iy) * in.w + ix]);
                    }
                }
                r.data[(c * out.h + oy) * out.w + ox] = best;
            }
        }
    }
    return r;
}

Tensor softmax(const Tensor& input) {
    Tensor r(input.shape);
    double hi = -std::numeric_limits<double>::infinity();
    for (float v : input.data) {
        hi = std::max(hi, static_cast<double>(v));
    }
    double sum = 0.0;
    std::vector<double> e(input.data.size());
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        e[i] = std::exp(static_cast<double>(input.data[i]) - hi);
        sum += e[i];
    }
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        r.data[i] = static_cast<float>(e[i] / sum);
    }
    return r;
}

} // namespace

Tensor apply_activation(const LayerSpec& layer, const Tensor& input) {
    switch (layer.kind) {
    case LayerKind::ReLU: {
        Tensor r(input.shape);
        for (std::size_t i = 0; i < input.data.size(); ++i) {
            r.data[i] = input.data[i] > 0.0f ? input.data[i] : 0.0f;
        }
        return r;
    }
    case LayerKind::Sigmoid: {
        Tensor r(input.shape);
        for (std::size_t i = 0; i < input.data.size(); ++i) {
            r.data[i] =
                static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(input.data[i]))));
        }
        return r;
    }
    case LayerKind::Softmax:
        return softmax(input);
    case LayerKind::MaxPool:
        return maxpool(layer, input);
    default:
        throw std::invalid_argument("apply_activation on a weight layer");
    }
}

namespace detail {

Tensor weight_layer_rows(const LayerSpec& layer, const Dims& in, const Tensor& x) {
    if (layer.kind == LayerKind::Convolution) {
        return im2col(x, layer);
    }
    // Fully connected: the flattened sample is a single reduction row.
    Tensor row({std::int64_t{1}, in.elements()});
    row.data = x.data;
    return row;
}

Tensor weight_layer_output(const LayerSpec& layer, const Dims& in,
                           std::int64_t positions) {
    Dims out = layer_output_dims(layer, in);
    if (layer.kind == LayerKind::Convolution) {
        if (positions != out.h * out.w) {
            throw std::logic_error("position count mismatch");
        }
        return Tensor({out.c, out.h, out.w});
    }
    return Tensor({out.c, std::int64_t{1}, std::int64_t{1}});
}

Tensor walk_layers(const NetworkSpec& spec, const Tensor& input,
                   const WeightLayerFn& weight_fn, std::vector<Tensor>* capture) {
    std::vector<Dims> dims = chain_dims(spec);
    if (input.shape.size() != 3 || input.shape[0] != spec.input_shape.c ||
        input.shape[1] != spec.input_shape.h || input.shape[2] != spec.input_shape.w) {
        throw DataError("input tensor does not match the network input shape");
    }
    if (!all_finite(input.data)) {
        throw NumericError("non-finite values in network input");
    }
    Tensor x = input;
    Dims cur = spec.input_shape;
    std::size_t weight_index = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        if (layer.is_weight_layer()) {
            x = weight_fn(weight_index, layer, cur, x);
            ++weight_index;
        } else {
            x = apply_activation(layer, x);
        }
        if (!all_finite(x.data)) {
            throw NumericError("non-finite values after layer " + std::to_string(i));
        }
        cur = dims[i];
        if (capture) {
            capture->push_back(x);
        }
    }
    return x;
}

std::vector<Segment> intersect_partitions(const RegionPartition& wpart,
                                          const RegionPartition& apart) {
    if (wpart.total_elements != apart.total_elements) {
        throw std::invalid_argument("partition length mismatch");
    }
    std::vector<Segment> segs;
    std::int64_t pos = 0;
    std::int64_t n = wpart.total_elements;
    while (pos < n) {
        std::int64_t kw = pos / wpart.region_size;
        std::int64_t ka = pos / apart.region_size;
        std::int64_t end = std::min(wpart.end(kw), apart.end(ka));
        Segment s;
        s.begin = pos;
        s.end = end;
        s.wregion = kw;
        s.aregion = ka;
        s.whole_wregion = (pos == wpart.begin(kw) && end == wpart.end(kw));
        segs.push_back(s);
        pos = end;
    }
    return segs;
}

} // namespace detail

Tensor forward_fp32(const Fp32Network& net, const Tensor& input,
                    std::vector<Tensor>* capture) {
    return detail::walk_layers(
        net.spec, input,
        [&net](std::size_t wi, const LayerSpec& layer, const Dims& in, const Tensor& x) {
            const WeightBlob& blob = net.weights[wi];
            Tensor rows = detail::weight_layer_rows(layer, in, x);
            std::int64_t positions = rows.shape[0];
            std::int64_t red = rows.shape[1];
            if (blob.weights.shape[1] != red) {
                throw DataError("weight reduction length mismatch");
            }
            std::int64_t oc = blob.weights.shape[0];
            Tensor out = detail::weight_layer_output(layer, in, positions);
            for (std::int64_t o = 0; o < oc; ++o) {
                const float* w = blob.weights.data.data() + o * red;
                for (std::int64_t p = 0; p < positions; ++p) {
                    const float* a = rows.data.data() + p * red;
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < red; ++j) {
                        acc += static_cast<double>(w[j]) * static_cast<double>(a[j]);
                    }
                    acc += static_cast<double>(blob.bias[static_cast<std::size_t>(o)]);
                    out.data[static_cast<std::size_t>(o * positions + p)] =
                        static_cast<float>(acc);
                }
            }
            return out;
        },
        capture);
}

void QuantizedLayer::rebuild_caches() {
    std::int64_t oc = static_cast<std::int64_t>(rows.size());
    if (oc == 0) {
        throw std::invalid_argument("quantized layer without rows");
    }
    reduction = rows[0].partition.total_elements;
    std::int64_t rc = rows[0].partition.region_count;
    codes.assign(static_cast<std::size_t>(oc * reduction), 0);
    region_code_sums.assign(static_cast<std::size_t>(oc * rc), 0);
    for (std::int64_t o = 0; o < oc; ++o) {
        const QuantizedTensor& qt = rows[static_cast<std::size_t>(o)];
        if (qt.partition.total_elements != reduction ||
            qt.partition.region_count != rc) {
            throw std::invalid_argument("inconsistent row partitions in quantized layer");
        }
        std::vector<std::uint8_t> row_codes = tensor_codes(qt);
        std::copy(row_codes.begin(), row_codes.end(),
                  codes.begin() + static_cast<std::ptrdiff_t>(o * reduction));
        for (std::int64_t k = 0; k < rc; ++k) {
            std::int64_t sum = 0;
            for (std::int64_t j = qt.partition.begin(k); j < qt.partition.end(k); ++j) {
                sum += row_codes[static_cast<std::size_t>(j)];
            }
            region_code_sums[static_cast<std::size_t>(o * rc + k)] = sum;
        }
    }
}

QuantizedNetwork quantize_network(const Fp32Network& net, int bits,
                                  std::int64_t region_size, QuantMode mode,
                                  int act_bits, std::int64_t act_region_size) {
    if (region_size < 0) {
        throw std::invalid_argument("region_size must be >= 0");
    }
    QuantizedNetwork q;
    q.spec = net.spec;
    q.mode = mode;
    q.weight_bits = bits;
    q.weight_region_size = region_size;
    q.activation_bits = act_bits > 0 ? act_bits : bits;
    q.activation_region_size = act_region_size >= 0 ? act_region_size : region_size;
    for (const WeightBlob& blob : net.weights) {
        std::int64_t oc = blob.weights.shape[0];
        std::int64_t red = blob.weights.shape[1];
        std::int64_t r = region_size == 0 ? red : region_size;
        QuantizedLayer layer;
        layer.bias = blob.bias;
        layer.rows.reserve(static_cast<std::size_t>(oc));
        for (std::int64_t o = 0; o < oc; ++o) {
            std::span<const float> row(blob.weights.data.data() + o * red,
                                       static_cast<std::size_t>(red));
            layer.rows.push_back(quantize_local(row, bits, r));
        }
        layer.rebuild_caches();
        q.layers.push_back(std::move(layer));
    }
    return q;
}

namespace {

// Direct quantized matmul over one weight layer. Both modes dequantize
// through the shared helpers in forward_internal.hpp; the lookup-table
// path reuses the same helpers, which is what makes the two paths
// bit-identical.
Tensor quantized_weight_layer(const QuantizedNetwork& net, std::size_t wi,
                              const LayerSpec& layer, const Dims& in, const Tensor& x) {
    const QuantizedLayer& ql = net.layers[wi];
    Tensor rows = detail::weight_layer_rows(layer, in, x);
    std::int64_t positions = rows.shape[0];
    std::int64_t red = rows.shape[1];
    if (ql.reduction != red) {
        throw DataError("quantized weight reduction length mismatch");
    }
    std::int64_t oc = static_cast<std::int64_t>(ql.rows.size());
    const RegionPartition& wpart = ql.rows[0].partition;
    std::int64_t rc = wpart.region_count;
    Tensor out = detail::weight_layer_output(layer, in, positions);

    if (net.mode == QuantMode::WeightOnly) {
        std::vector<double> region_act_sum(static_cast<std::size_t>(rc));
        for (std::int64_t p = 0; p < positions; ++p) {
            const float* a = rows.data.data() + p * red;
            for (std::int64_t k = 0; k < rc; ++k) {
                double s = 0.0;
                for (std::int64_t j = wpart.begin(k); j < wpart.end(k); ++j) {
                    s += static_cast<double>(a[j]);
                }
                region_act_sum[static_cast<std::size_t>(k)] = s;
            }
            for (std::int64_t o = 0; o < oc; ++o) {
                const std::uint8_t* codes = ql.codes.data() + o * red;
                const QuantParams* params = ql.rows[static_cast<std::size_t>(o)].params.data();
                double acc = 0.0;
                for (std::int64_t k = 0; k < rc; ++k) {
                    double code_dot = 0.0;
                    for (std::int64_t j = wpart.begin(k); j < wpart.end(k); ++j) {
                        code_dot += static_cast<double>(codes[j]) * static_cast<double>(a[j]);
                    }
                    acc += detail::wq_region_value(params[k], code_dot,
                                                   region_act_sum[static_cast<std::size_t>(k)]);
                }
                acc += static_cast<double>(ql.bias[static_cast<std::size_t>(o)]);
                out.data[static_cast<std::size_t>(o * positions + p)] =
                    static_cast<float>(acc);
            }
        }
        return out;
    }

    // Weight-and-activation mode: quantize each reduction row at runtime,
    // then work segment by segment over the intersection of the weight and
    // activation partitions (identical partitions in the common case).
    std::int64_t ar = net.activation_region_size == 0
                          ? red
                          : net.activation_region_size;
    RegionPartition apart(ar, red);
    std::vector<detail::Segment> segs = detail::intersect_partitions(wpart, apart);
    std::vector<QuantParams> aparams;
    std::vector<std::uint8_t> acodes;
    std::vector<std::int64_t> seg_acode_sum(segs.size());
    for (std::int64_t p = 0; p < positions; ++p) {
        std::span<const float> a(rows.data.data() + p * red, static_cast<std::size_t>(red));
        fit_region_codes(a, net.activation_bits, apart, aparams, acodes);
        for (std::size_t s = 0; s < segs.size(); ++s) {
            std::int64_t sum = 0;
            for (std::int64_t j = segs[s].begin; j < segs[s].end; ++j) {
                sum += acodes[static_cast<std::size_t>(j)];
            }
            seg_acode_sum[s] = sum;
        }
        for (std::int64_t o = 0; o < oc; ++o) {
            const std::uint8_t* wcodes = ql.codes.data() + o * red;
            const QuantParams* wparams = ql.rows[static_cast<std::size_t>(o)].params.data();
            double acc = 0.0;
            for (std::size_t s = 0; s < segs.size(); ++s) {
                const detail::Segment& seg = segs[s];
                std::int64_t code_dot = 0;
                for (std::int64_t j = seg.begin; j < seg.end; ++j) {
                    code_dot += static_cast<std::int64_t>(wcodes[j]) *
                                static_cast<std::int64_t>(acodes[static_cast<std::size_t>(j)]);
                }
                std::int64_t wsum;
                if (seg.whole_wregion) {
                    wsum = ql.region_code_sums[static_cast<std::size_t>(o * rc + seg.wregion)];
                } else {
                    wsum = 0;
                    for (std::int64_t j = seg.begin; j < seg.end; ++j) {
                        wsum += wcodes[j];
                    }
                }
                acc += detail::waq_segment_value(
                    wparams[seg.wregion], aparams[static_cast<std::size_t>(seg.aregion)],
                    code_dot, wsum, seg_acode_sum[s], seg.end - seg.begin);
            }
            acc += static_cast<double>(ql.bias[static_cast<std::size_t>(o)]);
            out.data[static_cast<std::size_t>(o * positions + p)] = static_cast<float>(acc);
        }
    }
    return out;
}

Tensor forward_quantized(const QuantizedNetwork& net, const Tensor& input,
                         std::vector<Tensor>* capture) {
    return detail::walk_layers(
        net.spec, input,
        [&net](std::size_t wi, const LayerSpec& layer, const Dims& in, const Tensor& x) {
            return quantized_weight_layer(net, wi, layer, in, x);
        },
        capture);
}

} // namespace

Tensor forward_dq(const QuantizedNetwork& net, const Tensor& input,
                  std::vector<Tensor>* capture) {
    for (const QuantizedLayer& l : net.layers) {
        if (l.rows[0].partition.region_count != 1) {
            throw std::invalid_argument(
                "forward_dq requires globally quantized weights (region_size 0)");
        }
    }
    return forward_quantized(net, input, capture);
}

Tensor forward_lq(const QuantizedNetwork& net, const Tensor& input,
                  std::vector<Tensor>* capture) {
    return forward_quantized(net, input, capture);
}

} // namespace blq
