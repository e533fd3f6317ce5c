#include "blq/cost.hpp"

#include <string>

namespace blq {

namespace {

std::string layer_label(const LayerSpec& layer, std::size_t index) {
    if (layer.kind == LayerKind::Convolution) {
        return "conv" + std::to_string(index);
    }
    return "fc" + std::to_string(index);
}

bool in_scope(const LayerSpec& layer, CostScope scope) {
    if (layer.kind == LayerKind::Convolution) {
        return true;
    }
    return layer.kind == LayerKind::FullyConnected && scope == CostScope::ConvAndFc;
}

struct LayerGeometry {
    std::size_t index;
    std::string label;
    std::int64_t positions;
    std::int64_t out_channels;
    std::int64_t reduction;
};

std::vector<LayerGeometry> scoped_geometry(const NetworkSpec& spec, CostScope scope) {
    std::vector<Dims> dims = chain_dims(spec);
    std::vector<LayerGeometry> out;
    Dims in = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        if (layer.is_weight_layer() && in_scope(layer, scope)) {
            const Dims& od = dims[i];
            LayerGeometry g;
            g.index = i;
            g.label = layer_label(layer, i);
            g.positions = layer.kind == LayerKind::Convolution ? od.h * od.w : 1;
            g.out_channels = od.c;
            g.reduction = reduction_length(layer, in);
            out.push_back(std::move(g));
        }
        in = dims[i];
    }
    return out;
}

} // namespace

std::string CostConvention::text() const {
    std::string s = scheme;
    if (scheme == "direct") {
        s += ": 1 multiply + 1 add per MAC";
    } else {
        s += ": 1 add per lookup (group=" + std::to_string(group_size) +
             "), 1 multiply per region dequantization (region=" +
             std::to_string(region_size) + ")";
    }
    s += "; scope=";
    s += scope == CostScope::ConvOnly ? "conv" : "conv+fc";
    return s;
}

OpCount count_direct(const NetworkSpec& spec, CostScope scope) {
    OpCount oc;
    oc.convention = CostConvention{"direct", scope, 0, 0};
    for (const LayerGeometry& g : scoped_geometry(spec, scope)) {
        std::int64_t macs = g.positions * g.out_channels * g.reduction;
        oc.per_layer.push_back({g.index, g.label, macs, macs, 0});
        oc.multiplies += macs;
        oc.adds += macs;
    }
    return oc;
}

OpCount count_lut(const NetworkSpec& spec, const LutConfig& cfg, CostScope scope) {
    cfg.validate();
    OpCount oc;
    oc.convention = CostConvention{"lut", scope, cfg.group_size, cfg.region_size};
    for (const LayerGeometry& g : scoped_geometry(spec, scope)) {
        std::int64_t rows = g.positions * g.out_channels;
        std::int64_t lookups = rows * ((g.reduction + cfg.group_size - 1) / cfg.group_size);
        std::int64_t dequants = rows * ((g.reduction + cfg.region_size - 1) / cfg.region_size);
        oc.per_layer.push_back({g.index, g.label, dequants, lookups, lookups});
        oc.multiplies += dequants;
        oc.adds += lookups;
        oc.lookups += lookups;
    }
    return oc;
}

std::int64_t table_footprint(const NetworkSpec& spec, const LutConfig& cfg,
                             std::int64_t entry_width_bytes) {
    cfg.validate();
    std::int64_t total = 0;
    for (const LayerGeometry& g : scoped_geometry(spec, CostScope::ConvAndFc)) {
        std::int64_t groups = (g.reduction + cfg.group_size - 1) / cfg.group_size;
        total += g.out_channels * groups * cfg.entries_per_group() * entry_width_bytes;
    }
    return total;
}

std::int64_t to_millions(std::int64_t ops) {
    // round half away from zero; counts are non-negative here
    return (ops + 500000) / 1000000;
}

} // namespace blq
