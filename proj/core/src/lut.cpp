#include "blq/lut.hpp"

#include <stdexcept>
#include <string>

#include "blq/errors.hpp"
#include "forward_internal.hpp"

namespace blq {

void LutConfig::validate() const {
    if (activation_bits != 1 && activation_bits != 2 && activation_bits != 4) {
        throw std::invalid_argument("lut activation_bits must be 1, 2 or 4");
    }
    if (group_size < 1) {
        throw std::invalid_argument("lut group_size must be >= 1");
    }
    if (group_size * activation_bits > 16) {
        throw std::invalid_argument("lut index width group_size*activation_bits must be <= 16");
    }
    if (region_size < 1 || region_size % group_size != 0) {
        throw std::invalid_argument("lut region_size must be a positive multiple of group_size");
    }
}

std::uint32_t pack_index(std::span<const std::uint8_t> codes, int bits) {
    if (bits < 1 || bits > 8) {
        throw std::invalid_argument("index bit width must be in [1, 8]");
    }
    if (codes.size() * static_cast<std::size_t>(bits) > 16) {
        throw std::invalid_argument("packed index wider than 16 bits");
    }
    std::uint32_t limit = (1u << bits) - 1u;
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        if (codes[i] > limit) {
            throw NumericError("activation code " + std::to_string(codes[i]) +
                               " overflows " + std::to_string(bits) + "-bit index field");
        }
        idx |= static_cast<std::uint32_t>(codes[i]) << (bits * static_cast<int>(i));
    }
    return idx;
}

LookupTable build_group_table(std::span<const std::uint8_t> wcodes, int activation_bits) {
    std::int64_t width = static_cast<std::int64_t>(wcodes.size());
    if (width < 1 || width * activation_bits > 16) {
        throw std::invalid_argument("group width out of range for table index");
    }
    LookupTable t;
    t.width = width;
    for (std::uint8_t c : wcodes) {
        t.wcode_sum += c;
    }
    std::uint32_t mask = (1u << activation_bits) - 1u;
    std::size_t count = std::size_t{1} << (width * activation_bits);
    t.entries.resize(count);
    for (std::uint32_t idx = 0; idx < count; ++idx) {
        std::int32_t acc = 0;
        for (std::int64_t i = 0; i < width; ++i) {
            std::uint32_t field = (idx >> (activation_bits * i)) & mask;
            acc += static_cast<std::int32_t>(wcodes[static_cast<std::size_t>(i)]) *
                   static_cast<std::int32_t>(field);
        }
        t.entries[idx] = acc;
    }
    return t;
}

LutNetwork build_tables(const QuantizedNetwork& qnet, const LutConfig& cfg) {
    cfg.validate();
    if (qnet.mode != QuantMode::WeightAndActivation) {
        throw std::invalid_argument("lookup tables require a weight-and-activation network");
    }
    if (qnet.activation_bits != cfg.activation_bits) {
        throw std::invalid_argument("network activation bits do not match lut config");
    }
    if (qnet.activation_region_size != cfg.region_size ||
        qnet.weight_region_size != cfg.region_size) {
        throw std::invalid_argument(
            "lookup tables require weight and activation regions equal to the lut region");
    }
    LutNetwork net;
    net.base = qnet;
    net.cfg = cfg;
    for (const QuantizedLayer& ql : qnet.layers) {
        std::int64_t red = ql.reduction;
        std::int64_t oc = static_cast<std::int64_t>(ql.rows.size());
        std::int64_t groups = (red + cfg.group_size - 1) / cfg.group_size;
        LutLayer ll;
        ll.group_count = groups;
        ll.tables.reserve(static_cast<std::size_t>(oc * groups));
        for (std::int64_t o = 0; o < oc; ++o) {
            const std::uint8_t* wcodes = ql.codes.data() + o * red;
            for (std::int64_t g = 0; g < groups; ++g) {
                std::int64_t b = g * cfg.group_size;
                std::int64_t e = std::min(b + cfg.group_size, red);
                ll.tables.push_back(build_group_table(
                    std::span<const std::uint8_t>(wcodes + b,
                                                  static_cast<std::size_t>(e - b)),
                    cfg.activation_bits));
            }
        }
        net.layers.push_back(std::move(ll));
    }
    return net;
}

namespace {

Tensor lut_weight_layer(const LutNetwork& net, std::size_t wi, const LayerSpec& layer,
                        const Dims& in, const Tensor& x, LutOpCounters* counters) {
    const QuantizedLayer& ql = net.base.layers[wi];
    const LutLayer& ll = net.layers[wi];
    const LutConfig& cfg = net.cfg;
    Tensor rows = detail::weight_layer_rows(layer, in, x);
    std::int64_t positions = rows.shape[0];
    std::int64_t red = rows.shape[1];
    if (ql.reduction != red) {
        throw DataError("lut weight reduction length mismatch");
    }
    std::int64_t oc = static_cast<std::int64_t>(ql.rows.size());
    const RegionPartition& part = ql.rows[0].partition;
    std::int64_t rc = part.region_count;
    std::int64_t groups = ll.group_count;
    Tensor out = detail::weight_layer_output(layer, in, positions);

    std::vector<QuantParams> aparams;
    std::vector<std::uint8_t> acodes;
    std::vector<std::uint32_t> group_idx(static_cast<std::size_t>(groups));
    std::vector<std::int64_t> region_acode_sum(static_cast<std::size_t>(rc));
    for (std::int64_t p = 0; p < positions; ++p) {
        std::span<const float> a(rows.data.data() + p * red, static_cast<std::size_t>(red));
        fit_region_codes(a, cfg.activation_bits, part, aparams, acodes);
        for (std::int64_t g = 0; g < groups; ++g) {
            std::int64_t b = g * cfg.group_size;
            std::int64_t e = std::min(b + cfg.group_size, red);
            group_idx[static_cast<std::size_t>(g)] = pack_index(
                std::span<const std::uint8_t>(acodes.data() + b,
                                              static_cast<std::size_t>(e - b)),
                cfg.activation_bits);
        }
        for (std::int64_t k = 0; k < rc; ++k) {
            std::int64_t sum = 0;
            for (std::int64_t j = part.begin(k); j < part.end(k); ++j) {
                sum += acodes[static_cast<std::size_t>(j)];
            }
            region_acode_sum[static_cast<std::size_t>(k)] = sum;
        }
        for (std::int64_t o = 0; o < oc; ++o) {
            const LookupTable* row_tables = ll.tables.data() + o * groups;
            const QuantParams* wparams = ql.rows[static_cast<std::size_t>(o)].params.data();
            double acc = 0.0;
            for (std::int64_t k = 0; k < rc; ++k) {
                // Region boundaries are multiples of the group size, so a
                // region is a whole run of groups.
                std::int64_t gbegin = part.begin(k) / cfg.group_size;
                std::int64_t gend = (part.end(k) + cfg.group_size - 1) / cfg.group_size;
                std::int64_t code_dot = 0;
                for (std::int64_t g = gbegin; g < gend; ++g) {
                    code_dot += row_tables[g].entries[group_idx[static_cast<std::size_t>(g)]];
                }
                if (counters) {
                    counters->lookups += gend - gbegin;
                    counters->region_dequants += 1;
                }
                acc += detail::waq_segment_value(
                    wparams[k], aparams[static_cast<std::size_t>(k)], code_dot,
                    ql.region_code_sums[static_cast<std::size_t>(o * rc + k)],
                    region_acode_sum[static_cast<std::size_t>(k)],
                    part.end(k) - part.begin(k));
            }
            acc += static_cast<double>(ql.bias[static_cast<std::size_t>(o)]);
            out.data[static_cast<std::size_t>(o * positions + p)] = static_cast<float>(acc);
        }
    }
    return out;
}

} // namespace

Tensor forward_lut(const LutNetwork& net, const Tensor& input,
                   std::vector<Tensor>* capture, LutOpCounters* counters) {
    return detail::walk_layers(
        net.base.spec, input,
        [&net, counters](std::size_t wi, const LayerSpec& layer, const Dims& in,
                         const Tensor& x) {
            return lut_weight_layer(net, wi, layer, in, x, counters);
        },
        capture);
}

std::int64_t lut_stored_bytes(const LutNetwork& net) {
    std::int64_t total = 0;
    for (const LutLayer& ll : net.layers) {
        for (const LookupTable& t : ll.tables) {
            total += static_cast<std::int64_t>(t.entries.size()) * 4;
        }
    }
    return total;
}

} // namespace blq
