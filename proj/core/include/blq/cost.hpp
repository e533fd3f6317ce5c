#ifndef BLQ_COST_HPP
#define BLQ_COST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "blq/lut.hpp"
#include "blq/network.hpp"

namespace blq {

enum class CostScope : std::uint8_t {
    ConvOnly,  // convolution layers only
    ConvAndFc, // convolution and fully-connected layers
};

/// The counting rules behind an OpCount. Direct mode charges one multiply
/// and one add per MAC. LUT mode charges one add per table lookup and one
/// multiply per region dequantization; index packing, cross-term
/// bookkeeping and offline table construction are excluded. Every report
/// carries this convention, and counts under different conventions never
/// compare equal.
struct CostConvention {
    std::string scheme; // "direct" or "lut"
    CostScope scope = CostScope::ConvOnly;
    std::int64_t group_size = 0;  // lut only
    std::int64_t region_size = 0; // lut only

    std::string text() const;

    bool operator==(const CostConvention&) const = default;
};

struct OpCountEntry {
    std::size_t layer_index = 0;
    std::string label;
    std::int64_t multiplies = 0;
    std::int64_t adds = 0;
    std::int64_t lookups = 0;

    bool operator==(const OpCountEntry&) const = default;
};

struct OpCount {
    CostConvention convention;
    std::vector<OpCountEntry> per_layer;
    std::int64_t multiplies = 0;
    std::int64_t adds = 0;
    std::int64_t lookups = 0;

    bool operator==(const OpCount&) const = default;
};

/// MAC counting for the direct paths: per layer,
/// positions * out_channels * reduction multiplies and as many adds.
OpCount count_direct(const NetworkSpec& spec, CostScope scope = CostScope::ConvOnly);

/// Table-driven counting: per reduction row, ceil(reduction/group) lookups
/// (one add each) and ceil(reduction/region) multiplies; short tail groups
/// and regions still cost one lookup / one multiply each.
OpCount count_lut(const NetworkSpec& spec, const LutConfig& cfg,
                  CostScope scope = CostScope::ConvOnly);

/// Analytic table storage: sum over layers of
/// out_channels * ceil(reduction/group) * 2^(group*bits) * entry_width.
std::int64_t table_footprint(const NetworkSpec& spec, const LutConfig& cfg,
                             std::int64_t entry_width_bytes = 2);

/// Count in millions, rounded half away from zero.
std::int64_t to_millions(std::int64_t ops);

} // namespace blq

#endif // BLQ_COST_HPP
