#ifndef BLQ_LUT_HPP
#define BLQ_LUT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "blq/forward.hpp"
#include "blq/quant.hpp"
#include "blq/tensor.hpp"

namespace blq {

/// Table-driven execution settings. `group_size` consecutive activation
/// codes of `activation_bits` each pack into one table index, so each
/// group's table has 2^(group_size*activation_bits) entries. Regions must
/// be whole multiples of the group so groups never straddle a region
/// boundary.
struct LutConfig {
    int activation_bits = 2;       // 1, 2 or 4
    std::int64_t group_size = 3;   // activation codes per table index
    std::int64_t region_size = 9;  // must be a multiple of group_size

    /// Throws std::invalid_argument when the invariants do not hold:
    /// activation_bits in {1,2,4}, group_size >= 1, index width
    /// group_size*activation_bits <= 16, region_size a positive multiple
    /// of group_size.
    void validate() const;

    /// Table entries per full group.
    std::int64_t entries_per_group() const {
        return std::int64_t{1} << (group_size * activation_bits);
    }

    bool operator==(const LutConfig&) const = default;
};

/// Precomputed integer partial dot products of one weight-code group
/// against every possible activation-code combination:
/// entries[idx] = sum_i wcode_i * field_i(idx). Also keeps the group's
/// weight-code sum for the activation cross term.
struct LookupTable {
    std::vector<std::int32_t> entries;
    std::int64_t wcode_sum = 0;
    std::int64_t width = 0; // codes per index; short tail groups are narrower

    bool operator==(const LookupTable&) const = default;
};

struct LutLayer {
    std::vector<LookupTable> tables; // [row * group_count + group]
    std::int64_t group_count = 0;

    bool operator==(const LutLayer&) const = default;
};

/// A weight-and-activation quantized network plus its offline tables.
struct LutNetwork {
    QuantizedNetwork base;
    LutConfig cfg;
    std::vector<LutLayer> layers; // one per weight layer

    bool operator==(const LutNetwork&) const = default;
};

/// Packs up to 16/bits codes into one table index, element 0 in the low
/// bits: idx = sum_i codes[i] * 2^(bits*i). A code >= 2^bits is an error.
std::uint32_t pack_index(std::span<const std::uint8_t> codes, int bits);

/// Exhaustive table for one group of weight codes: integer arithmetic
/// only, construction is offline and excluded from runtime op counts.
LookupTable build_group_table(std::span<const std::uint8_t> wcodes, int activation_bits);

/// Builds per-kernel, per-group tables for every weight layer. The input
/// network must be weight-and-activation quantized with region and bit
/// settings matching `cfg`.
LutNetwork build_tables(const QuantizedNetwork& qnet, const LutConfig& cfg);

/// Executed-operation counters for the structural zero-multiply check:
/// `lookups` increments once per table fetch, `region_dequants` once per
/// region scale application — the only multiplies on the hot path.
struct LutOpCounters {
    std::int64_t lookups = 0;
    std::int64_t region_dequants = 0;
};

/// Multiply-free forward pass: per reduction row, activations are
/// quantized per region, each group of codes indexes its table, fetched
/// integers accumulate per region, and each region partial is dequantized
/// with the shared affine cross-term expansion. Bit-identical to
/// forward_lq on the underlying network.
Tensor forward_lut(const LutNetwork& net, const Tensor& input,
                   std::vector<Tensor>* capture = nullptr,
                   LutOpCounters* counters = nullptr);

/// Bytes of table entries actually stored (4-byte entries, short tail
/// groups included at their real size).
std::int64_t lut_stored_bytes(const LutNetwork& net);

} // namespace blq

#endif // BLQ_LUT_HPP
