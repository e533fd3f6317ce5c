#ifndef BLQ_QUANT_HPP
#define BLQ_QUANT_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace blq {

/// Tie policy for code rounding. Only one policy exists; it is named so
/// that serialized models state it explicitly.
enum class Rounding : std::uint8_t {
    HalfAwayFromZero = 0,
};

/// Bit width of the integer codes, 1..8. Codes are unsigned, range
/// [0, 2^bits - 1].
struct QuantSpec {
    int bits = 8;
    Rounding rounding = Rounding::HalfAwayFromZero;

    bool operator==(const QuantSpec&) const = default;
};

/// Affine reconstruction parameters of one region: value = x_min + code * step.
/// step is 0 only for degenerate (constant) regions.
struct QuantParams {
    double x_min = 0.0;
    double step = 0.0;

    bool operator==(const QuantParams&) const = default;
};

/// Contiguous tiling of a flattened reduction axis of N elements into
/// regions of region_size; the final region may be short.
struct RegionPartition {
    std::int64_t region_size = 0;
    std::int64_t region_count = 0;
    std::int64_t total_elements = 0;

    RegionPartition() = default;
    RegionPartition(std::int64_t size, std::int64_t total);

    /// First element of region k.
    std::int64_t begin(std::int64_t k) const { return k * region_size; }
    /// One past the last element of region k.
    std::int64_t end(std::int64_t k) const {
        std::int64_t e = (k + 1) * region_size;
        return e < total_elements ? e : total_elements;
    }

    bool operator==(const RegionPartition&) const = default;
};

/// Integer codes for one slice, bit-packed, plus the region structure and
/// one QuantParams per region.
struct QuantizedTensor {
    std::vector<std::uint8_t> codes; // packed, see pack_codes
    QuantSpec spec;
    RegionPartition partition;
    std::vector<QuantParams> params; // indexed by region number

    bool operator==(const QuantizedTensor&) const = default;
};

/// Quantization step for an n-bit code covering [x_min, x_max].
/// Exactly 0 when x_max == x_min. Throws std::invalid_argument for bits
/// outside [1, 8] or non-finite bounds.
double quant_step(double x_min, double x_max, int bits);

/// Round-to-nearest code for x, ties away from zero, saturating to
/// [0, 2^bits - 1]. Out-of-range x clamps (saturating fixed-point
/// behavior); it is not an error. step == 0 maps everything to code 0.
std::uint8_t quantize_value(double x, const QuantParams& params, int bits);

/// x_min + code * step.
double dequantize_value(std::uint8_t code, const QuantParams& params);

/// Reconstruction error x - dequantize(quantize(x)); the bounded sawtooth
/// with peak magnitude step/2 inside the calibrated range.
double quant_error(double x, const QuantParams& params, int bits);

/// Calibrates params on the observed range of a non-empty slice:
/// x_min = min(values), step over [min, max].
QuantParams fit_params(std::span<const float> values, int bits);

/// One region covering the whole slice.
QuantizedTensor quantize_global(std::span<const float> values, int bits);

/// Contiguous regions of region_size, each independently calibrated.
/// region_size >= 1; region_size == N reproduces quantize_global.
QuantizedTensor quantize_local(std::span<const float> values, int bits,
                               std::int64_t region_size);

/// Storage width for bit-packing: bits itself when it divides 8
/// (1, 2, 4, 8), otherwise one byte per code.
int storage_bits(int bits);

/// Packs codes little-endian within each byte: element i occupies bits
/// [b*(i mod 8/b), ...) of byte floor(i*b/8), b = storage_bits(bits).
/// A code >= 2^bits is an error.
std::vector<std::uint8_t> pack_codes(std::span<const std::uint8_t> codes, int bits);

/// Inverse of pack_codes for a known element count.
std::vector<std::uint8_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits,
                                       std::int64_t count);

/// Unpacked codes of a QuantizedTensor.
std::vector<std::uint8_t> tensor_codes(const QuantizedTensor& qt);

/// Reconstructed values, one per element.
std::vector<double> reconstruct(const QuantizedTensor& qt);

/// Internal building block shared with the runtime activation quantizer:
/// calibrates each region of the slice and emits unpacked codes.
void fit_region_codes(std::span<const float> values, int bits,
                      const RegionPartition& partition,
                      std::vector<QuantParams>& params_out,
                      std::vector<std::uint8_t>& codes_out);

} // namespace blq

#endif // BLQ_QUANT_HPP
