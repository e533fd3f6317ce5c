#include "blq/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "blq/errors.hpp"

namespace blq {

namespace {

void check_bits(int bits) {
    if (bits < 1 || bits > 8) {
        throw std::invalid_argument("bit width must be in [1, 8], got " +
                                    std::to_string(bits));
    }
}

std::uint32_t max_code(int bits) {
    return (1u << bits) - 1u;
}

} // namespace

RegionPartition::RegionPartition(std::int64_t size, std::int64_t total) {
    if (size < 1) {
        throw std::invalid_argument("region_size must be >= 1, got " +
                                    std::to_string(size));
    }
    if (total < 1) {
        throw std::invalid_argument("total_elements must be >= 1, got " +
                                    std::to_string(total));
    }
    region_size = size;
    total_elements = total;
    region_count = (total + size - 1) / size;
}

double quant_step(double x_min, double x_max, int bits) {
    check_bits(bits);
    if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw std::invalid_argument("quantization bounds must be finite");
    }
    if (x_max < x_min) {
        throw std::invalid_argument("x_max must be >= x_min");
    }
    if (x_max == x_min) {
        return 0.0;
    }
    return (x_max - x_min) / static_cast<double>(max_code(bits));
}

std::uint8_t quantize_value(double x, const QuantParams& params, int bits) {
    check_bits(bits);
    if (!std::isfinite(x)) {
        throw NumericError("cannot quantize non-finite value");
    }
    if (params.step <= 0.0) {
        return 0;
    }
    double q = std::round((x - params.x_min) / params.step);
    double hi = static_cast<double>(max_code(bits));
    if (q < 0.0) {
        q = 0.0;
    } else if (q > hi) {
        q = hi;
    }
    return static_cast<std::uint8_t>(q);
}

double dequantize_value(std::uint8_t code, const QuantParams& params) {
    return params.x_min + static_cast<double>(code) * params.step;
}

double quant_error(double x, const QuantParams& params, int bits) {
    return x - dequantize_value(quantize_value(x, params, bits), params);
}

QuantParams fit_params(std::span<const float> values, int bits) {
    check_bits(bits);
    if (values.empty()) {
        throw std::invalid_argument("cannot fit quantization params on an empty slice");
    }
    float lo = values[0];
    float hi = values[0];
    for (float v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    QuantParams p;
    p.x_min = static_cast<double>(lo);
    p.step = quant_step(static_cast<double>(lo), static_cast<double>(hi), bits);
    return p;
}

void fit_region_codes(std::span<const float> values, int bits,
                      const RegionPartition& partition,
                      std::vector<QuantParams>& params_out,
                      std::vector<std::uint8_t>& codes_out) {
    params_out.resize(static_cast<std::size_t>(partition.region_count));
    codes_out.resize(values.size());
    for (std::int64_t k = 0; k < partition.region_count; ++k) {
        std::int64_t b = partition.begin(k);
        std::int64_t e = partition.end(k);
        QuantParams p = fit_params(values.subspan(static_cast<std::size_t>(b),
                                                  static_cast<std::size_t>(e - b)),
                                   bits);
        params_out[static_cast<std::size_t>(k)] = p;
        for (std::int64_t i = b; i < e; ++i) {
            codes_out[static_cast<std::size_t>(i)] =
                quantize_value(static_cast<double>(values[static_cast<std::size_t>(i)]),
                               p, bits);
        }
    }
}

namespace {

QuantizedTensor quantize_with_partition(std::span<const float> values, int bits,
                                        const RegionPartition& partition) {
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw NumericError("cannot quantize slice containing non-finite values");
        }
    }
    QuantizedTensor qt;
    qt.spec = QuantSpec{bits, Rounding::HalfAwayFromZero};
    qt.partition = partition;
    std::vector<std::uint8_t> codes;
    fit_region_codes(values, bits, partition, qt.params, codes);
    qt.codes = pack_codes(codes, bits);
    return qt;
}

} // namespace

QuantizedTensor quantize_global(std::span<const float> values, int bits) {
    if (values.empty()) {
        throw std::invalid_argument("cannot quantize an empty slice");
    }
    std::int64_t n = static_cast<std::int64_t>(values.size());
    return quantize_with_partition(values, bits, RegionPartition(n, n));
}

QuantizedTensor quantize_local(std::span<const float> values, int bits,
                               std::int64_t region_size) {
    if (values.empty()) {
        throw std::invalid_argument("cannot quantize an empty slice");
    }
    std::int64_t n = static_cast<std::int64_t>(values.size());
    return quantize_with_partition(values, bits, RegionPartition(region_size, n));
}

int storage_bits(int bits) {
    check_bits(bits);
    return 8 % bits == 0 ? bits : 8;
}

std::vector<std::uint8_t> pack_codes(std::span<const std::uint8_t> codes, int bits) {
    int sb = storage_bits(bits);
    std::uint32_t limit = max_code(bits);
    for (std::uint8_t c : codes) {
        if (c > limit) {
            throw NumericError("code " + std::to_string(c) + " overflows " +
                               std::to_string(bits) + "-bit range");
        }
    }
    int per_byte = 8 / sb;
    std::vector<std::uint8_t> out((codes.size() + static_cast<std::size_t>(per_byte) - 1) /
                                  static_cast<std::size_t>(per_byte));
    for (std::size_t i = 0; i < codes.size(); ++i) {
        std::size_t byte = i / static_cast<std::size_t>(per_byte);
        int shift = static_cast<int>(i % static_cast<std::size_t>(per_byte)) * sb;
        out[byte] = static_cast<std::uint8_t>(out[byte] | (codes[i] << shift));
    }
    return out;
}

std::vector<std::uint8_t> unpack_codes(std::span<const std::uint8_t> bytes, int bits,
                                       std::int64_t count) {
    if (count < 0) {
        throw std::invalid_argument("negative code count");
    }
    int sb = storage_bits(bits);
    int per_byte = 8 / sb;
    std::size_t needed = (static_cast<std::size_t>(count) +
                          static_cast<std::size_t>(per_byte) - 1) /
                         static_cast<std::size_t>(per_byte);
    if (bytes.size() < needed) {
        throw DataError("packed code buffer too short: expected " +
                        std::to_string(needed) + " bytes, got " +
                        std::to_string(bytes.size()));
    }
    std::uint8_t mask = static_cast<std::uint8_t>((1u << sb) - 1u);
    std::vector<std::uint8_t> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        std::size_t byte = static_cast<std::size_t>(i) / static_cast<std::size_t>(per_byte);
        int shift = static_cast<int>(i % per_byte) * sb;
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>((bytes[byte] >> shift) & mask);
    }
    return out;
}

std::vector<std::uint8_t> tensor_codes(const QuantizedTensor& qt) {
    return unpack_codes(qt.codes, qt.spec.bits, qt.partition.total_elements);
}

std::vector<double> reconstruct(const QuantizedTensor& qt) {
    std::vector<std::uint8_t> codes = tensor_codes(qt);
    std::vector<double> out(codes.size());
    for (std::int64_t k = 0; k < qt.partition.region_count; ++k) {
        const QuantParams& p = qt.params[static_cast<std::size_t>(k)];
        for (std::int64_t i = qt.partition.begin(k); i < qt.partition.end(k); ++i) {
            out[static_cast<std::size_t>(i)] =
                dequantize_value(codes[static_cast<std::size_t>(i)], p);
        }
    }
    return out;
}

} // namespace blq
