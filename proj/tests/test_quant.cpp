#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "blq/errors.hpp"
#include "blq/quant.hpp"
#include "blq/rng.hpp"
#include "testutil.hpp"

using namespace blq;

TEST_CASE("quant_step basic values") {
    CHECK(quant_step(0, 1, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(quant_step(5, 5, 4) == 0.0);
    CHECK(quant_step(-1, 1, 8) == doctest::Approx(2.0 / 255.0));
}

TEST_CASE("quant_step rejects bad input") {
    CHECK_THROWS_AS(quant_step(0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(quant_step(0, 1, 9), std::invalid_argument);
    CHECK_THROWS_AS(quant_step(0, std::numeric_limits<double>::infinity(), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(quant_step(1, 0, 4), std::invalid_argument);
}

TEST_CASE("quantize_value rounds half away from zero and saturates") {
    QuantParams p{0.0, 1.0 / 3.0};
    CHECK(quantize_value(0.5, p, 2) == 2); // 1.5 rounds up
    CHECK(quantize_value(0.0, p, 2) == 0); // x == x_min
    CHECK(quantize_value(1.0, p, 2) == 3); // full scale
    CHECK(quantize_value(9.0, p, 2) == 3); // clamps, not an error
    CHECK(quantize_value(-9.0, p, 2) == 0);
    QuantParams degenerate{4.0, 0.0};
    CHECK(quantize_value(123.0, degenerate, 4) == 0);
    CHECK_THROWS_AS(quantize_value(std::nan(""), p, 2), NumericError);
}

TEST_CASE("dequantize_value is x_min + code*step") {
    CHECK(dequantize_value(0, QuantParams{-1.0, 0.5}) == -1.0);
    CHECK(dequantize_value(3, QuantParams{0.0, 1.0 / 3.0}) == doctest::Approx(1.0));
    CHECK(dequantize_value(2, QuantParams{0.0, 1.0 / 3.0}) == doctest::Approx(0.666667));
}

TEST_CASE("quant_error at known points") {
    QuantParams p{0.0, 1.0 / 3.0};
    // exactly representable point
    CHECK(quant_error(2.0 / 3.0, p, 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(quant_error(0.5, p, 2) == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("quant_error sweep is a sawtooth with peak step/2") {
    // Dense numeric sweep over the calibrated range, with the midpoints
    // (the sawtooth peaks) sampled explicitly.
    const int bits = 3;
    QuantParams p{-1.0, quant_step(-1.0, 1.0, bits)};
    double peak = 0.0;
    const int samples = 20000;
    for (int i = 0; i <= samples; ++i) {
        double x = -1.0 + 2.0 * i / samples;
        double e = std::abs(quant_error(x, p, bits));
        CHECK(e <= p.step / 2 + 1e-12);
        peak = std::max(peak, e);
    }
    for (int k = 0; k < (1 << bits) - 1; ++k) {
        double mid = p.x_min + (k + 0.5) * p.step;
        peak = std::max(peak, std::abs(quant_error(mid, p, bits)));
    }
    CHECK(std::abs(peak - p.step / 2) <= 1e-9);
}

TEST_CASE("fit_params uses observed range") {
    std::vector<float> single{0.2f};
    QuantParams p = fit_params(single, 4);
    CHECK(p.x_min == doctest::Approx(0.2));
    CHECK(p.step == 0.0);

    std::vector<float> three{-1.0f, 0.0f, 1.0f};
    p = fit_params(three, 2);
    CHECK(p.x_min == -1.0);
    CHECK(p.step == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(fit_params(std::vector<float>{}, 4), std::invalid_argument);
}

TEST_CASE("fit_params bounds every reconstruction error by step/2") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<float> v = blqtest::random_slice(rng, 100, -5.0, 5.0);
        int bits = 1 + static_cast<int>(rng.next_below(8));
        QuantParams p = fit_params(v, bits);
        for (float x : v) {
            CHECK(std::abs(quant_error(x, p, bits)) <= p.step / 2 + 1e-12);
        }
    }
}

TEST_CASE("quantize_global on an exactly representable slice") {
    std::vector<float> v{0.0f, 1.0f / 3.0f, 2.0f / 3.0f, 1.0f};
    QuantizedTensor qt = quantize_global(v, 2);
    CHECK(qt.partition.region_count == 1);
    CHECK(qt.partition.region_size == 4);
    CHECK(tensor_codes(qt) == std::vector<std::uint8_t>{0, 1, 2, 3});
    CHECK(qt.params[0].x_min == 0.0);
    CHECK(qt.params[0].step == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("quantize_global of a constant slice is degenerate but exact") {
    std::vector<float> v(17, 2.5f);
    QuantizedTensor qt = quantize_global(v, 3);
    CHECK(qt.params[0].step == 0.0);
    for (std::uint8_t c : tensor_codes(qt)) {
        CHECK(c == 0);
    }
    for (double r : reconstruct(qt)) {
        CHECK(r == 2.5);
    }
}

TEST_CASE("quantize_global round-trips within step/2 elementwise") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<float> v = blqtest::random_slice(rng, 64, -3.0, 3.0);
        int bits = 1 + static_cast<int>(rng.next_below(8));
        QuantizedTensor qt = quantize_global(v, bits);
        std::vector<double> r = reconstruct(qt);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(std::abs(v[i] - r[i]) <= qt.params[0].step / 2 + 1e-12);
        }
    }
}

TEST_CASE("quantize_local region_size N matches quantize_global bitwise") {
    SplitMix64 rng(11);
    std::vector<float> v = blqtest::random_slice(rng, 37);
    CHECK(quantize_local(v, 4, 37) == quantize_global(v, 4));
}

TEST_CASE("quantize_local region_size 1 reconstructs exactly") {
    SplitMix64 rng(13);
    std::vector<float> v = blqtest::random_slice(rng, 24);
    QuantizedTensor qt = quantize_local(v, 2, 1);
    std::vector<double> r = reconstruct(qt);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(r[i] == static_cast<double>(v[i]));
    }
}

TEST_CASE("quantize_local separates disjoint clusters") {
    std::vector<float> v{0.0f, 0.1f, 10.0f, 10.3f};
    QuantizedTensor qt = quantize_local(v, 2, 2);
    CHECK(qt.partition.region_count == 2);
    CHECK(qt.params[0].step == doctest::Approx(0.1 / 3.0));
    CHECK(qt.params[1].step == doctest::Approx(0.3 / 3.0));
    double global_step = quantize_global(v, 2).params[0].step;
    CHECK(global_step == doctest::Approx(10.3 / 3.0));
    CHECK(qt.params[0].step < global_step / 10);
    CHECK(qt.params[1].step < global_step / 10);
}

TEST_CASE("quantize_local rejects region_size < 1") {
    std::vector<float> v{1.0f, 2.0f};
    CHECK_THROWS_AS(quantize_local(v, 4, 0), std::invalid_argument);
}

TEST_CASE("region partition tiles contiguously with a short tail") {
    RegionPartition part(4, 10);
    CHECK(part.region_count == 3);
    CHECK(part.begin(0) == 0);
    CHECK(part.end(0) == 4);
    CHECK(part.begin(2) == 8);
    CHECK(part.end(2) == 10);
}

TEST_CASE("local region steps never exceed the global step") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.next_below(64);
        std::vector<float> v = blqtest::random_slice(rng, n, -4.0, 4.0);
        int bits = 1 + static_cast<int>(rng.next_below(8));
        double global_step = quantize_global(v, bits).params[0].step;
        std::int64_t r = 1 + static_cast<std::int64_t>(rng.next_below(n - 1));
        QuantizedTensor qt = quantize_local(v, bits, r);
        for (const QuantParams& p : qt.params) {
            CHECK(p.step <= global_step + 1e-15);
        }
    }
}

TEST_CASE("halving the region size never increases the reconstruction error bound") {
    // Exact halving keeps every region nested inside its parent, so each
    // element's observed range shrinks or stays equal and the sawtooth
    // peak (max region step / 2) is non-increasing; the chain
    // N, N/2, ..., 1 therefore uses power-of-two lengths. The realized
    // per-slice max error is *not* monotone (a value can sit on a grid
    // line at one size and mid-cell at the next) but always stays inside
    // the bound.
    SplitMix64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = std::size_t{1} << (3 + rng.next_below(5));
        std::vector<float> v = blqtest::random_slice(rng, n, -2.0, 2.0);
        int bits = 1 + static_cast<int>(rng.next_below(4));
        double prev_bound = std::numeric_limits<double>::infinity();
        for (std::int64_t r = static_cast<std::int64_t>(n); r >= 1; r /= 2) {
            QuantizedTensor qt = quantize_local(v, bits, r);
            double bound = 0.0;
            for (const QuantParams& p : qt.params) {
                bound = std::max(bound, p.step / 2);
            }
            std::vector<double> rec = reconstruct(qt);
            double worst = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                worst = std::max(worst, std::abs(v[i] - rec[i]));
            }
            CHECK(worst <= bound + 1e-12);
            CHECK(bound <= prev_bound + 1e-15);
            prev_bound = bound;
        }
    }
}

TEST_CASE("pack_codes bit layout is little-endian within each byte") {
    std::vector<std::uint8_t> codes{1, 2, 3, 0};
    std::vector<std::uint8_t> packed = pack_codes(codes, 2);
    REQUIRE(packed.size() == 1);
    CHECK(packed[0] == 0x39);

    std::vector<std::uint8_t> ones(8, 1);
    packed = pack_codes(ones, 1);
    REQUIRE(packed.size() == 1);
    CHECK(packed[0] == 0xFF);
}

TEST_CASE("six-bit codes store one per byte") {
    CHECK(storage_bits(6) == 8);
    CHECK(storage_bits(3) == 8);
    CHECK(storage_bits(4) == 4);
    std::vector<std::uint8_t> codes{63, 0, 17};
    std::vector<std::uint8_t> packed = pack_codes(codes, 6);
    CHECK(packed == codes);
}

TEST_CASE("pack_codes rejects overflowing codes") {
    std::vector<std::uint8_t> codes{4};
    CHECK_THROWS_AS(pack_codes(codes, 2), NumericError);
}

TEST_CASE("pack/unpack round-trips every width and length") {
    SplitMix64 rng(23);
    for (int bits : {1, 2, 3, 4, 5, 6, 7, 8}) {
        for (std::size_t len = 0; len <= 64; ++len) {
            std::vector<std::uint8_t> codes(len);
            for (auto& c : codes) {
                c = static_cast<std::uint8_t>(rng.next_below(1ull << bits));
            }
            std::vector<std::uint8_t> packed = pack_codes(codes, bits);
            CHECK(unpack_codes(packed, bits, static_cast<std::int64_t>(len)) == codes);
        }
    }
}
