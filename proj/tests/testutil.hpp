#ifndef BLQ_TESTS_TESTUTIL_HPP
#define BLQ_TESTS_TESTUTIL_HPP

#include <cstdint>
#include <vector>

#include "blq/network.hpp"
#include "blq/rng.hpp"
#include "blq/tensor.hpp"

namespace blqtest {

inline std::vector<float> random_slice(blq::SplitMix64& rng, std::size_t n,
                                       double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(n);
    for (float& x : v) {
        x = static_cast<float>(rng.uniform(lo, hi));
    }
    return v;
}

inline blq::Tensor random_tensor(blq::SplitMix64& rng, std::vector<std::int64_t> shape,
                                 double lo = -1.0, double hi = 1.0) {
    blq::Tensor t(std::move(shape));
    for (float& x : t.data) {
        x = static_cast<float>(rng.uniform(lo, hi));
    }
    return t;
}

/// A small random conv/pool/fc stack with spatial size <= 16 and <= 8
/// channels, always ending in an fc head so outputs are class logits.
inline blq::NetworkSpec random_small_spec(blq::SplitMix64& rng) {
    using blq::LayerSpec;
    blq::NetworkSpec spec;
    spec.name = "random";
    std::int64_t c = 1 + static_cast<std::int64_t>(rng.next_below(3));
    std::int64_t hw = 6 + static_cast<std::int64_t>(rng.next_below(11)); // 6..16
    spec.input_shape = blq::Dims{c, hw, hw};
    int convs = 1 + static_cast<int>(rng.next_below(2));
    for (int i = 0; i < convs; ++i) {
        std::int64_t oc = 2 + static_cast<std::int64_t>(rng.next_below(7)); // 2..8
        std::int64_t k = 1 + 2 * static_cast<std::int64_t>(rng.next_below(2)); // 1 or 3
        std::int64_t pad = k == 3 && rng.next_below(2) ? 1 : 0;
        spec.layers.push_back(LayerSpec::conv(oc, k, 1, pad));
        if (rng.next_below(2)) {
            spec.layers.push_back(LayerSpec::relu());
        }
    }
    if (rng.next_below(2)) {
        spec.layers.push_back(LayerSpec::maxpool(2, 2));
    }
    spec.layers.push_back(LayerSpec::fc(2 + static_cast<std::int64_t>(rng.next_below(7))));
    return spec;
}

inline double max_rel_err(const blq::Tensor& a, const blq::Tensor& b) {
    double scale = 1e-12;
    for (float v : b.data) {
        scale = std::max(scale, static_cast<double>(std::abs(v)));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(a.data[i]) -
                                         static_cast<double>(b.data[i])) /
                                    scale);
    }
    return worst;
}

} // namespace blqtest

#endif // BLQ_TESTS_TESTUTIL_HPP
