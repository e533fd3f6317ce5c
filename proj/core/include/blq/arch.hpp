#ifndef BLQ_ARCH_HPP
#define BLQ_ARCH_HPP

#include <string>

#include "blq/network.hpp"

namespace blq {

/// Built-in architecture fixtures:
///   "alexnet-conv" — the five AlexNet convolution layers with channel
///                    counts adjusted so the ungrouped MAC totals equal
///                    the historical grouped network's.
///   "vgg16-conv"   — the thirteen 3x3 VGG-16 convolution layers.
///   "fixture-cnn"  — a small two-conv classifier used for desk-scale
///                    agreement experiments (< 10^4 parameters).
/// Throws DataError on unknown names.
NetworkSpec builtin_arch(const std::string& name);

} // namespace blq

#endif // BLQ_ARCH_HPP
