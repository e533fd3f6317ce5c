#ifndef BLQ_MODEL_FILE_HPP
#define BLQ_MODEL_FILE_HPP

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "blq/forward.hpp"
#include "blq/lut.hpp"
#include "blq/network.hpp"

namespace blq {

enum class ModelKind : std::uint8_t { Fp32, Quantized, Lut };

/// A network in one of its three executable forms. The file format is
/// "BLQM" + version (u16 LE) + header length (u32 LE) + canonical JSON
/// header + payload blobs in layer order (weights as 4-byte LE reals, or
/// per-region (x_min, step) pairs as 8-byte LE reals plus packed codes,
/// plus 4-byte LE signed table entries for lookup models). Serialization
/// is canonical: save(load(f)) reproduces f byte for byte.
struct Model {
    std::variant<Fp32Network, QuantizedNetwork, LutNetwork> net;

    ModelKind kind() const;
    const NetworkSpec& spec() const;
};

/// Runs the pass encoded in the model: FP32 reference, quantized direct,
/// or table-driven.
Tensor forward_model(const Model& model, const Tensor& input,
                     std::vector<Tensor>* capture = nullptr);

std::vector<std::uint8_t> serialize_model(const Model& model);
Model parse_model(std::span<const std::uint8_t> bytes, const std::string& origin);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

} // namespace blq

#endif // BLQ_MODEL_FILE_HPP
