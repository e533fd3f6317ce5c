#ifndef BLQ_DATASET_HPP
#define BLQ_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "blq/tensor.hpp"

namespace blq {

/// A stack of sample tensors loaded from an IDX file. shape[0] is the
/// sample count; the remaining dimensions describe one sample.
struct Dataset {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    std::int64_t sample_count() const { return shape.empty() ? 0 : shape[0]; }
    std::int64_t sample_elements() const;
    /// Copy of sample i as a (c, h, w) tensor (1-d samples become (n,1,1)).
    Tensor sample(std::int64_t i) const;
};

/// Reads an IDX file: magic 0x00 0x00 <type> <ndims>, big-endian dimension
/// sizes, then raw data. Type 0x0D is 4-byte reals (little-endian payload),
/// 0x08 unsigned bytes (widened to float unchanged).
Dataset read_idx(const std::filesystem::path& path);

/// Writes a float IDX file (type 0x0D), atomically (temp file + rename).
void write_idx_float(const std::filesystem::path& path,
                     const std::vector<std::int64_t>& shape,
                     std::span<const float> data);

/// Writes a 1-D unsigned-byte IDX file (type 0x08), atomically.
void write_idx_bytes(const std::filesystem::path& path,
                     std::span<const std::uint8_t> values);

/// Reads a 1-D label file; errors unless it holds exactly `expected`
/// entries.
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path,
                                          std::int64_t expected);

/// Deterministic fixture images: a SplitMix64 stream seeded with `seed`
/// drawn as uniform floats in [-1, 1], identical bit-for-bit on every
/// platform. count >= 1.
Dataset make_fixture_dataset(std::uint64_t seed, std::int64_t count,
                             std::int64_t channels = 1, std::int64_t height = 16,
                             std::int64_t width = 16);

/// Labels companion for the fixture set: the same stream continued,
/// one value in [0, 10) per sample.
std::vector<std::uint8_t> make_fixture_labels(std::uint64_t seed, std::int64_t count,
                                              std::int64_t channels = 1,
                                              std::int64_t height = 16,
                                              std::int64_t width = 16);

/// FNV-1a 64-bit checksum, used to pin generated files.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// fnv1a64 of a file's contents.
std::uint64_t file_checksum(const std::filesystem::path& path);

/// Writes raw bytes through a temp file and rename so no failed run
/// leaves a partial output.
void atomic_write_file(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

} // namespace blq

#endif // BLQ_DATASET_HPP
