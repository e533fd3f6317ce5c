#include "blq/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "blq/errors.hpp"
#include "blq/rng.hpp"

namespace blq {

namespace {

constexpr std::uint8_t kIdxFloat = 0x0D;
constexpr std::uint8_t kIdxUByte = 0x08;

void append_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_u32_be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    in.seekg(0, std::ios::end);
    std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (size > 0) {
        in.read(reinterpret_cast<char*>(bytes.data()), size);
    }
    if (!in) {
        throw DataError("failed to read file: " + path.string());
    }
    return bytes;
}

std::vector<std::uint8_t> idx_header(std::uint8_t type,
                                     const std::vector<std::int64_t>& shape) {
    std::vector<std::uint8_t> out;
    out.push_back(0x00);
    out.push_back(0x00);
    out.push_back(type);
    out.push_back(static_cast<std::uint8_t>(shape.size()));
    for (std::int64_t d : shape) {
        append_u32_be(out, static_cast<std::uint32_t>(d));
    }
    return out;
}

} // namespace

void atomic_write_file(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot open file for writing: " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw DataError("failed to write file: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::int64_t Dataset::sample_elements() const {
    if (shape.size() < 2) {
        return shape.size() == 1 ? 1 : 0;
    }
    std::int64_t n = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) {
        n *= shape[i];
    }
    return n;
}

Tensor Dataset::sample(std::int64_t i) const {
    if (i < 0 || i >= sample_count()) {
        throw std::out_of_range("sample index out of range");
    }
    std::vector<std::int64_t> s;
    if (shape.size() == 4) {
        s = {shape[1], shape[2], shape[3]};
    } else if (shape.size() == 3) {
        s = {std::int64_t{1}, shape[1], shape[2]};
    } else {
        s = {sample_elements(), 1, 1};
    }
    std::int64_t n = sample_elements();
    Tensor t(s);
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(i * n),
              data.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), t.data.begin());
    return t;
}

Dataset read_idx(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() < 4 || bytes[0] != 0x00 || bytes[1] != 0x00) {
        throw DataError("not an IDX file: " + path.string());
    }
    std::uint8_t type = bytes[2];
    std::size_t ndims = bytes[3];
    if (ndims == 0) {
        throw DataError("IDX file with zero dimensions: " + path.string());
    }
    if (bytes.size() < 4 + 4 * ndims) {
        throw DataError("IDX header truncated: " + path.string());
    }
    Dataset ds;
    std::int64_t elements = 1;
    for (std::size_t d = 0; d < ndims; ++d) {
        std::uint32_t v = read_u32_be(bytes.data() + 4 + 4 * d);
        ds.shape.push_back(static_cast<std::int64_t>(v));
        elements *= static_cast<std::int64_t>(v);
    }
    const std::uint8_t* payload = bytes.data() + 4 + 4 * ndims;
    std::size_t available = bytes.size() - (4 + 4 * ndims);
    ds.data.resize(static_cast<std::size_t>(elements));
    if (type == kIdxFloat) {
        std::size_t expected = static_cast<std::size_t>(elements) * 4;
        if (available != expected) {
            throw DataError("IDX payload size mismatch in " + path.string() +
                            ": expected " + std::to_string(expected) + " bytes, got " +
                            std::to_string(available));
        }
        std::memcpy(ds.data.data(), payload, expected);
    } else if (type == kIdxUByte) {
        if (available != static_cast<std::size_t>(elements)) {
            throw DataError("IDX payload size mismatch in " + path.string() +
                            ": expected " + std::to_string(elements) + " bytes, got " +
                            std::to_string(available));
        }
        for (std::int64_t i = 0; i < elements; ++i) {
            ds.data[static_cast<std::size_t>(i)] =
                static_cast<float>(payload[static_cast<std::size_t>(i)]);
        }
    } else {
        throw DataError("unsupported IDX element type " + std::to_string(type) +
                        " in " + path.string());
    }
    return ds;
}

void write_idx_float(const std::filesystem::path& path,
                     const std::vector<std::int64_t>& shape,
                     std::span<const float> data) {
    if (static_cast<std::int64_t>(data.size()) != shape_elements(shape)) {
        throw std::invalid_argument("IDX data length does not match shape");
    }
    std::vector<std::uint8_t> out = idx_header(kIdxFloat, shape);
    std::size_t header = out.size();
    out.resize(header + data.size() * 4);
    std::memcpy(out.data() + header, data.data(), data.size() * 4);
    atomic_write_file(path, out);
}

void write_idx_bytes(const std::filesystem::path& path,
                     std::span<const std::uint8_t> values) {
    std::vector<std::int64_t> shape{static_cast<std::int64_t>(values.size())};
    std::vector<std::uint8_t> out = idx_header(kIdxUByte, shape);
    out.insert(out.end(), values.begin(), values.end());
    atomic_write_file(path, out);
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path,
                                          std::int64_t expected) {
    Dataset ds = read_idx(path);
    if (ds.shape.size() != 1 || ds.sample_count() != expected) {
        throw DataError("label file " + path.string() + " must hold exactly " +
                        std::to_string(expected) + " 1-D entries");
    }
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(expected));
    for (std::int64_t i = 0; i < expected; ++i) {
        labels[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(ds.data[static_cast<std::size_t>(i)]);
    }
    return labels;
}

Dataset make_fixture_dataset(std::uint64_t seed, std::int64_t count,
                             std::int64_t channels, std::int64_t height,
                             std::int64_t width) {
    if (count < 1) {
        throw std::invalid_argument("fixture dataset count must be >= 1");
    }
    Dataset ds;
    ds.shape = {count, channels, height, width};
    ds.data.resize(static_cast<std::size_t>(shape_elements(ds.shape)));
    SplitMix64 rng(seed);
    for (float& v : ds.data) {
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return ds;
}

std::vector<std::uint8_t> make_fixture_labels(std::uint64_t seed, std::int64_t count,
                                              std::int64_t channels, std::int64_t height,
                                              std::int64_t width) {
    if (count < 1) {
        throw std::invalid_argument("fixture dataset count must be >= 1");
    }
    // Continues the image stream so (images, labels) form one sequence.
    SplitMix64 rng(seed);
    std::int64_t image_values = count * channels * height * width;
    for (std::int64_t i = 0; i < image_values; ++i) {
        rng.next_u64();
    }
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(count));
    for (auto& l : labels) {
        l = static_cast<std::uint8_t>(rng.next_below(10));
    }
    return labels;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x00000100000001B3ull;
    }
    return h;
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes = read_file(path);
    return fnv1a64(bytes);
}

} // namespace blq
