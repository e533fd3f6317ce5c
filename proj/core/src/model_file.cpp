#include "blq/model_file.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "blq/dataset.hpp"
#include "blq/errors.hpp"

namespace blq {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'B', 'L', 'Q', 'M'};
constexpr std::uint16_t kVersion = 1;

json layer_to_json(const LayerSpec& l) {
    switch (l.kind) {
    case LayerKind::Convolution:
        return json{{"type", "conv"},
                    {"out_channels", l.out_channels},
                    {"kernel_h", l.kernel_h},
                    {"kernel_w", l.kernel_w},
                    {"stride", l.stride},
                    {"padding", l.padding}};
    case LayerKind::FullyConnected:
        return json{{"type", "fc"}, {"out_features", l.out_features}};
    case LayerKind::ReLU:
        return json{{"type", "relu"}};
    case LayerKind::Sigmoid:
        return json{{"type", "sigmoid"}};
    case LayerKind::MaxPool:
        return json{{"type", "maxpool"}, {"window", l.window}, {"stride", l.pool_stride}};
    case LayerKind::Softmax:
        return json{{"type", "softmax"}};
    }
    throw std::logic_error("unreachable layer kind");
}

LayerSpec layer_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "conv") {
        LayerSpec l;
        l.kind = LayerKind::Convolution;
        l.out_channels = j.at("out_channels").get<std::int64_t>();
        l.kernel_h = j.at("kernel_h").get<std::int64_t>();
        l.kernel_w = j.at("kernel_w").get<std::int64_t>();
        l.stride = j.at("stride").get<std::int64_t>();
        l.padding = j.at("padding").get<std::int64_t>();
        return l;
    }
    if (type == "fc") {
        return LayerSpec::fc(j.at("out_features").get<std::int64_t>());
    }
    if (type == "relu") {
        return LayerSpec::relu();
    }
    if (type == "sigmoid") {
        return LayerSpec::sigmoid();
    }
    if (type == "maxpool") {
        return LayerSpec::maxpool(j.at("window").get<std::int64_t>(),
                                  j.at("stride").get<std::int64_t>());
    }
    if (type == "softmax") {
        return LayerSpec::softmax();
    }
    throw DataError("unknown layer type '" + type + "' in model header");
}

json spec_to_json(const NetworkSpec& spec) {
    json layers = json::array();
    for (const LayerSpec& l : spec.layers) {
        layers.push_back(layer_to_json(l));
    }
    return json{{"name", spec.name},
                {"input_shape", {spec.input_shape.c, spec.input_shape.h, spec.input_shape.w}},
                {"layers", layers}};
}

NetworkSpec spec_from_json(const json& j) {
    NetworkSpec spec;
    spec.name = j.at("name").get<std::string>();
    const json& shape = j.at("input_shape");
    if (!shape.is_array() || shape.size() != 3) {
        throw DataError("model header input_shape must have 3 entries");
    }
    spec.input_shape = Dims{shape[0].get<std::int64_t>(), shape[1].get<std::int64_t>(),
                            shape[2].get<std::int64_t>()};
    for (const json& l : j.at("layers")) {
        spec.layers.push_back(layer_from_json(l));
    }
    return spec;
}

struct Writer {
    std::vector<std::uint8_t> bytes;

    void raw(const void* p, std::size_t n) {
        const std::uint8_t* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void u16le(std::uint16_t v) {
        bytes.push_back(static_cast<std::uint8_t>(v));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32le(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void f32le(float v) {
        static_assert(sizeof(float) == 4);
        raw(&v, 4);
    }
    void f64le(double v) {
        static_assert(sizeof(double) == 8);
        raw(&v, 8);
    }
    void i32le(std::int32_t v) {
        raw(&v, 4);
    }
};

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;
    const std::string& origin;

    void need(std::size_t n, const char* what) {
        if (bytes.size() - pos < n) {
            throw DataError(origin + ": truncated while reading " + std::string(what) +
                            ": expected " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos) + ", got " +
                            std::to_string(bytes.size() - pos));
        }
    }
    const std::uint8_t* take(std::size_t n, const char* what) {
        need(n, what);
        const std::uint8_t* p = bytes.data() + pos;
        pos += n;
        return p;
    }
    std::uint16_t u16le(const char* what) {
        const std::uint8_t* p = take(2, what);
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32le(const char* what) {
        const std::uint8_t* p = take(4, what);
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) |
               (static_cast<std::uint32_t>(p[3]) << 24);
    }
    float f32le(const char* what) {
        float v;
        std::memcpy(&v, take(4, what), 4);
        return v;
    }
    double f64le(const char* what) {
        double v;
        std::memcpy(&v, take(8, what), 8);
        return v;
    }
    std::int32_t i32le(const char* what) {
        std::int32_t v;
        std::memcpy(&v, take(4, what), 4);
        return v;
    }
};

const char* kind_name(ModelKind k) {
    switch (k) {
    case ModelKind::Fp32:
        return "fp32";
    case ModelKind::Quantized:
        return "quantized";
    case ModelKind::Lut:
        return "lut";
    }
    throw std::logic_error("unreachable model kind");
}

std::int64_t row_code_bytes(std::int64_t reduction, int bits) {
    int per_byte = 8 / storage_bits(bits);
    return (reduction + per_byte - 1) / per_byte;
}

// Per-layer geometry shared by save and load.
struct LayerShape {
    std::int64_t rows;
    std::int64_t reduction;
};

std::vector<LayerShape> weight_layer_shapes(const NetworkSpec& spec) {
    std::vector<Dims> dims = chain_dims(spec);
    std::vector<LayerShape> out;
    Dims in = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.is_weight_layer()) {
            out.push_back({dims[i].c, reduction_length(l, in)});
        }
        in = dims[i];
    }
    return out;
}

json quant_to_json(const QuantizedNetwork& q) {
    return json{{"mode", q.mode == QuantMode::WeightOnly ? "w" : "wa"},
                {"weight_bits", q.weight_bits},
                {"weight_region_size", q.weight_region_size},
                {"activation_bits", q.activation_bits},
                {"activation_region_size", q.activation_region_size}};
}

} // namespace

ModelKind Model::kind() const {
    if (std::holds_alternative<Fp32Network>(net)) {
        return ModelKind::Fp32;
    }
    if (std::holds_alternative<QuantizedNetwork>(net)) {
        return ModelKind::Quantized;
    }
    return ModelKind::Lut;
}

const NetworkSpec& Model::spec() const {
    if (const auto* f = std::get_if<Fp32Network>(&net)) {
        return f->spec;
    }
    if (const auto* q = std::get_if<QuantizedNetwork>(&net)) {
        return q->spec;
    }
    return std::get<LutNetwork>(net).base.spec;
}

Tensor forward_model(const Model& model, const Tensor& input,
                     std::vector<Tensor>* capture) {
    if (const auto* f = std::get_if<Fp32Network>(&model.net)) {
        return forward_fp32(*f, input, capture);
    }
    if (const auto* q = std::get_if<QuantizedNetwork>(&model.net)) {
        return forward_lq(*q, input, capture);
    }
    return forward_lut(std::get<LutNetwork>(model.net), input, capture);
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
    const NetworkSpec& spec = model.spec();
    std::vector<LayerShape> shapes = weight_layer_shapes(spec);

    json header;
    header["kind"] = kind_name(model.kind());
    header["network"] = spec_to_json(spec);

    const QuantizedNetwork* qnet = nullptr;
    const LutNetwork* lut = nullptr;
    if (const auto* q = std::get_if<QuantizedNetwork>(&model.net)) {
        qnet = q;
    } else if (const auto* l = std::get_if<LutNetwork>(&model.net)) {
        lut = l;
        qnet = &l->base;
    }
    if (qnet) {
        header["quant"] = quant_to_json(*qnet);
    }
    if (lut) {
        header["lut"] = json{{"activation_bits", lut->cfg.activation_bits},
                             {"group_size", lut->cfg.group_size},
                             {"region_size", lut->cfg.region_size}};
    }

    // Payload blobs, with declared byte counts in the header.
    Writer payload;
    json payload_index = json::array();
    for (std::size_t wi = 0; wi < shapes.size(); ++wi) {
        const LayerShape& ls = shapes[wi];
        json entry{{"layer", wi}};
        if (const auto* f = std::get_if<Fp32Network>(&model.net)) {
            const WeightBlob& blob = f->weights[wi];
            if (blob.weights.shape[0] != ls.rows || blob.weights.shape[1] != ls.reduction) {
                throw DataError("model weights do not match the network shape chain");
            }
            std::size_t before = payload.bytes.size();
            for (float v : blob.weights.data) {
                payload.f32le(v);
            }
            entry["weights_bytes"] = payload.bytes.size() - before;
            before = payload.bytes.size();
            for (float v : blob.bias) {
                payload.f32le(v);
            }
            entry["bias_bytes"] = payload.bytes.size() - before;
        } else {
            const QuantizedLayer& ql = qnet->layers[wi];
            if (static_cast<std::int64_t>(ql.rows.size()) != ls.rows ||
                ql.reduction != ls.reduction) {
                throw DataError("quantized layer does not match the network shape chain");
            }
            std::int64_t expect_r = qnet->weight_region_size == 0
                                        ? ls.reduction
                                        : qnet->weight_region_size;
            std::size_t before = payload.bytes.size();
            for (const QuantizedTensor& row : ql.rows) {
                if (row.partition.region_size != expect_r ||
                    row.spec.bits != qnet->weight_bits) {
                    throw DataError("quantized rows do not match the declared settings");
                }
                for (const QuantParams& p : row.params) {
                    payload.f64le(p.x_min);
                    payload.f64le(p.step);
                }
            }
            entry["params_bytes"] = payload.bytes.size() - before;
            before = payload.bytes.size();
            for (const QuantizedTensor& row : ql.rows) {
                payload.raw(row.codes.data(), row.codes.size());
            }
            entry["codes_bytes"] = payload.bytes.size() - before;
            if (lut) {
                before = payload.bytes.size();
                for (const LookupTable& t : lut->layers[wi].tables) {
                    for (std::int32_t e : t.entries) {
                        payload.i32le(e);
                    }
                }
                entry["tables_bytes"] = payload.bytes.size() - before;
            }
            before = payload.bytes.size();
            for (float v : ql.bias) {
                payload.f32le(v);
            }
            entry["bias_bytes"] = payload.bytes.size() - before;
        }
        payload_index.push_back(entry);
    }
    header["payload"] = payload_index;

    std::string header_str = header.dump();
    Writer out;
    out.raw(kMagic, 4);
    out.u16le(kVersion);
    out.u32le(static_cast<std::uint32_t>(header_str.size()));
    out.raw(header_str.data(), header_str.size());
    out.raw(payload.bytes.data(), payload.bytes.size());
    return out.bytes;
}

Model parse_model(std::span<const std::uint8_t> bytes, const std::string& origin) {
    Reader r{bytes, 0, origin};
    const std::uint8_t* magic = r.take(4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError(origin + ": bad magic, not a BLQM model file");
    }
    std::uint16_t version = r.u16le("version");
    if (version != kVersion) {
        throw DataError(origin + ": unsupported model version " + std::to_string(version) +
                        " (expected " + std::to_string(kVersion) + ")");
    }
    std::uint32_t header_len = r.u32le("header length");
    const std::uint8_t* header_bytes = r.take(header_len, "header");

    json header;
    try {
        header = json::parse(header_bytes, header_bytes + header_len);
    } catch (const json::parse_error& e) {
        throw DataError(origin + ": malformed header JSON: " + e.what());
    }

    NetworkSpec spec;
    std::string kind;
    try {
        spec = spec_from_json(header.at("network"));
        kind = header.at("kind").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError(origin + ": invalid header: " + e.what());
    }
    std::vector<LayerShape> shapes = weight_layer_shapes(spec); // validates the chain

    auto payload_field = [&](std::size_t wi, const char* key) -> std::int64_t {
        try {
            return header.at("payload").at(wi).at(key).get<std::int64_t>();
        } catch (const json::exception&) {
            throw DataError(origin + ": payload index missing '" + key + "' for layer " +
                            std::to_string(wi));
        }
    };
    auto check_declared = [&](std::size_t wi, const char* key, std::int64_t actual) {
        std::int64_t declared = payload_field(wi, key);
        if (declared != actual) {
            throw DataError(origin + ": layer " + std::to_string(wi) + " " + key +
                            " mismatch: header declares " + std::to_string(declared) +
                            " bytes, layout requires " + std::to_string(actual));
        }
    };

    Model model;
    if (kind == "fp32") {
        Fp32Network net;
        net.spec = spec;
        for (std::size_t wi = 0; wi < shapes.size(); ++wi) {
            const LayerShape& ls = shapes[wi];
            WeightBlob blob;
            blob.weights = Tensor({ls.rows, ls.reduction});
            check_declared(wi, "weights_bytes", ls.rows * ls.reduction * 4);
            for (float& v : blob.weights.data) {
                v = r.f32le("weights");
            }
            check_declared(wi, "bias_bytes", ls.rows * 4);
            blob.bias.resize(static_cast<std::size_t>(ls.rows));
            for (float& v : blob.bias) {
                v = r.f32le("bias");
            }
            net.weights.push_back(std::move(blob));
        }
        model.net = std::move(net);
    } else if (kind == "quantized" || kind == "lut") {
        QuantizedNetwork qnet;
        qnet.spec = spec;
        try {
            const json& q = header.at("quant");
            std::string mode = q.at("mode").get<std::string>();
            if (mode != "w" && mode != "wa") {
                throw DataError(origin + ": unknown quantization mode '" + mode + "'");
            }
            qnet.mode = mode == "wa" ? QuantMode::WeightAndActivation
                                     : QuantMode::WeightOnly;
            qnet.weight_bits = q.at("weight_bits").get<int>();
            qnet.weight_region_size = q.at("weight_region_size").get<std::int64_t>();
            qnet.activation_bits = q.at("activation_bits").get<int>();
            qnet.activation_region_size = q.at("activation_region_size").get<std::int64_t>();
        } catch (const json::exception& e) {
            throw DataError(origin + ": invalid quant header: " + e.what());
        }
        LutConfig cfg;
        if (kind == "lut") {
            try {
                const json& l = header.at("lut");
                cfg.activation_bits = l.at("activation_bits").get<int>();
                cfg.group_size = l.at("group_size").get<std::int64_t>();
                cfg.region_size = l.at("region_size").get<std::int64_t>();
            } catch (const json::exception& e) {
                throw DataError(origin + ": invalid lut header: " + e.what());
            }
            cfg.validate();
        }

        std::vector<LutLayer> lut_layers;
        for (std::size_t wi = 0; wi < shapes.size(); ++wi) {
            const LayerShape& ls = shapes[wi];
            std::int64_t reg = qnet.weight_region_size == 0 ? ls.reduction
                                                            : qnet.weight_region_size;
            RegionPartition part(reg, ls.reduction);
            QuantizedLayer ql;
            check_declared(wi, "params_bytes", ls.rows * part.region_count * 16);
            std::vector<std::vector<QuantParams>> params(
                static_cast<std::size_t>(ls.rows));
            for (std::int64_t o = 0; o < ls.rows; ++o) {
                auto& pv = params[static_cast<std::size_t>(o)];
                pv.resize(static_cast<std::size_t>(part.region_count));
                for (QuantParams& p : pv) {
                    p.x_min = r.f64le("params");
                    p.step = r.f64le("params");
                }
            }
            std::int64_t rb = row_code_bytes(ls.reduction, qnet.weight_bits);
            check_declared(wi, "codes_bytes", ls.rows * rb);
            for (std::int64_t o = 0; o < ls.rows; ++o) {
                QuantizedTensor qt;
                qt.spec = QuantSpec{qnet.weight_bits, Rounding::HalfAwayFromZero};
                qt.partition = part;
                qt.params = std::move(params[static_cast<std::size_t>(o)]);
                const std::uint8_t* p = r.take(static_cast<std::size_t>(rb), "codes");
                qt.codes.assign(p, p + rb);
                ql.rows.push_back(std::move(qt));
            }
            if (kind == "lut") {
                std::int64_t groups = (ls.reduction + cfg.group_size - 1) / cfg.group_size;
                std::int64_t entries_total = 0;
                for (std::int64_t g = 0; g < groups; ++g) {
                    std::int64_t width =
                        std::min(cfg.group_size, ls.reduction - g * cfg.group_size);
                    entries_total += std::int64_t{1} << (width * cfg.activation_bits);
                }
                check_declared(wi, "tables_bytes", ls.rows * entries_total * 4);
                LutLayer ll;
                ll.group_count = groups;
                for (std::int64_t o = 0; o < ls.rows; ++o) {
                    for (std::int64_t g = 0; g < groups; ++g) {
                        std::int64_t width =
                            std::min(cfg.group_size, ls.reduction - g * cfg.group_size);
                        LookupTable t;
                        t.width = width;
                        t.entries.resize(static_cast<std::size_t>(
                            std::int64_t{1} << (width * cfg.activation_bits)));
                        for (std::int32_t& e : t.entries) {
                            e = r.i32le("table entries");
                        }
                        ll.tables.push_back(std::move(t));
                    }
                }
                lut_layers.push_back(std::move(ll));
            }
            check_declared(wi, "bias_bytes", ls.rows * 4);
            ql.bias.resize(static_cast<std::size_t>(ls.rows));
            for (float& v : ql.bias) {
                v = r.f32le("bias");
            }
            ql.rebuild_caches();
            qnet.layers.push_back(std::move(ql));
        }

        if (kind == "lut") {
            LutNetwork lnet;
            // Fill the derived group code sums from the codes.
            for (std::size_t wi = 0; wi < lut_layers.size(); ++wi) {
                LutLayer& ll = lut_layers[wi];
                const QuantizedLayer& ql = qnet.layers[wi];
                std::int64_t red = ql.reduction;
                for (std::int64_t o = 0; o < static_cast<std::int64_t>(ql.rows.size()); ++o) {
                    for (std::int64_t g = 0; g < ll.group_count; ++g) {
                        LookupTable& t = ll.tables[static_cast<std::size_t>(
                            o * ll.group_count + g)];
                        std::int64_t b = g * cfg.group_size;
                        std::int64_t e = std::min(b + cfg.group_size, red);
                        std::int64_t sum = 0;
                        for (std::int64_t j = b; j < e; ++j) {
                            sum += ql.codes[static_cast<std::size_t>(o * red + j)];
                        }
                        t.wcode_sum = sum;
                    }
                }
            }
            lnet.base = std::move(qnet);
            lnet.cfg = cfg;
            lnet.layers = std::move(lut_layers);
            model.net = std::move(lnet);
        } else {
            model.net = std::move(qnet);
        }
    } else {
        throw DataError(origin + ": unknown model kind '" + kind + "'");
    }

    if (r.pos != bytes.size()) {
        throw DataError(origin + ": trailing payload: expected " + std::to_string(r.pos) +
                        " bytes total, file has " + std::to_string(bytes.size()));
    }
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes = serialize_model(model);
    atomic_write_file(path, bytes);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model file: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_model(bytes, path.string());
}

} // namespace blq
