#include "blq/arch.hpp"

#include "blq/errors.hpp"

namespace blq {

namespace {

NetworkSpec alexnet_conv() {
    NetworkSpec s;
    s.name = "alexnet-conv";
    s.input_shape = Dims{3, 224, 224};
    // The historical network computes conv2/4/5 in two channel groups.
    // Grouped convolution is out of scope here, so those layers use
    // ungrouped channel counts chosen to keep every layer's MAC total
    // equal to the grouped original (665,784,864 in all).
    s.layers = {
        LayerSpec::conv(96, 11, 4, 2), // 55x55, reduction 363
        LayerSpec::relu(),
        LayerSpec::maxpool(3, 2), // 27x27
        LayerSpec::conv(128, 5, 1, 2),
        LayerSpec::relu(),
        LayerSpec::maxpool(3, 2), // 13x13
        LayerSpec::conv(768, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::conv(96, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::conv(512, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::maxpool(3, 2), // 6x6
    };
    return s;
}

NetworkSpec vgg16_conv() {
    NetworkSpec s;
    s.name = "vgg16-conv";
    s.input_shape = Dims{3, 224, 224};
    const std::int64_t ladder[5][3] = {
        {64, 64, 0}, {128, 128, 0}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};
    const int block_sizes[5] = {2, 2, 3, 3, 3};
    for (int b = 0; b < 5; ++b) {
        for (int i = 0; i < block_sizes[b]; ++i) {
            s.layers.push_back(LayerSpec::conv(ladder[b][i], 3, 1, 1));
            s.layers.push_back(LayerSpec::relu());
        }
        s.layers.push_back(LayerSpec::maxpool(2, 2));
    }
    return s;
}

NetworkSpec fixture_cnn() {
    NetworkSpec s;
    s.name = "fixture-cnn";
    s.input_shape = Dims{1, 16, 16};
    s.layers = {
        LayerSpec::conv(8, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::maxpool(2, 2),
        LayerSpec::conv(16, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::maxpool(2, 2),
        LayerSpec::fc(10),
        LayerSpec::softmax(),
    };
    return s;
}

} // namespace

NetworkSpec builtin_arch(const std::string& name) {
    if (name == "alexnet-conv") {
        return alexnet_conv();
    }
    if (name == "vgg16-conv") {
        return vgg16_conv();
    }
    if (name == "fixture-cnn") {
        return fixture_cnn();
    }
    throw DataError("unknown architecture '" + name +
                    "' (expected alexnet-conv, vgg16-conv or fixture-cnn)");
}

} // namespace blq
