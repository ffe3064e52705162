#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scnet/data.hpp"
#include "scnet/error.hpp"
#include "scnet/rng.hpp"

namespace scnet {

// Synthetic image corpus in canonical IDX layout, for hermetic experiments
// when the real MNIST files are not on disk. Each class is a fixed prototype
// of Gaussian intensity bumps; samples add pixel noise. Classes are assigned
// round-robin so the split is balanced. Deterministic by seed.
struct MnistLikeSpec {
    std::size_t train_count = 60000;
    std::size_t test_count = 10000;
    std::size_t rows = 28;
    std::size_t cols = 28;
    std::size_t classes = 10;
    std::uint64_t seed = 1;
    double noise = 90.0;  // uniform pixel noise amplitude, 0..255 scale
};

namespace datagen_detail {

inline std::vector<double> class_prototype(const MnistLikeSpec& spec, std::size_t cls) {
    Rng rng(derive_seed(spec.seed, 0xc1a5500ULL + cls));
    std::vector<double> proto(spec.rows * spec.cols, 0.0);
    const double lo_r = spec.rows * 0.15, hi_r = spec.rows * 0.85;
    const double lo_c = spec.cols * 0.15, hi_c = spec.cols * 0.85;
    for (int bump = 0; bump < 3; ++bump) {
        const double cy = rng.uniform(lo_r, hi_r);
        const double cx = rng.uniform(lo_c, hi_c);
        const double amp = rng.uniform(120.0, 220.0);
        const double sigma = rng.uniform(0.08, 0.16) * double(spec.rows);
        for (std::size_t y = 0; y < spec.rows; ++y) {
            for (std::size_t x = 0; x < spec.cols; ++x) {
                const double dy = double(y) - cy;
                const double dx = double(x) - cx;
                proto[y * spec.cols + x] +=
                    amp * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            }
        }
    }
    for (double& v : proto) v = std::min(v, 255.0);
    return proto;
}

inline void render_split(const MnistLikeSpec& spec,
                         const std::vector<std::vector<double>>& protos, std::size_t count,
                         std::uint64_t stream, std::vector<unsigned char>& pixels,
                         std::vector<unsigned char>& labels) {
    Rng rng(derive_seed(spec.seed, stream));
    const std::size_t features = spec.rows * spec.cols;
    pixels.resize(count * features);
    labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t cls = i % spec.classes;
        labels[i] = static_cast<unsigned char>(cls);
        const std::vector<double>& proto = protos[cls];
        unsigned char* out = pixels.data() + i * features;
        for (std::size_t p = 0; p < features; ++p) {
            const double v = proto[p] + rng.uniform(-spec.noise, spec.noise);
            out[p] = static_cast<unsigned char>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    }
}

}  // namespace datagen_detail

// Writes the four canonical files (train-images-idx3-ubyte, ...) under dir.
inline void write_mnist_like(const std::string& dir, const MnistLikeSpec& spec = {}) {
    if (spec.classes < 1 || spec.classes > 256) {
        throw ConfigError("write_mnist_like: classes must be in 1..256, got " +
                          std::to_string(spec.classes));
    }
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> protos;
    for (std::size_t c = 0; c < spec.classes; ++c)
        protos.push_back(datagen_detail::class_prototype(spec, c));

    std::vector<unsigned char> pixels, labels;
    datagen_detail::render_split(spec, protos, spec.train_count, 0x7121a11, pixels, labels);
    idx::write_images(dir + "/train-images-idx3-ubyte", spec.train_count, spec.rows, spec.cols,
                      pixels);
    idx::write_labels(dir + "/train-labels-idx1-ubyte", labels);
    datagen_detail::render_split(spec, protos, spec.test_count, 0x7e57a11, pixels, labels);
    idx::write_images(dir + "/t10k-images-idx3-ubyte", spec.test_count, spec.rows, spec.cols,
                      pixels);
    idx::write_labels(dir + "/t10k-labels-idx1-ubyte", labels);
}

}  // namespace scnet
