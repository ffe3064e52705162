#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "scnet/error.hpp"
#include "scnet/matrix.hpp"
#include "scnet/rng.hpp"

namespace scnet {

// Supervised dataset: inputs normalized to [0,1], targets one-hot rows.
struct Dataset {
    Matrix inputs;   // samples x features
    Matrix targets;  // samples x class_count
    std::size_t class_count = 0;

    std::size_t sample_count() const { return inputs.rows; }
    std::size_t feature_count() const { return inputs.cols; }
};

// Index of the largest entry; ties break toward the lowest index.
inline std::size_t argmax_row(const Matrix& m, std::size_t row) {
    const double* r = m.row_ptr(row);
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols; ++j)
        if (r[j] > r[best]) best = j;
    return best;
}

// ---------------------------------------------------------------------------
// IDX binary format (canonical MNIST distribution): big-endian u32 magic,
// big-endian u32 dimension sizes, then raw unsigned bytes.
//   images: magic 0x00000803, dims (count, rows, cols)
//   labels: magic 0x00000801, dims (count)
// ---------------------------------------------------------------------------

namespace idx {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

inline std::uint32_t read_u32_be(std::istream& in, std::size_t offset, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (in.gcount() != 4) {
        throw ParseError(path + ": truncated at offset " + std::to_string(offset) +
                         " while reading a 32-bit field");
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

inline void write_u32_be(std::ostream& out, std::uint32_t v) {
    const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

inline std::string hex(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
    return s;
}

struct Images {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<unsigned char> pixels;  // count * rows * cols
};

inline Images read_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    const std::uint32_t magic = read_u32_be(in, 0, path);
    if (magic != kImageMagic) {
        throw ParseError(path + ": bad magic " + hex(magic) + " at offset 0 (expected " +
                         hex(kImageMagic) + ")");
    }
    Images img;
    img.count = read_u32_be(in, 4, path);
    img.rows = read_u32_be(in, 8, path);
    img.cols = read_u32_be(in, 12, path);
    const std::size_t payload = img.count * img.rows * img.cols;
    img.pixels.resize(payload);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(payload));
    if (static_cast<std::size_t>(in.gcount()) != payload) {
        throw ParseError(path + ": truncated at offset " +
                         std::to_string(16 + static_cast<std::size_t>(in.gcount())) +
                         " (expected " + std::to_string(16 + payload) + " bytes)");
    }
    return img;
}

inline std::vector<unsigned char> read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open");
    const std::uint32_t magic = read_u32_be(in, 0, path);
    if (magic != kLabelMagic) {
        throw ParseError(path + ": bad magic " + hex(magic) + " at offset 0 (expected " +
                         hex(kLabelMagic) + ")");
    }
    const std::size_t count = read_u32_be(in, 4, path);
    std::vector<unsigned char> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        throw ParseError(path + ": truncated at offset " +
                         std::to_string(8 + static_cast<std::size_t>(in.gcount())) +
                         " (expected " + std::to_string(8 + count) + " bytes)");
    }
    return labels;
}

inline void write_images(const std::string& path, std::size_t count, std::size_t rows,
                         std::size_t cols, const std::vector<unsigned char>& pixels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    write_u32_be(out, kImageMagic);
    write_u32_be(out, static_cast<std::uint32_t>(count));
    write_u32_be(out, static_cast<std::uint32_t>(rows));
    write_u32_be(out, static_cast<std::uint32_t>(cols));
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
}

inline void write_labels(const std::string& path, const std::vector<unsigned char>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    write_u32_be(out, kLabelMagic);
    write_u32_be(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

}  // namespace idx

// Loads an MNIST-style IDX image/label pair: pixels scaled by 1/255 into
// rows of width rows*cols, labels one-hot over 10 classes.
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
    const idx::Images img = idx::read_images(images_path);
    const std::vector<unsigned char> labels = idx::read_labels(labels_path);
    if (img.count != labels.size()) {
        throw ParseError("image count " + std::to_string(img.count) + " in " + images_path +
                         " != label count " + std::to_string(labels.size()) + " in " +
                         labels_path);
    }
    constexpr std::size_t kClasses = 10;
    Dataset ds;
    ds.class_count = kClasses;
    const std::size_t features = img.rows * img.cols;
    ds.inputs = Matrix(img.count, features);
    ds.targets = Matrix(img.count, kClasses);
    for (std::size_t i = 0; i < img.count; ++i) {
        if (labels[i] >= kClasses) {
            throw ParseError(labels_path + ": label " + std::to_string(int(labels[i])) +
                             " out of range at offset " + std::to_string(8 + i));
        }
        double* row = ds.inputs.row_ptr(i);
        const unsigned char* px = img.pixels.data() + i * features;
        for (std::size_t j = 0; j < features; ++j) row[j] = px[j] / 255.0;
        ds.targets(i, labels[i]) = 1.0;
    }
    return ds;
}

// Deterministic Gaussian clusters clipped to [0,1]. Class centers sit at
// corner patterns of the unit cube (bit d of the class index picks 0.2 or
// 0.8 in dimension d, cycling) plus a small seeded jitter; noise sigma is
// 0.3/separation, so larger separation means tighter, easier clusters.
// Samples are ordered class-major.
inline Dataset synth_blobs(std::size_t classes, std::size_t per_class, std::size_t dims,
                           double separation, std::uint64_t seed) {
    if (classes < 1 || per_class < 1 || dims < 1) {
        throw ConfigError("synth_blobs: classes, per_class and dims must all be >= 1");
    }
    if (!(separation > 0.0)) throw ConfigError("synth_blobs: separation must be > 0");
    Rng rng(derive_seed(seed, /*stream=*/0xb10b5));

    std::vector<std::vector<double>> centers(classes, std::vector<double>(dims));
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t d = 0; d < dims; ++d) {
            const bool bit = (c >> (d % 20)) & 1;
            centers[c][d] = (bit ? 0.8 : 0.2) + rng.uniform(-0.05, 0.05);
        }
    }

    const double sigma = 0.3 / separation;
    Dataset ds;
    ds.class_count = classes;
    ds.inputs = Matrix(classes * per_class, dims);
    ds.targets = Matrix(classes * per_class, classes);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s, ++row) {
            double* x = ds.inputs.row_ptr(row);
            for (std::size_t d = 0; d < dims; ++d) {
                const double v = centers[c][d] + sigma * rng.gaussian();
                x[d] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
            }
            ds.targets(row, c) = 1.0;
        }
    }
    return ds;
}

struct BatchPlan {
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    bool drop_last = false;
};

struct Batch {
    Matrix inputs;
    Matrix targets;
};

// Row permutation for one epoch, derived deterministically from (seed, epoch),
// split into consecutive batches. Every sample appears exactly once except a
// dropped tail when drop_last is set.
inline std::vector<std::vector<std::size_t>> batch_indices(std::size_t sample_count,
                                                           const BatchPlan& plan,
                                                           std::size_t epoch) {
    if (plan.batch_size < 1) throw ConfigError("batch_indices: batch size must be >= 1");
    std::vector<std::size_t> order(sample_count);
    for (std::size_t i = 0; i < sample_count; ++i) order[i] = i;
    Rng rng(derive_seed(plan.seed, 0xba7c4000ULL + epoch));
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < sample_count; start += plan.batch_size) {
        const std::size_t end = std::min(sample_count, start + plan.batch_size);
        if (plan.drop_last && end - start < plan.batch_size) break;
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

inline Batch gather(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Batch b;
    b.inputs = Matrix(rows.size(), ds.inputs.cols);
    b.targets = Matrix(rows.size(), ds.targets.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        std::copy(ds.inputs.row_ptr(r), ds.inputs.row_ptr(r) + ds.inputs.cols,
                  b.inputs.row_ptr(i));
        std::copy(ds.targets.row_ptr(r), ds.targets.row_ptr(r) + ds.targets.cols,
                  b.targets.row_ptr(i));
    }
    return b;
}

inline std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan, std::size_t epoch) {
    std::vector<Batch> out;
    for (const auto& idxs : batch_indices(ds.sample_count(), plan, epoch))
        out.push_back(gather(ds, idxs));
    return out;
}

}  // namespace scnet
