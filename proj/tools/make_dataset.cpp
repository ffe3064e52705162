// Writes a synthetic image corpus in canonical IDX layout, for running the
// MNIST-shaped presets without downloading anything.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scnet/datagen.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate an MNIST-like IDX dataset"};
    std::string out_dir;
    scnet::MnistLikeSpec spec;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--train", spec.train_count, "training sample count");
    app.add_option("--test", spec.test_count, "test sample count");
    app.add_option("--seed", spec.seed, "generator seed");
    app.add_option("--rows", spec.rows, "image rows");
    app.add_option("--cols", spec.cols, "image cols");
    app.add_option("--classes", spec.classes, "class count (<= 256)");
    app.add_option("--noise", spec.noise, "pixel noise amplitude on the 0..255 scale");
    CLI11_PARSE(app, argc, argv);

    try {
        scnet::write_mnist_like(out_dir, spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote " << out_dir << " (" << spec.train_count << " train / " << spec.test_count
              << " test, " << spec.rows << "x" << spec.cols << ", " << spec.classes
              << " classes)\n";
    return 0;
}
