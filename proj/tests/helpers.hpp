#pragma once

#include <filesystem>
#include <string>

#include "scnet/data.hpp"
#include "scnet/matrix.hpp"
#include "scnet/rng.hpp"
#include "scnet/topology.hpp"

namespace testutil {

inline scnet::Matrix random_matrix(std::size_t rows, std::size_t cols, scnet::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
    scnet::Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

// Uniform stack of dense layers, constant width, one activation everywhere.
inline scnet::NetworkConfig stack_config(std::size_t input_width,
                                         const std::vector<std::size_t>& widths,
                                         scnet::Activation act, scnet::Loss loss,
                                         std::uint64_t seed) {
    scnet::NetworkConfig cfg;
    cfg.input_width = input_width;
    for (std::size_t w : widths) cfg.layers.push_back({scnet::LayerKind::dense, w, act});
    cfg.loss = loss;
    cfg.seed = seed;
    return cfg;
}

inline scnet::ResolvedTopology resolve_or_die(const scnet::NetworkConfig& cfg) {
    const scnet::ValidationResult v = scnet::validate(cfg);
    REQUIRE(v.ok());
    return *v.topology;
}

inline scnet::Matrix one_hot_targets(std::size_t batch, std::size_t classes, scnet::Rng& rng) {
    scnet::Matrix t(batch, classes);
    for (std::size_t i = 0; i < batch; ++i) t(i, rng.bounded(classes)) = 1.0;
    return t;
}

// Fresh directory under the build tree for file-emitting tests.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "scnet-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace testutil
