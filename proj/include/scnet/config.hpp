#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scnet/data.hpp"
#include "scnet/error.hpp"
#include "scnet/topology.hpp"

namespace scnet {

enum class DataSource { blobs, mnist };

// Standard IDX file names are appended to `dir` unless explicit paths are given.
struct MnistPaths {
    std::string dir;
    std::string train_images, train_labels, test_images, test_labels;

    std::string resolve(const std::string& explicit_path, const char* name) const {
        if (!explicit_path.empty()) return explicit_path;
        return dir.empty() ? std::string(name) : dir + "/" + name;
    }
    std::string train_images_path() const { return resolve(train_images, "train-images-idx3-ubyte"); }
    std::string train_labels_path() const { return resolve(train_labels, "train-labels-idx1-ubyte"); }
    std::string test_images_path() const { return resolve(test_images, "t10k-images-idx3-ubyte"); }
    std::string test_labels_path() const { return resolve(test_labels, "t10k-labels-idx1-ubyte"); }
};

struct BlobsSpec {
    std::size_t classes = 2;
    std::size_t per_class = 100;
    std::size_t dims = 2;
    double separation = 4.0;
    std::size_t test_per_class = 20;
};

struct TrainSpec {
    double learning_rate = 0.1;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    bool drop_last = false;
    std::optional<std::uint64_t> batch_seed;  // derived from the run seed when unset
};

struct TelemetrySpec {
    bool record_mean_gradients = false;
    std::size_t gradient_record_interval = 1;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DataSource source = DataSource::blobs;
    MnistPaths mnist;
    BlobsSpec blobs;
    NetworkConfig network;  // network.seed mirrors the top-level seed
    TrainSpec train;
    TelemetrySpec telemetry;

    std::uint64_t effective_batch_seed() const {
        return train.batch_seed ? *train.batch_seed : derive_seed(seed, 0xba7c);
    }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct LineContext {
    std::string origin;
    std::size_t line = 0;
    std::string where() const { return origin + ":" + std::to_string(line); }
};

template <typename T>
T parse_unsigned(const std::string& v, const LineContext& ctx, const std::string& key) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (...) {
        throw ConfigError(ctx.where() + ": " + key + ": expected an unsigned integer, got '" + v + "'");
    }
    if (pos != v.size() || (!v.empty() && v[0] == '-')) {
        throw ConfigError(ctx.where() + ": " + key + ": expected an unsigned integer, got '" + v + "'");
    }
    return static_cast<T>(x);
}

inline double parse_real(const std::string& v, const LineContext& ctx, const std::string& key) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError(ctx.where() + ": " + key + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) {
        throw ConfigError(ctx.where() + ": " + key + ": expected a number, got '" + v + "'");
    }
    return x;
}

inline bool parse_bool(const std::string& v, const LineContext& ctx, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(ctx.where() + ": " + key + ": expected true/false, got '" + v + "'");
}

// "dense 64 sigmoid" | "residual 32 relu"
inline LayerSpec parse_layer(const std::string& v, const LineContext& ctx) {
    const auto toks = split_ws(v);
    if (toks.size() != 3) {
        throw ConfigError(ctx.where() + ": network.layer: expected '<dense|residual> <width> <activation>', got '" +
                          v + "'");
    }
    LayerSpec spec;
    if (toks[0] == "dense") {
        spec.kind = LayerKind::dense;
    } else if (toks[0] == "residual") {
        spec.kind = LayerKind::dense_residual;
    } else {
        throw ConfigError(ctx.where() + ": network.layer: unknown kind '" + toks[0] + "'");
    }
    spec.width = parse_unsigned<std::size_t>(toks[1], ctx, "network.layer width");
    try {
        spec.activation = parse_activation(toks[2]);
    } catch (const ConfigError& e) {
        throw ConfigError(ctx.where() + ": network.layer: " + e.what());
    }
    return spec;
}

// "rear=4 front=2[,1] weight=0.2" | "rear=9 gap=4 weight=0.2"
inline ShortCircuitSpec parse_sc(const std::string& v, const LineContext& ctx) {
    ShortCircuitSpec sc;
    bool have_rear = false;
    for (const auto& tok : split_ws(v)) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(ctx.where() + ": network.sc: expected key=value tokens, got '" + tok + "'");
        }
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "rear") {
            sc.rear_layer = parse_unsigned<std::size_t>(val, ctx, "network.sc rear");
            have_rear = true;
        } else if (key == "front") {
            for (const auto& item : split_on(val, ','))
                sc.front_layers.push_back(parse_unsigned<std::size_t>(item, ctx, "network.sc front"));
        } else if (key == "gap") {
            sc.skip_gap = parse_unsigned<std::size_t>(val, ctx, "network.sc gap");
        } else if (key == "weight") {
            sc.weight = parse_real(val, ctx, "network.sc weight");
        } else {
            throw ConfigError(ctx.where() + ": network.sc: unknown token '" + key + "'");
        }
    }
    if (!have_rear) throw ConfigError(ctx.where() + ": network.sc: missing rear=<layer>");
    return sc;
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace config_detail

// Parses the declarative experiment format: one `key = value` per line,
// full-line `#` comments, repeatable `network.layer` / `network.sc` keys.
// Unknown keys are errors; every violation in the file is reported at once.
inline ExperimentConfig parse_experiment_config(const std::string& text,
                                                const std::string& origin = "<config>") {
    using namespace config_detail;
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    bool have_input_width = false;

    std::istringstream in(text);
    std::string raw;
    LineContext ctx{origin, 0};
    while (std::getline(in, raw)) {
        ++ctx.line;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back(ctx.where() + ": expected 'key = value', got '" + line + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "seed") {
                cfg.seed = parse_unsigned<std::uint64_t>(value, ctx, key);
            } else if (key == "output_dir") {
                cfg.output_dir = value;
            } else if (key == "data.source") {
                if (value == "blobs") cfg.source = DataSource::blobs;
                else if (value == "mnist") cfg.source = DataSource::mnist;
                else throw ConfigError(ctx.where() + ": data.source must be blobs or mnist");
            } else if (key == "data.mnist.dir") {
                cfg.mnist.dir = value;
            } else if (key == "data.mnist.train_images") {
                cfg.mnist.train_images = value;
            } else if (key == "data.mnist.train_labels") {
                cfg.mnist.train_labels = value;
            } else if (key == "data.mnist.test_images") {
                cfg.mnist.test_images = value;
            } else if (key == "data.mnist.test_labels") {
                cfg.mnist.test_labels = value;
            } else if (key == "data.blobs.classes") {
                cfg.blobs.classes = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "data.blobs.per_class") {
                cfg.blobs.per_class = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "data.blobs.dims") {
                cfg.blobs.dims = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "data.blobs.separation") {
                cfg.blobs.separation = parse_real(value, ctx, key);
            } else if (key == "data.blobs.test_per_class") {
                cfg.blobs.test_per_class = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "network.input_width") {
                cfg.network.input_width = parse_unsigned<std::size_t>(value, ctx, key);
                have_input_width = true;
            } else if (key == "network.layer") {
                cfg.network.layers.push_back(parse_layer(value, ctx));
            } else if (key == "network.loss") {
                cfg.network.loss = parse_loss(value);
            } else if (key == "network.sc") {
                cfg.network.short_circuits.push_back(parse_sc(value, ctx));
            } else if (key == "train.learning_rate") {
                cfg.train.learning_rate = parse_real(value, ctx, key);
            } else if (key == "train.epochs") {
                cfg.train.epochs = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "train.batch_size") {
                cfg.train.batch_size = parse_unsigned<std::size_t>(value, ctx, key);
            } else if (key == "train.drop_last") {
                cfg.train.drop_last = parse_bool(value, ctx, key);
            } else if (key == "train.batch_seed") {
                cfg.train.batch_seed = parse_unsigned<std::uint64_t>(value, ctx, key);
            } else if (key == "telemetry.record_mean_gradients") {
                cfg.telemetry.record_mean_gradients = parse_bool(value, ctx, key);
            } else if (key == "telemetry.gradient_record_interval") {
                cfg.telemetry.gradient_record_interval = parse_unsigned<std::size_t>(value, ctx, key);
            } else {
                errors.push_back(ctx.where() + ": unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            errors.push_back(e.what());
        }
    }

    if (!have_input_width) errors.push_back(origin + ": missing network.input_width");
    if (cfg.network.layers.empty()) errors.push_back(origin + ": at least one network.layer required");
    if (!(cfg.train.learning_rate > 0.0))
        errors.push_back(origin + ": train.learning_rate must be > 0");
    if (cfg.train.epochs < 1) errors.push_back(origin + ": train.epochs must be >= 1");
    if (cfg.train.batch_size < 1) errors.push_back(origin + ": train.batch_size must be >= 1");
    if (cfg.telemetry.gradient_record_interval < 1)
        errors.push_back(origin + ": telemetry.gradient_record_interval must be >= 1");

    if (!errors.empty()) {
        std::string joined;
        for (const auto& e : errors) joined += e + "\n";
        throw ConfigError(joined);
    }
    cfg.network.seed = cfg.seed;
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), path);
}

// Canonical serialization: every effective value, fixed key order, parseable
// by parse_experiment_config. Used for the config-echo artifact and for
// structural comparison of configs.
inline std::string echo_config(const ExperimentConfig& cfg, bool include_output_dir = true,
                               bool include_short_circuits = true) {
    using config_detail::format_real;
    std::ostringstream os;
    os << "seed = " << cfg.seed << "\n";
    if (include_output_dir) os << "output_dir = " << cfg.output_dir << "\n";
    os << "data.source = " << (cfg.source == DataSource::blobs ? "blobs" : "mnist") << "\n";
    if (cfg.source == DataSource::mnist) {
        if (!cfg.mnist.dir.empty()) os << "data.mnist.dir = " << cfg.mnist.dir << "\n";
        if (!cfg.mnist.train_images.empty())
            os << "data.mnist.train_images = " << cfg.mnist.train_images << "\n";
        if (!cfg.mnist.train_labels.empty())
            os << "data.mnist.train_labels = " << cfg.mnist.train_labels << "\n";
        if (!cfg.mnist.test_images.empty())
            os << "data.mnist.test_images = " << cfg.mnist.test_images << "\n";
        if (!cfg.mnist.test_labels.empty())
            os << "data.mnist.test_labels = " << cfg.mnist.test_labels << "\n";
    } else {
        os << "data.blobs.classes = " << cfg.blobs.classes << "\n";
        os << "data.blobs.per_class = " << cfg.blobs.per_class << "\n";
        os << "data.blobs.dims = " << cfg.blobs.dims << "\n";
        os << "data.blobs.separation = " << format_real(cfg.blobs.separation) << "\n";
        os << "data.blobs.test_per_class = " << cfg.blobs.test_per_class << "\n";
    }
    os << "network.input_width = " << cfg.network.input_width << "\n";
    for (const auto& layer : cfg.network.layers) {
        os << "network.layer = " << to_string(layer.kind) << " " << layer.width << " "
           << to_string(layer.activation) << "\n";
    }
    os << "network.loss = " << to_string(cfg.network.loss) << "\n";
    if (include_short_circuits) {
        for (const auto& sc : cfg.network.short_circuits) {
            os << "network.sc = rear=" << sc.rear_layer;
            if (sc.skip_gap) {
                os << " gap=" << *sc.skip_gap;
            } else {
                os << " front=";
                for (std::size_t i = 0; i < sc.front_layers.size(); ++i)
                    os << (i ? "," : "") << sc.front_layers[i];
            }
            os << " weight=" << format_real(sc.weight) << "\n";
        }
    }
    os << "train.learning_rate = " << format_real(cfg.train.learning_rate) << "\n";
    os << "train.epochs = " << cfg.train.epochs << "\n";
    os << "train.batch_size = " << cfg.train.batch_size << "\n";
    os << "train.drop_last = " << (cfg.train.drop_last ? "true" : "false") << "\n";
    if (cfg.train.batch_seed) os << "train.batch_seed = " << *cfg.train.batch_seed << "\n";
    os << "telemetry.record_mean_gradients = "
       << (cfg.telemetry.record_mean_gradients ? "true" : "false") << "\n";
    os << "telemetry.gradient_record_interval = " << cfg.telemetry.gradient_record_interval
       << "\n";
    return os.str();
}

}  // namespace scnet
