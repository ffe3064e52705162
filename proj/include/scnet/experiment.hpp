#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scnet/config.hpp"
#include "scnet/data.hpp"
#include "scnet/engine.hpp"
#include "scnet/error.hpp"
#include "scnet/topology.hpp"
#include "scnet/verify.hpp"

namespace scnet {

// One epoch's row of the metrics stream. Wall time is kept for console
// reporting only; the persisted metrics files contain just the deterministic
// fields so a re-run with the same config reproduces them byte-for-byte.
struct MetricsRecord {
    std::size_t epoch = 0;  // 1-based, strictly increasing
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    bool has_layer_stats = false;
    std::vector<LayerGradientStat> layer_stats;
    double wall_time_s = 0.0;
};

// Fraction of rows whose argmax matches the target argmax; ties break toward
// the lowest class index on both sides.
inline double accuracy(const Matrix& predictions, const Matrix& targets) {
    require_same_shape(predictions, targets, "accuracy");
    if (predictions.rows == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.rows; ++i)
        if (argmax_row(predictions, i) == argmax_row(targets, i)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.rows);
}

namespace experiment_detail {

// Shortest round-trip decimal form, shared by the JSONL and CSV writers so
// both files carry identical text for identical values.
inline std::string num(double v) { return nlohmann::json(v).dump(); }

inline Dataset load_train(const ExperimentConfig& cfg) {
    if (cfg.source == DataSource::mnist) {
        return load_mnist_idx(cfg.mnist.train_images_path(), cfg.mnist.train_labels_path());
    }
    return synth_blobs(cfg.blobs.classes, cfg.blobs.per_class, cfg.blobs.dims,
                       cfg.blobs.separation, derive_seed(cfg.seed, 0xda7a));
}

inline Dataset load_test(const ExperimentConfig& cfg) {
    if (cfg.source == DataSource::mnist) {
        return load_mnist_idx(cfg.mnist.test_images_path(), cfg.mnist.test_labels_path());
    }
    return synth_blobs(cfg.blobs.classes, cfg.blobs.test_per_class, cfg.blobs.dims,
                       cfg.blobs.separation, derive_seed(cfg.seed, 0x7e57));
}

}  // namespace experiment_detail

// Mean loss and accuracy over a dataset, evaluated in fixed-order chunks.
inline std::pair<double, double> evaluate(const ResolvedTopology& topo, const Parameters& params,
                                          const Dataset& ds, std::size_t chunk = 512) {
    if (ds.sample_count() == 0) return {0.0, 0.0};
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < ds.sample_count(); start += chunk) {
        const std::size_t end = std::min(ds.sample_count(), start + chunk);
        std::vector<std::size_t> rows(end - start);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = start + i;
        const Batch b = gather(ds, rows);
        const ForwardTrace trace = forward(topo, params, b.inputs);
        loss_sum += loss_value(topo.loss, trace.output(), b.targets) *
                    static_cast<double>(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (argmax_row(trace.output(), i) == argmax_row(b.targets, i)) ++hits;
    }
    const double n = static_cast<double>(ds.sample_count());
    return {loss_sum / n, static_cast<double>(hits) / n};
}

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::string> output_dir;
};

struct RunResult {
    std::vector<MetricsRecord> records;
    ResolvedTopology topology;
    Parameters final_params;
    std::string output_dir;
};

namespace experiment_detail {

inline std::string metrics_jsonl(const std::vector<MetricsRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["epoch"] = r.epoch;
        j["train_loss"] = r.train_loss;
        j["train_accuracy"] = r.train_accuracy;
        j["test_loss"] = r.test_loss;
        j["test_accuracy"] = r.test_accuracy;
        if (r.has_layer_stats) {
            nlohmann::ordered_json signed_means = nlohmann::ordered_json::array();
            nlohmann::ordered_json abs_means = nlohmann::ordered_json::array();
            for (const auto& s : r.layer_stats) {
                signed_means.push_back(s.signed_mean);
                abs_means.push_back(s.abs_mean);
            }
            j["grad_signed_mean"] = signed_means;
            j["grad_abs_mean"] = abs_means;
        }
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string metrics_csv(const std::vector<MetricsRecord>& records,
                               std::size_t layer_count) {
    std::ostringstream os;
    os << "epoch,train_loss,train_accuracy,test_loss,test_accuracy";
    for (std::size_t l = 1; l <= layer_count; ++l) os << ",grad_signed_mean_l" << l;
    for (std::size_t l = 1; l <= layer_count; ++l) os << ",grad_abs_mean_l" << l;
    os << "\n";
    for (const auto& r : records) {
        os << r.epoch << "," << num(r.train_loss) << "," << num(r.train_accuracy) << ","
           << num(r.test_loss) << "," << num(r.test_accuracy);
        for (std::size_t l = 0; l < layer_count; ++l)
            os << "," << (r.has_layer_stats ? num(r.layer_stats[l].signed_mean) : "");
        for (std::size_t l = 0; l < layer_count; ++l)
            os << "," << (r.has_layer_stats ? num(r.layer_stats[l].abs_mean) : "");
        os << "\n";
    }
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

inline void write_params_snapshot(const std::filesystem::path& path, const Parameters& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    const char magic[8] = {'S', 'C', 'N', 'P', 'A', 'R', 'M', '1'};
    out.write(magic, 8);
    auto write_u64 = [&](std::uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), 8);
    };
    auto write_matrix = [&](const Matrix& m) {
        write_u64(m.rows);
        write_u64(m.cols);
        out.write(reinterpret_cast<const char*>(m.data.data()),
                  static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    };
    write_u64(params.weights.size());
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        write_matrix(params.weights[i]);
        write_matrix(params.biases[i]);
    }
}

inline Parameters read_params_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open");
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::string(magic, 8) != "SCNPARM1") {
        throw ParseError(path.string() + ": bad snapshot magic at offset 0");
    }
    auto read_u64 = [&]() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        if (in.gcount() != 8) throw ParseError(path.string() + ": truncated snapshot");
        return v;
    };
    auto read_matrix = [&]() {
        const std::uint64_t rows = read_u64();
        const std::uint64_t cols = read_u64();
        Matrix m(rows, cols);
        in.read(reinterpret_cast<char*>(m.data.data()),
                static_cast<std::streamsize>(m.data.size() * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != m.data.size() * sizeof(double)) {
            throw ParseError(path.string() + ": truncated snapshot");
        }
        return m;
    };
    Parameters params;
    const std::uint64_t layers = read_u64();
    for (std::uint64_t i = 0; i < layers; ++i) {
        params.weights.push_back(read_matrix());
        params.biases.push_back(read_matrix());
    }
    return params;
}

// Output root override: a relative output_dir lands under $SCNET_OUTPUT_ROOT
// when that is set.
inline std::filesystem::path resolve_output_dir(const std::string& configured) {
    std::filesystem::path p(configured);
    if (p.is_relative()) {
        if (const char* root = std::getenv("SCNET_OUTPUT_ROOT")) {
            return std::filesystem::path(root) / p;
        }
    }
    return p;
}

}  // namespace experiment_detail

// Trains the configured network to completion and persists metrics.jsonl,
// metrics.csv, config.echo.conf and params.bin under the output directory.
// Fully deterministic given (config, seed): data, initialization and batch
// order all derive from the config seed.
inline RunResult run_experiment(const ExperimentConfig& base_cfg, const RunOverrides& ov = {},
                                std::ostream* log = nullptr) {
    ExperimentConfig cfg = base_cfg;
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.network.seed = *ov.seed;
    }
    if (ov.epochs) cfg.train.epochs = *ov.epochs;
    if (ov.output_dir) cfg.output_dir = *ov.output_dir;

    const Dataset train_ds = experiment_detail::load_train(cfg);
    const Dataset test_ds = experiment_detail::load_test(cfg);
    if (train_ds.feature_count() != cfg.network.input_width) {
        throw ConfigError("dataset features " + std::to_string(train_ds.feature_count()) +
                          " != network.input_width " + std::to_string(cfg.network.input_width));
    }

    const ValidationResult validated = validate(cfg.network);
    if (!validated.ok()) {
        std::string joined = "invalid network configuration:\n";
        for (const auto& e : validated.errors) joined += "  " + e + "\n";
        throw ConfigError(joined);
    }
    const ResolvedTopology& topo = *validated.topology;
    Parameters params = init_weights(topo);

    BatchPlan plan;
    plan.batch_size = cfg.train.batch_size;
    plan.seed = cfg.effective_batch_seed();
    plan.drop_last = cfg.train.drop_last;

    RunResult result;
    result.topology = topo;
    for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        std::size_t step_count = 0;
        std::size_t train_hits = 0;
        std::size_t train_seen = 0;
        const bool record_grads = cfg.telemetry.record_mean_gradients &&
                                  (epoch - 1) % cfg.telemetry.gradient_record_interval == 0;
        std::vector<LayerGradientStat> stat_sum(topo.layer_count());

        for (const auto& rows : batch_indices(train_ds.sample_count(), plan, epoch - 1)) {
            const Batch b = gather(train_ds, rows);
            const ForwardTrace trace = forward(topo, params, b.inputs);
            const double batch_loss = loss_value(topo.loss, trace.output(), b.targets);
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (argmax_row(trace.output(), i) == argmax_row(b.targets, i)) ++train_hits;
            train_seen += rows.size();
            const GradientSet grads = backward(topo, params, trace, b.targets);
            if (record_grads) {
                const auto profile = mean_gradient_profile(grads);
                for (std::size_t l = 0; l < profile.size(); ++l) {
                    stat_sum[l].layer = profile[l].layer;
                    stat_sum[l].signed_mean += profile[l].signed_mean;
                    stat_sum[l].abs_mean += profile[l].abs_mean;
                }
            }
            sgd_step(params, grads, cfg.train.learning_rate);
            loss_sum += batch_loss;
            ++step_count;
        }

        MetricsRecord rec;
        rec.epoch = epoch;
        rec.train_loss = step_count == 0 ? 0.0 : loss_sum / static_cast<double>(step_count);
        rec.train_accuracy =
            train_seen == 0 ? 0.0
                            : static_cast<double>(train_hits) / static_cast<double>(train_seen);
        const auto [test_loss, test_acc] = evaluate(topo, params, test_ds);
        rec.test_loss = test_loss;
        rec.test_accuracy = test_acc;
        if (record_grads && step_count > 0) {
            rec.has_layer_stats = true;
            for (auto& s : stat_sum) {
                s.signed_mean /= static_cast<double>(step_count);
                s.abs_mean /= static_cast<double>(step_count);
            }
            rec.layer_stats = stat_sum;
        }
        rec.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) {
            (*log) << "epoch " << epoch << ": train_loss=" << rec.train_loss
                   << " train_acc=" << rec.train_accuracy << " test_loss=" << rec.test_loss
                   << " test_acc=" << rec.test_accuracy << " (" << rec.wall_time_s << "s)\n";
        }
        result.records.push_back(std::move(rec));
    }

    namespace fs = std::filesystem;
    const fs::path out_dir = experiment_detail::resolve_output_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    experiment_detail::write_file(out_dir / "metrics.jsonl",
                                  experiment_detail::metrics_jsonl(result.records));
    experiment_detail::write_file(
        out_dir / "metrics.csv",
        experiment_detail::metrics_csv(result.records, topo.layer_count()));
    experiment_detail::write_file(out_dir / "config.echo.conf", echo_config(cfg));
    experiment_detail::write_params_snapshot(out_dir / "params.bin", params);

    result.final_params = std::move(params);
    result.output_dir = out_dir.string();
    return result;
}

struct PairResult {
    RunResult a;
    RunResult b;
    bool step0_loss_equal = false;
    double step0_loss_a = 0.0;
    double step0_loss_b = 0.0;
    // Per layer, first telemetry epoch: run B's abs_mean exceeds run A's.
    std::vector<bool> layer_abs_mean_b_exceeds_a;
    std::string output_dir;
};

// Runs two experiments that must be identical except for their short-circuit
// sets (and output directories), then emits side-by-side loss curves and
// gradient profiles. Argument order maps directly onto the a/b columns.
inline PairResult run_pair(const ExperimentConfig& cfg_a, const ExperimentConfig& cfg_b,
                           const std::string& out_dir_str, const RunOverrides& ov = {},
                           std::ostream* log = nullptr) {
    const std::string sig_a = echo_config(cfg_a, /*output_dir=*/false, /*sc=*/false);
    const std::string sig_b = echo_config(cfg_b, /*output_dir=*/false, /*sc=*/false);
    if (sig_a != sig_b) {
        throw ConfigError("run_pair: configs differ beyond short_circuits; refusing to compare");
    }

    namespace fs = std::filesystem;
    // Absolute subdirectories so the per-run output resolution cannot apply
    // the output-root override a second time.
    const fs::path out_dir = fs::absolute(experiment_detail::resolve_output_dir(out_dir_str));
    fs::create_directories(out_dir);

    RunOverrides ov_a = ov, ov_b = ov;
    ov_a.output_dir = (out_dir / "a").string();
    ov_b.output_dir = (out_dir / "b").string();

    PairResult pair;
    pair.a = run_experiment(cfg_a, ov_a, log);
    pair.b = run_experiment(cfg_b, ov_b, log);
    pair.output_dir = out_dir.string();

    // Shared-seed forward equivalence before any update: same init, same
    // first batch, and short circuits add nothing to the forward pass, so the
    // step-0 losses must agree exactly.
    {
        ExperimentConfig ca = cfg_a, cb = cfg_b;
        if (ov.seed) {
            ca.seed = cb.seed = *ov.seed;
            ca.network.seed = cb.network.seed = *ov.seed;
        }
        const Dataset ds = experiment_detail::load_train(ca);
        const auto va = validate(ca.network);
        const auto vb = validate(cb.network);
        if (!va.ok() || !vb.ok()) throw ConfigError("run_pair: invalid network configuration");
        const Parameters pa = init_weights(*va.topology);
        const Parameters pb = init_weights(*vb.topology);
        BatchPlan plan{ca.train.batch_size, ca.effective_batch_seed(), ca.train.drop_last};
        const auto idxs = batch_indices(ds.sample_count(), plan, 0);
        const Batch first = gather(ds, idxs.front());
        pair.step0_loss_a =
            loss_value(ca.network.loss, forward(*va.topology, pa, first.inputs).output(),
                       first.targets);
        pair.step0_loss_b =
            loss_value(cb.network.loss, forward(*vb.topology, pb, first.inputs).output(),
                       first.targets);
        pair.step0_loss_equal = pair.step0_loss_a == pair.step0_loss_b;
    }

    using experiment_detail::num;
    // Loss curves: one row per (run, epoch).
    {
        std::ostringstream os;
        os << "run,epoch,train_loss,train_accuracy,test_loss,test_accuracy\n";
        for (const auto& r : pair.a.records)
            os << "a," << r.epoch << "," << num(r.train_loss) << "," << num(r.train_accuracy)
               << "," << num(r.test_loss) << "," << num(r.test_accuracy) << "\n";
        for (const auto& r : pair.b.records)
            os << "b," << r.epoch << "," << num(r.train_loss) << "," << num(r.train_accuracy)
               << "," << num(r.test_loss) << "," << num(r.test_accuracy) << "\n";
        experiment_detail::write_file(out_dir / "loss_curves.csv", os.str());
    }
    // Per-layer gradient comparison for epochs where both runs recorded stats.
    {
        std::ostringstream os;
        os << "epoch,layer,signed_mean_a,abs_mean_a,signed_mean_b,abs_mean_b,b_abs_exceeds_a\n";
        bool first_epoch_done = false;
        for (std::size_t i = 0; i < pair.a.records.size() && i < pair.b.records.size(); ++i) {
            const auto& ra = pair.a.records[i];
            const auto& rb = pair.b.records[i];
            if (!ra.has_layer_stats || !rb.has_layer_stats) continue;
            if (!first_epoch_done) {
                for (std::size_t l = 0; l < ra.layer_stats.size(); ++l) {
                    pair.layer_abs_mean_b_exceeds_a.push_back(rb.layer_stats[l].abs_mean >
                                                              ra.layer_stats[l].abs_mean);
                }
                first_epoch_done = true;
            }
            for (std::size_t l = 0; l < ra.layer_stats.size(); ++l) {
                os << ra.epoch << "," << (l + 1) << "," << num(ra.layer_stats[l].signed_mean)
                   << "," << num(ra.layer_stats[l].abs_mean) << ","
                   << num(rb.layer_stats[l].signed_mean) << "," << num(rb.layer_stats[l].abs_mean)
                   << "," << (rb.layer_stats[l].abs_mean > ra.layer_stats[l].abs_mean ? 1 : 0)
                   << "\n";
            }
        }
        experiment_detail::write_file(out_dir / "gradient_comparison.csv", os.str());
    }
    // Machine-readable summary.
    {
        nlohmann::ordered_json j;
        j["step0_loss_equal"] = pair.step0_loss_equal;
        j["step0_loss_a"] = pair.step0_loss_a;
        j["step0_loss_b"] = pair.step0_loss_b;
        j["final_train_loss_a"] = pair.a.records.back().train_loss;
        j["final_train_loss_b"] = pair.b.records.back().train_loss;
        j["final_test_accuracy_a"] = pair.a.records.back().test_accuracy;
        j["final_test_accuracy_b"] = pair.b.records.back().test_accuracy;
        j["layer_abs_mean_b_exceeds_a"] = pair.layer_abs_mean_b_exceeds_a;
        experiment_detail::write_file(out_dir / "summary.json", j.dump(2) + "\n");
    }
    return pair;
}

enum class VerifyScope { fd, sc_delta, all };

struct VerifyOptions {
    std::size_t nets = 40;
    std::uint64_t seed = 2024;
    std::size_t max_parameters = 20000;
};

// Test seam: lets a caller corrupt the analytic gradients before comparison
// to confirm the detector actually fires.
using GradientFault = std::function<void(GradientSet&)>;

struct VerifyReport {
    bool pass = true;
    std::size_t fd_nets = 0;
    std::size_t fd_parameters_checked = 0;
    std::size_t fd_failures = 0;
    std::size_t sc_nets = 0;
    double sc_max_discrepancy = 0.0;
    std::vector<std::string> messages;
    // One record per failing coordinate (fd scope) and per checked front
    // layer (sc-delta scope).
    std::string jsonl_records;

    std::string to_text() const {
        std::ostringstream os;
        os << (pass ? "PASS" : "FAIL") << ": fd nets " << fd_nets << " (" << fd_parameters_checked
           << " parameters, " << fd_failures << " failures), sc-delta nets " << sc_nets
           << " (max discrepancy " << sc_max_discrepancy << ")\n";
        for (const auto& m : messages) os << "  " << m << "\n";
        return os.str();
    }
};

namespace experiment_detail {

inline ResolvedTopology random_small_topology(Rng& rng, bool with_sc) {
    constexpr Activation kActs[] = {Activation::sigmoid, Activation::relu, Activation::tanh,
                                    Activation::identity};
    NetworkConfig net;
    net.seed = rng.next_u64();
    net.loss = rng.bounded(2) == 0 ? Loss::half_squared_error : Loss::softmax_cross_entropy;
    net.input_width = 2 + rng.bounded(7);
    const std::size_t depth = with_sc ? 3 + rng.bounded(4) : 2 + rng.bounded(3);
    // Constant hidden width keeps every (front, rear) pair SC-compatible.
    const std::size_t hidden = 2 + rng.bounded(7);
    for (std::size_t l = 0; l < depth; ++l) {
        LayerSpec spec;
        spec.width = hidden;
        spec.activation = kActs[rng.bounded(4)];
        spec.kind = LayerKind::dense;
        if (l > 0 && rng.bounded(4) == 0) spec.kind = LayerKind::dense_residual;
        net.layers.push_back(spec);
    }
    if (with_sc) {
        const double lambdas[] = {0.1, 0.2, 0.5, 1.0};
        const std::size_t edge_count = 1 + rng.bounded(3);
        std::set<std::pair<std::size_t, std::size_t>> used;
        for (std::size_t e = 0; e < edge_count; ++e) {
            const std::size_t rear = 2 + rng.bounded(depth - 1);
            const std::size_t front = 1 + rng.bounded(rear - 1);
            if (!used.insert({front, rear}).second) continue;
            ShortCircuitSpec sc;
            sc.rear_layer = rear;
            sc.front_layers = {front};
            sc.weight = lambdas[rng.bounded(4)];
            net.short_circuits.push_back(sc);
        }
    }
    const ValidationResult v = validate(net);
    if (!v.ok()) throw ConfigError("random_small_topology generated an invalid net");
    return *v.topology;
}

inline std::pair<Matrix, Matrix> random_batch_for(const ResolvedTopology& topo, Rng& rng) {
    const std::size_t batch = 1 + rng.bounded(4);
    Matrix inputs(batch, topo.input_width);
    for (double& v : inputs.data) v = rng.uniform(0.0, 1.0);
    const std::size_t out_width = topo.width(topo.layer_count());
    Matrix targets(batch, out_width);
    if (topo.loss == Loss::softmax_cross_entropy) {
        for (std::size_t i = 0; i < batch; ++i) targets(i, rng.bounded(out_width)) = 1.0;
    } else {
        for (double& v : targets.data) v = rng.uniform(0.0, 1.0);
    }
    return {std::move(inputs), std::move(targets)};
}

}  // namespace experiment_detail

// Randomized oracle suites over small seeded networks: `fd` checks analytic
// gradients of SC-free nets against central differences; `sc_delta` checks
// the injection algebra of SC nets to float re-association error.
inline VerifyReport run_verify(VerifyScope scope, const VerifyOptions& opts = {},
                               const GradientFault& fault = nullptr) {
    VerifyReport report;
    Rng rng(derive_seed(opts.seed, 0x5eed));
    FdConfig fd_cfg;
    fd_cfg.max_parameters = opts.max_parameters;

    if (scope == VerifyScope::fd || scope == VerifyScope::all) {
        for (std::size_t n = 0; n < opts.nets; ++n) {
            const ResolvedTopology topo =
                experiment_detail::random_small_topology(rng, /*with_sc=*/false);
            const Parameters params = init_weights(topo);
            const auto [inputs, targets] = experiment_detail::random_batch_for(topo, rng);
            const ForwardTrace trace = forward(topo, params, inputs);
            GradientSet analytic = backward(topo, params, trace, targets);
            if (fault) fault(analytic);
            GradientSet comparable;
            const GradientSet fd = fd_gradient(topo, params, inputs, targets, fd_cfg, &comparable);
            const CheckReport check = check_gradients(analytic, fd, fd_cfg, &comparable);
            ++report.fd_nets;
            report.fd_parameters_checked += check.checked;
            if (!check.pass()) {
                report.fd_failures += check.failures.size();
                report.pass = false;
                report.messages.push_back("fd mismatch on net " + std::to_string(n) + ": " +
                                          check.failures.front().coordinate());
                report.jsonl_records += check.to_jsonl();
            }
        }
    }

    if (scope == VerifyScope::sc_delta || scope == VerifyScope::all) {
        for (std::size_t n = 0; n < opts.nets; ++n) {
            const ResolvedTopology topo =
                experiment_detail::random_small_topology(rng, /*with_sc=*/true);
            const Parameters params = init_weights(topo);
            const auto [inputs, targets] = experiment_detail::random_batch_for(topo, rng);
            const ScDeltaReport sc = sc_delta_check(topo, params, inputs, targets);
            ++report.sc_nets;
            report.sc_max_discrepancy = std::max(report.sc_max_discrepancy, sc.max_discrepancy);
            report.jsonl_records += sc.to_jsonl();
            if (sc.max_discrepancy > 1e-12) {
                report.pass = false;
                report.messages.push_back("sc-delta discrepancy " +
                                          std::to_string(sc.max_discrepancy) + " on net " +
                                          std::to_string(n));
            }
        }
    }
    return report;
}

enum class SweepParameter { sc_weight, batch_size };

inline const char* to_string(SweepParameter p) {
    return p == SweepParameter::sc_weight ? "sc_weight" : "batch_size";
}

struct SweepResult {
    std::vector<std::pair<double, RunResult>> runs;  // keyed by swept value
    std::string output_dir;
};

// One run_experiment per value with a shared seed; per-value subdirectories
// plus a summary CSV of final losses/accuracies keyed by value.
inline SweepResult sweep(const ExperimentConfig& base_cfg, SweepParameter param,
                         const std::vector<double>& values, const RunOverrides& ov = {},
                         std::ostream* log = nullptr) {
    if (values.empty()) throw ConfigError("sweep: values list must not be empty");
    namespace fs = std::filesystem;
    const fs::path out_dir = fs::absolute(experiment_detail::resolve_output_dir(
        ov.output_dir ? *ov.output_dir : base_cfg.output_dir));
    fs::create_directories(out_dir);

    SweepResult result;
    result.output_dir = out_dir.string();
    std::ostringstream summary;
    summary << to_string(param)
            << ",final_train_loss,final_train_accuracy,final_test_loss,final_test_accuracy\n";
    for (const double value : values) {
        ExperimentConfig cfg = base_cfg;
        std::string value_str;
        if (param == SweepParameter::sc_weight) {
            if (cfg.network.short_circuits.empty()) {
                throw ConfigError("sweep over sc_weight: config has no short circuits");
            }
            for (auto& sc : cfg.network.short_circuits) sc.weight = value;
            value_str = experiment_detail::num(value);
        } else {
            if (value < 1.0 || value != std::floor(value)) {
                throw ConfigError("sweep over batch_size: values must be positive integers");
            }
            cfg.train.batch_size = static_cast<std::size_t>(value);
            value_str = std::to_string(static_cast<std::size_t>(value));
        }
        RunOverrides run_ov = ov;
        run_ov.output_dir = (out_dir / (std::string(to_string(param)) + "=" + value_str)).string();
        RunResult run = run_experiment(cfg, run_ov, log);
        const MetricsRecord& last = run.records.back();
        summary << value_str << "," << experiment_detail::num(last.train_loss) << ","
                << experiment_detail::num(last.train_accuracy) << ","
                << experiment_detail::num(last.test_loss) << ","
                << experiment_detail::num(last.test_accuracy) << "\n";
        result.runs.emplace_back(value, std::move(run));
    }
    experiment_detail::write_file(out_dir / "summary.csv", summary.str());
    return result;
}

}  // namespace scnet
