// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier experiment criteria run on MNIST-shaped data; set
// --mnist (or SCNET_MNIST_DIR) to use real IDX files, otherwise a synthetic
// stand-in corpus is generated into the work directory.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "scnet/config.hpp"
#include "scnet/datagen.hpp"
#include "scnet/engine.hpp"
#include "scnet/experiment.hpp"
#include "scnet/verify.hpp"

namespace fs = std::filesystem;
using namespace scnet;

namespace {

struct Criterion {
    std::string name;
    std::function<void()> body;
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw Failure(what);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(in.good(), "cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

NetworkConfig dense_stack(std::size_t input, const std::vector<std::size_t>& widths,
                          Activation act, Loss loss, std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.input_width = input;
    for (std::size_t w : widths) cfg.layers.push_back({LayerKind::dense, w, act});
    cfg.loss = loss;
    cfg.seed = seed;
    return cfg;
}

ResolvedTopology resolve(const NetworkConfig& cfg) {
    const ValidationResult v = validate(cfg);
    require(v.ok(), "expected a valid topology");
    return *v.topology;
}

Matrix random_batch(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0,
                    double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

Matrix one_hot(std::size_t rows, std::size_t classes, Rng& rng) {
    Matrix m(rows, classes);
    for (std::size_t i = 0; i < rows; ++i) m(i, rng.bounded(classes)) = 1.0;
    return m;
}

fs::path g_configs = "configs";
fs::path g_work = "acceptance-work";
std::string g_mnist_dir;  // empty: synthesize

// Shared state between the MNIST criteria so the heavy pair trains once.
struct MnistPairState {
    bool ran = false;
    PairResult pair;
    double wall_s = 0.0;
} g_mnist_pair;

std::string mnist_data_dir() {
    if (!g_mnist_dir.empty()) return g_mnist_dir;
    const fs::path dir = g_work / "data" / "mnist";
    if (!fs::exists(dir / "train-images-idx3-ubyte")) {
        std::cout << "  (generating synthetic MNIST-shaped corpus under " << dir.string()
                  << ")\n";
        write_mnist_like(dir.string());
    }
    return dir.string();
}

ExperimentConfig load_preset(const std::string& name) {
    return load_experiment_config((g_configs / name).string());
}

ExperimentConfig load_mnist_preset(const std::string& name, const std::string& out_name) {
    ExperimentConfig cfg = load_preset(name);
    cfg.mnist.dir = mnist_data_dir();
    cfg.output_dir = (g_work / out_name).string();
    return cfg;
}

void run_mnist_pair_once() {
    if (g_mnist_pair.ran) return;
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig baseline = load_mnist_preset("fcn-mnist-baseline.conf", "fcn-baseline");
    const ExperimentConfig sc = load_mnist_preset("fcn-mnist-sc.conf", "fcn-sc");
    g_mnist_pair.pair = run_pair(baseline, sc, (g_work / "fcn-pair").string());
    g_mnist_pair.wall_s = seconds_since(t0);
    g_mnist_pair.ran = true;
}

// --- criteria ---------------------------------------------------------------

void criterion_fd_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr Activation kActs[] = {Activation::sigmoid, Activation::relu, Activation::tanh,
                                    Activation::identity};
    constexpr Loss kLosses[] = {Loss::half_squared_error, Loss::softmax_cross_entropy};
    Rng rng(20240601);
    std::size_t nets = 0, params_checked = 0, params_skipped = 0;
    for (const Loss loss : kLosses) {
        for (const Activation act : kActs) {
            for (int trial = 0; trial < 13; ++trial) {
                const std::size_t depth = 2 + rng.bounded(3);
                const std::size_t width = 2 + rng.bounded(7);
                NetworkConfig net =
                    dense_stack(2 + rng.bounded(7), std::vector<std::size_t>(depth, width), act,
                                loss, rng.next_u64());
                const ResolvedTopology topo = resolve(net);
                const Parameters params = init_weights(topo);
                const std::size_t batch_n = 1 + rng.bounded(4);
                const Matrix batch = random_batch(batch_n, net.input_width, rng);
                const Matrix targets = loss == Loss::softmax_cross_entropy
                                           ? one_hot(batch_n, width, rng)
                                           : random_batch(batch_n, width, rng);
                const ForwardTrace trace = forward(topo, params, batch);
                const GradientSet analytic = backward(topo, params, trace, targets);
                GradientSet comparable;
                const GradientSet fd =
                    fd_gradient(topo, params, batch, targets, FdConfig{}, &comparable);
                const CheckReport check = check_gradients(analytic, fd, FdConfig{}, &comparable);
                if (!check.pass()) {
                    throw Failure("net " + std::to_string(nets) + " (" + to_string(act) + "/" +
                                  to_string(loss) + "): " + check.to_text());
                }
                params_checked += check.checked;
                params_skipped += check.skipped;
                ++nets;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    require(nets >= 100, "expected at least 100 networks, ran " + std::to_string(nets));
    require(elapsed < 60.0, "runtime " + std::to_string(elapsed) + "s exceeds 1 minute");
    std::cout << "  " << nets << " nets, " << params_checked << " parameters within tolerance, "
              << params_skipped << " relu-kink parameters skipped, " << elapsed << "s\n";
}

ExperimentConfig degeneracy_blob_config(const std::string& out_name) {
    ExperimentConfig cfg;
    cfg.seed = 4242;
    cfg.output_dir = (g_work / out_name).string();
    cfg.source = DataSource::blobs;
    cfg.blobs = BlobsSpec{4, 60, 6, 2.5, 15};
    cfg.network =
        dense_stack(6, {12, 12, 12, 4}, Activation::sigmoid, Loss::softmax_cross_entropy,
                    cfg.seed);
    cfg.train.learning_rate = 0.1;
    cfg.train.epochs = 10;
    cfg.train.batch_size = 16;
    cfg.telemetry.record_mean_gradients = true;
    return cfg;
}

void criterion_sc_degeneracy() {
    ExperimentConfig plain = degeneracy_blob_config("degen-plain");
    ExperimentConfig zero = degeneracy_blob_config("degen-zero");
    ShortCircuitSpec sc;
    sc.rear_layer = 3;
    sc.front_layers = {1, 2};
    sc.weight = 0.0;
    zero.network.short_circuits.push_back(sc);
    run_experiment(plain);
    run_experiment(zero);
    require(read_file(fs::path(plain.output_dir) / "metrics.jsonl") ==
                read_file(fs::path(zero.output_dir) / "metrics.jsonl"),
            "metrics.jsonl differ between lambda=0 and no-SC runs");
    require(read_file(fs::path(plain.output_dir) / "params.bin") ==
                read_file(fs::path(zero.output_dir) / "params.bin"),
            "final parameters differ between lambda=0 and no-SC runs");
    std::cout << "  10-epoch lambda=0 and SC-free trajectories are byte-identical\n";
}

void criterion_sc_delta_identity() {
    VerifyOptions opts;
    opts.nets = 60;
    opts.seed = 77;
    const VerifyReport report = run_verify(VerifyScope::sc_delta, opts);
    require(report.pass, report.to_text());
    require(report.sc_max_discrepancy <= 1e-12,
            "max discrepancy " + std::to_string(report.sc_max_discrepancy));
    std::cout << "  " << report.sc_nets << " randomized SC topologies, max discrepancy "
              << report.sc_max_discrepancy << "\n";
}

void criterion_truncation_identity() {
    const std::size_t width = 4, depth = 8;
    NetworkConfig plain = dense_stack(width, std::vector<std::size_t>(depth, width),
                                      Activation::identity, Loss::half_squared_error, 0);
    NetworkConfig injected_cfg = plain;
    ShortCircuitSpec sc;
    sc.rear_layer = 7;
    sc.front_layers = {3};
    sc.weight = 1.0;
    injected_cfg.short_circuits.push_back(sc);
    const ResolvedTopology topo_plain = resolve(plain);
    const ResolvedTopology topo_sc = resolve(injected_cfg);
    Parameters params;
    for (std::size_t l = 0; l < depth; ++l) {
        params.weights.push_back(Matrix::identity(width));
        params.biases.emplace_back(1, width);
    }
    const Matrix batch = Matrix::identity(width);
    Rng rng(31337);
    const Matrix target = random_batch(width, width, rng, 0.1, 0.9);
    const ForwardTrace trace = forward(topo_plain, params, batch);
    const GradientSet vanilla = backward(topo_plain, params, trace, target);
    const GradientSet with_sc = backward(topo_sc, params, trace, target);
    const Matrix contribution = subtract(with_sc.weight_grads[2], vanilla.weight_grads[2]);
    require(bitwise_equal(contribution, sc_sensitivity(vanilla, 7)),
            "SC contribution at the front layer is not the rear sensitivity verbatim");
    std::cout << "  8-layer identity chain: SC contribution equals delta_rear elementwise\n";
}

void criterion_downstream_noncontamination() {
    NetworkConfig plain = dense_stack(5, {7, 7, 7, 7, 7, 4}, Activation::sigmoid,
                                      Loss::softmax_cross_entropy, 99);
    NetworkConfig with_sc = plain;
    ShortCircuitSpec sc1, sc2;
    sc1.rear_layer = 5;
    sc1.front_layers = {3};
    sc1.weight = 0.4;
    sc2.rear_layer = 4;
    sc2.front_layers = {3};
    sc2.weight = 0.1;
    with_sc.short_circuits = {sc1, sc2};
    const ResolvedTopology topo_plain = resolve(plain);
    const ResolvedTopology topo_sc = resolve(with_sc);
    const Parameters params = init_weights(topo_plain);
    Rng rng(100);
    const Matrix batch = random_batch(3, 5, rng);
    const Matrix target = one_hot(3, 4, rng);
    const ForwardTrace trace = forward(topo_plain, params, batch);
    const GradientSet vanilla = backward(topo_plain, params, trace, target);
    const GradientSet injected = backward(topo_sc, params, trace, target);
    for (const std::size_t l : {std::size_t(0), std::size_t(1)}) {  // layers 1..2, below front 3
        require(bitwise_equal(injected.weight_grads[l], vanilla.weight_grads[l]),
                "weight gradients contaminated at layer " + std::to_string(l + 1));
        require(bitwise_equal(injected.bias_grads[l], vanilla.bias_grads[l]),
                "bias gradients contaminated at layer " + std::to_string(l + 1));
        require(bitwise_equal(injected.deltas[l], vanilla.deltas[l]),
                "sensitivities contaminated at layer " + std::to_string(l + 1));
    }
    std::cout << "  gradients below the lowest SC front layer are bitwise equal\n";
}

void criterion_gradient_decay() {
    run_mnist_pair_once();
    const MetricsRecord& base_ep1 = g_mnist_pair.pair.a.records.front();
    const MetricsRecord& sc_ep1 = g_mnist_pair.pair.b.records.front();
    require(base_ep1.has_layer_stats && sc_ep1.has_layer_stats,
            "epoch-1 telemetry missing from the preset runs");
    const double l1 = base_ep1.layer_stats[0].abs_mean;
    const double l4 = base_ep1.layer_stats[3].abs_mean;
    require(l1 * 10.0 <= l4, "layer-1 abs mean " + std::to_string(l1) +
                                 " not 10x below layer-4 " + std::to_string(l4));
    const double base_l2 = base_ep1.layer_stats[1].abs_mean;
    const double sc_l2 = sc_ep1.layer_stats[1].abs_mean;
    require(sc_l2 > base_l2, "SC layer-2 abs mean " + std::to_string(sc_l2) +
                                 " does not exceed baseline " + std::to_string(base_l2));
    require(g_mnist_pair.wall_s < 300.0,
            "pair runtime " + std::to_string(g_mnist_pair.wall_s) + "s exceeds 5 minutes");
    std::cout << "  epoch 1: layer-4/layer-1 abs-mean ratio " << (l4 / l1)
              << ", SC layer-2 enhancement x" << (sc_l2 / base_l2) << " (" << g_mnist_pair.wall_s
              << "s for both 10-epoch runs)\n";
}

void criterion_convergence_direction() {
    run_mnist_pair_once();
    const double base_final = g_mnist_pair.pair.a.records.back().train_loss;
    const double sc_final = g_mnist_pair.pair.b.records.back().train_loss;
    require(sc_final <= base_final, "SC final train loss " + std::to_string(sc_final) +
                                        " exceeds baseline " + std::to_string(base_final));
    std::cout << "  10-epoch final train loss: SC " << sc_final << " <= baseline " << base_final
              << "\n";
}

void criterion_resmlp_smoke() {
    ExperimentConfig sc_cfg = load_preset("resmlp-sc.conf");
    sc_cfg.output_dir = (g_work / "resmlp-sc").string();
    ExperimentConfig base_cfg = sc_cfg;
    base_cfg.network.short_circuits.clear();
    base_cfg.output_dir = (g_work / "resmlp-base").string();

    const RunResult sc_run = run_experiment(sc_cfg);      // must not abort
    const RunResult base_run = run_experiment(base_cfg);  // the recorded oracle
    const double base_acc = base_run.records.back().train_accuracy;
    const double sc_acc = sc_run.records.back().train_accuracy;
    require(base_acc >= 0.95, "baseline oracle accuracy " + std::to_string(base_acc) +
                                  " below 0.95; separation needs retuning");
    require(sc_acc >= 0.95, "resmlp-sc accuracy " + std::to_string(sc_acc) + " below 0.95");

    // criteria 2-5 restated on this topology
    const ResolvedTopology topo = sc_run.topology;
    require(topo.edges.size() == 2 && topo.edges[0].front == 4 && topo.edges[1].front == 8,
            "gap form k=4, rear 9 should expand to fronts {4, 8}");
    ExperimentConfig zero_cfg = sc_cfg;
    for (auto& s : zero_cfg.network.short_circuits) s.weight = 0.0;
    zero_cfg.output_dir = (g_work / "resmlp-zero").string();
    run_experiment(zero_cfg);
    require(read_file(fs::path(base_cfg.output_dir) / "metrics.jsonl") ==
                read_file(fs::path(zero_cfg.output_dir) / "metrics.jsonl"),
            "lambda=0 resmlp trajectory differs from the SC-free run");

    const Dataset blobs =
        synth_blobs(sc_cfg.blobs.classes, 40, sc_cfg.blobs.dims, sc_cfg.blobs.separation, 5);
    const Parameters params = init_weights(topo);
    const ScDeltaReport delta = sc_delta_check(topo, params, blobs.inputs, blobs.targets);
    require(delta.max_discrepancy <= 1e-12,
            "sc-delta discrepancy " + std::to_string(delta.max_discrepancy));

    const ForwardTrace trace = forward(topo, params, blobs.inputs);
    const GradientSet vanilla =
        backward(topo.without_short_circuits(), params, trace, blobs.targets);
    const GradientSet injected = backward(topo, params, trace, blobs.targets);
    for (std::size_t l = 0; l < 3; ++l) {  // layers 1..3 sit below front 4
        require(bitwise_equal(injected.weight_grads[l], vanilla.weight_grads[l]),
                "resmlp contamination below the lowest front layer");
    }
    std::cout << "  resmlp-sc " << sc_acc * 100 << "% / baseline " << base_acc * 100
              << "% train accuracy; degeneracy, sc-delta and containment hold on its topology\n";
}

void criterion_determinism() {
    ExperimentConfig first = load_preset("resmlp-sc.conf");
    first.output_dir = (g_work / "det-a").string();
    ExperimentConfig second = load_preset("resmlp-sc.conf");
    second.output_dir = (g_work / "det-b").string();
    run_experiment(first);
    run_experiment(second);
    require(read_file(g_work / "det-a" / "metrics.jsonl") ==
                read_file(g_work / "det-b" / "metrics.jsonl"),
            "resmlp-sc preset re-run changed metrics.jsonl");

    // the MNIST preset, shortened to one epoch, twice with identical config
    RunOverrides ov;
    ov.epochs = 1;
    ExperimentConfig ma = load_mnist_preset("fcn-mnist-sc.conf", "det-mnist-a");
    ExperimentConfig mb = load_mnist_preset("fcn-mnist-sc.conf", "det-mnist-b");
    run_experiment(ma, ov);
    run_experiment(mb, ov);
    require(read_file(g_work / "det-mnist-a" / "metrics.jsonl") ==
                read_file(g_work / "det-mnist-b" / "metrics.jsonl"),
            "fcn-mnist-sc re-run changed metrics.jsonl");
    std::cout << "  preset re-runs reproduce metrics.jsonl byte-for-byte\n";
}

void criterion_data_format() {
    const std::string dir = mnist_data_dir();
    const Dataset train =
        load_mnist_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    const Dataset test =
        load_mnist_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    require(train.sample_count() == 60000, "train split is not 60000 samples");
    require(test.sample_count() == 10000, "test split is not 10000 samples");
    require(train.feature_count() == 784, "images are not 28x28");
    require(train.class_count == 10, "expected 10 classes");

    const fs::path bad = g_work / "bad-magic-idx";
    {
        std::ofstream out(bad, std::ios::binary);
        const unsigned char bytes[] = {0x00, 0x00, 0x09, 0x03, 0x00, 0x00, 0x00, 0x00,
                                       0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02};
        out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
    }
    bool rejected = false;
    try {
        (void)load_mnist_idx(bad.string(), dir + "/train-labels-idx1-ubyte");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        rejected = msg.find("bad magic 0x00000903") != std::string::npos &&
                   msg.find("offset 0") != std::string::npos;
    }
    require(rejected, "corrupted magic was not rejected with an offset-naming parse error");
    std::cout << "  60000/10000 canonical split accepted; corrupted magic rejected at offset 0\n";
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) {
                std::cerr << "missing value for " << arg << "\n";
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--configs") g_configs = next();
        else if (arg == "--work") g_work = next();
        else if (arg == "--mnist") g_mnist_dir = next();
        else {
            std::cerr << "usage: acceptance [--configs DIR] [--work DIR] [--mnist DIR]\n";
            return 2;
        }
    }
    if (const char* env = std::getenv("SCNET_MNIST_DIR"); env && g_mnist_dir.empty()) {
        g_mnist_dir = env;
    }
    fs::create_directories(g_work);

    const std::vector<Criterion> criteria = {
        {"1. FD-oracle equivalence on 104 random small networks", criterion_fd_equivalence},
        {"2. SC degeneracy: lambda=0 trajectories are byte-identical", criterion_sc_degeneracy},
        {"3. SC-delta algebraic identity on randomized topologies", criterion_sc_delta_identity},
        {"4. Truncation identity through an identity chain", criterion_truncation_identity},
        {"5. Downstream non-contamination below SC front layers",
         criterion_downstream_noncontamination},
        {"6. Gradient-decay reproduction on the 5-layer sigmoid FCN pair",
         criterion_gradient_decay},
        {"7. Convergence direction: SC final train loss <= baseline",
         criterion_convergence_direction},
        {"8. Residual-MLP SC smoke with gap-form short circuits", criterion_resmlp_smoke},
        {"9. Determinism: preset re-runs reproduce metrics byte-for-byte",
         criterion_determinism},
        {"10. IDX data-format fidelity and corruption rejection", criterion_data_format},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        try {
            criterion.body();
            std::cout << "[PASS] " << criterion.name << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "[FAIL] " << criterion.name << "\n       " << e.what() << "\n";
        }
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
