#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scnet/engine.hpp"
#include "scnet/error.hpp"
#include "scnet/matrix.hpp"
#include "scnet/topology.hpp"

namespace scnet {

struct FdConfig {
    double epsilon = 1e-5;
    double tolerance_rel = 1e-5;
    double tolerance_abs = 1e-8;
    // fd_gradient costs two forward passes per scalar parameter; refuse
    // networks beyond this cap rather than silently grinding.
    std::size_t max_parameters = 200000;
};

namespace detail {

inline double loss_at(const ResolvedTopology& topo, const Parameters& params,
                      const Matrix& batch, const Matrix& target) {
    const ForwardTrace trace = forward(topo, params, batch);
    return loss_value(topo.loss, trace.output(), target);
}

// Sign pattern of relu weighted sums; a parameter whose perturbation flips
// any of these crosses a kink, where central differences are unreliable.
inline std::vector<bool> relu_sign_pattern(const ResolvedTopology& topo,
                                           const ForwardTrace& trace) {
    std::vector<bool> pattern;
    for (std::size_t l = 1; l <= topo.layer_count(); ++l) {
        if (topo.layers[l - 1].activation != Activation::relu) continue;
        for (double v : trace.z[l - 1].data) pattern.push_back(v > 0.0);
    }
    return pattern;
}

}  // namespace detail

// Central-difference gradient of the vanilla loss for every weight and bias.
// Short-circuit edges are ignored on purpose: the SC update direction is not
// the gradient of any scalar objective, so it has no finite-difference
// counterpart; it is checked algebraically by sc_delta_check instead.
// When `comparable` is non-null it receives 1/0 masks flagging parameters
// whose perturbation crossed a relu kink (0 = not comparable).
inline GradientSet fd_gradient(const ResolvedTopology& topo, const Parameters& params,
                               const Matrix& batch, const Matrix& target,
                               const FdConfig& cfg = {}, GradientSet* comparable = nullptr) {
    if (cfg.epsilon <= 0.0) throw ConfigError("fd_gradient: epsilon must be > 0");
    if (params.scalar_count() > cfg.max_parameters) {
        throw BudgetError("fd_gradient: " + std::to_string(params.scalar_count()) +
                          " parameters exceed the cap of " + std::to_string(cfg.max_parameters));
    }
    const ResolvedTopology vanilla = topo.without_short_circuits();
    const bool has_relu =
        std::any_of(vanilla.layers.begin(), vanilla.layers.end(),
                    [](const LayerSpec& s) { return s.activation == Activation::relu; });

    GradientSet fd;
    Parameters work = params;
    if (comparable) *comparable = GradientSet{};

    auto fd_matrix = [&](Matrix& m, Matrix* mask) {
        Matrix out(m.rows, m.cols);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double saved = m.data[i];
            bool ok = true;

            m.data[i] = saved + cfg.epsilon;
            double plus, minus;
            if (has_relu && mask) {
                const ForwardTrace tp = forward(vanilla, work, batch);
                plus = loss_value(vanilla.loss, tp.output(), target);
                const auto pattern_plus = detail::relu_sign_pattern(vanilla, tp);
                m.data[i] = saved - cfg.epsilon;
                const ForwardTrace tm = forward(vanilla, work, batch);
                minus = loss_value(vanilla.loss, tm.output(), target);
                ok = pattern_plus == detail::relu_sign_pattern(vanilla, tm);
            } else {
                plus = detail::loss_at(vanilla, work, batch, target);
                m.data[i] = saved - cfg.epsilon;
                minus = detail::loss_at(vanilla, work, batch, target);
            }
            m.data[i] = saved;
            out.data[i] = (plus - minus) / (2.0 * cfg.epsilon);
            if (mask) mask->data[i] = ok ? 1.0 : 0.0;
        }
        return out;
    };

    for (std::size_t l = 0; l < work.weights.size(); ++l) {
        Matrix wmask(work.weights[l].rows, work.weights[l].cols, 1.0);
        Matrix bmask(work.biases[l].rows, work.biases[l].cols, 1.0);
        fd.weight_grads.push_back(fd_matrix(work.weights[l], comparable ? &wmask : nullptr));
        fd.bias_grads.push_back(fd_matrix(work.biases[l], comparable ? &bmask : nullptr));
        if (comparable) {
            comparable->weight_grads.push_back(std::move(wmask));
            comparable->bias_grads.push_back(std::move(bmask));
        }
    }
    return fd;
}

struct CheckEntry {
    bool is_bias = false;
    std::size_t layer = 0;  // 1-based
    std::size_t row = 0;
    std::size_t col = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;

    std::string coordinate() const {
        std::ostringstream os;
        os << (is_bias ? "bias" : "weight") << " layer " << layer << " (" << row << "," << col
           << ")";
        return os.str();
    }
};

struct CheckReport {
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::vector<CheckEntry> failures;
    std::optional<CheckEntry> worst;  // largest absolute discrepancy overall

    bool pass() const { return failures.empty(); }

    std::string to_text() const {
        std::ostringstream os;
        os << (pass() ? "PASS" : "FAIL") << ": " << checked << " parameters checked, "
           << failures.size() << " failed, " << skipped << " skipped\n";
        if (worst) {
            os << "worst offender: " << worst->coordinate() << " lhs=" << worst->lhs
               << " rhs=" << worst->rhs << " |diff|=" << worst->abs_diff << "\n";
        }
        for (const auto& f : failures) {
            os << "  mismatch at " << f.coordinate() << ": lhs=" << f.lhs << " rhs=" << f.rhs
               << " |diff|=" << f.abs_diff << "\n";
        }
        return os.str();
    }

    // One JSON object per failing coordinate.
    std::string to_jsonl() const {
        std::ostringstream os;
        for (const auto& f : failures) {
            os << "{\"kind\":\"" << (f.is_bias ? "bias" : "weight") << "\",\"layer\":" << f.layer
               << ",\"row\":" << f.row << ",\"col\":" << f.col << ",\"lhs\":" << f.lhs
               << ",\"rhs\":" << f.rhs << ",\"abs_diff\":" << f.abs_diff << "}\n";
        }
        return os.str();
    }
};

// Symmetric tolerance: a and b agree when
// |a-b| <= max(tolerance_abs, tolerance_rel * max(|a|,|b|)).
inline bool values_agree(double a, double b, const FdConfig& cfg) {
    const double diff = std::fabs(a - b);
    const double magnitude = std::max(std::fabs(a), std::fabs(b));
    return diff <= std::max(cfg.tolerance_abs, cfg.tolerance_rel * magnitude);
}

// Per-parameter comparison of two gradient sets under the max(rel, abs)
// tolerance. `comparable` masks (from fd_gradient) exclude kink-crossing
// parameters from the verdict.
inline CheckReport check_gradients(const GradientSet& lhs, const GradientSet& rhs,
                                   const FdConfig& cfg = {},
                                   const GradientSet* comparable = nullptr) {
    if (lhs.weight_grads.size() != rhs.weight_grads.size()) {
        throw ShapeError("check_gradients: layer count mismatch");
    }
    CheckReport report;
    auto check_matrix = [&](const Matrix& a, const Matrix& b, const Matrix* mask, bool is_bias,
                            std::size_t layer) {
        require_same_shape(a, b, "check_gradients");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (mask && mask->data[i] == 0.0) {
                ++report.skipped;
                continue;
            }
            ++report.checked;
            CheckEntry e;
            e.is_bias = is_bias;
            e.layer = layer;
            e.row = i / a.cols;
            e.col = i % a.cols;
            e.lhs = a.data[i];
            e.rhs = b.data[i];
            e.abs_diff = std::fabs(a.data[i] - b.data[i]);
            if (!report.worst || e.abs_diff > report.worst->abs_diff) report.worst = e;
            if (!values_agree(a.data[i], b.data[i], cfg)) report.failures.push_back(e);
        }
    };
    for (std::size_t l = 0; l < lhs.weight_grads.size(); ++l) {
        check_matrix(lhs.weight_grads[l], rhs.weight_grads[l],
                     comparable ? &comparable->weight_grads[l] : nullptr, false, l + 1);
        check_matrix(lhs.bias_grads[l], rhs.bias_grads[l],
                     comparable ? &comparable->bias_grads[l] : nullptr, true, l + 1);
    }
    return report;
}

// Per-layer scalar summary of the weight-gradient entries: the signed mean
// and the mean magnitude. The signed mean tracks the positive-to-negative
// drift over training; the absolute mean tracks gradient scale across depth.
struct LayerGradientStat {
    std::size_t layer = 0;  // 1-based
    double signed_mean = 0.0;
    double abs_mean = 0.0;
};

inline std::vector<LayerGradientStat> mean_gradient_profile(const GradientSet& grads) {
    std::vector<LayerGradientStat> stats;
    for (std::size_t l = 0; l < grads.weight_grads.size(); ++l) {
        const Matrix& g = grads.weight_grads[l];
        LayerGradientStat s;
        s.layer = l + 1;
        if (!g.empty()) {
            double sum = 0.0, abs_sum = 0.0;
            for (double v : g.data) {
                sum += v;
                abs_sum += std::fabs(v);
            }
            s.signed_mean = sum / static_cast<double>(g.size());
            s.abs_mean = abs_sum / static_cast<double>(g.size());
        }
        stats.push_back(s);
    }
    return stats;
}

struct ScDeltaLayerCheck {
    std::size_t front = 0;
    double weight_discrepancy = 0.0;
    double bias_discrepancy = 0.0;
};

struct ScDeltaReport {
    double max_discrepancy = 0.0;
    std::vector<ScDeltaLayerCheck> layers;

    std::string to_text() const {
        std::ostringstream os;
        os << "sc-delta check: max discrepancy " << max_discrepancy << "\n";
        for (const auto& l : layers) {
            os << "  front layer " << l.front << ": weight " << l.weight_discrepancy << " bias "
               << l.bias_discrepancy << "\n";
        }
        return os.str();
    }

    std::string to_jsonl() const {
        std::ostringstream os;
        for (const auto& l : layers) {
            os << "{\"front\":" << l.front << ",\"weight_discrepancy\":" << l.weight_discrepancy
               << ",\"bias_discrepancy\":" << l.bias_discrepancy << "}\n";
        }
        return os.str();
    }
};

// Verifies the injection algebra on one trace: for every front layer l,
// grad_sc[l] - grad_vanilla[l] must equal the independently recomputed
// sum over incoming edges of lambda * (a_{l-1}^T delta_rear), and likewise
// for biases with column sums. Any discrepancy beyond float re-association
// means the injection site or scaling is wrong.
inline ScDeltaReport sc_delta_check(const ResolvedTopology& topo, const Parameters& params,
                                    const Matrix& batch, const Matrix& target) {
    const ForwardTrace trace = forward(topo, params, batch);
    const GradientSet with_sc = backward(topo, params, trace, target);
    const GradientSet vanilla = backward(topo.without_short_circuits(), params, trace, target);

    ScDeltaReport report;
    for (std::size_t l = 1; l <= topo.layer_count(); ++l) {
        const auto incoming = topo.edges_into(l);
        if (incoming.empty()) continue;
        Matrix expected_w(with_sc.weight_grads[l - 1].rows, with_sc.weight_grads[l - 1].cols);
        Matrix expected_b(1, with_sc.bias_grads[l - 1].cols);
        for (const auto& e : incoming) {
            const Matrix& rear_delta = vanilla.deltas[e.rear - 1];
            add_scaled_in_place(expected_w, matmul_at(trace.activation(l - 1), rear_delta),
                                e.weight);
            add_scaled_in_place(expected_b, column_sums(rear_delta), e.weight);
        }
        ScDeltaLayerCheck check;
        check.front = l;
        check.weight_discrepancy = max_abs_diff(
            subtract(with_sc.weight_grads[l - 1], vanilla.weight_grads[l - 1]), expected_w);
        check.bias_discrepancy = max_abs_diff(
            subtract(with_sc.bias_grads[l - 1], vanilla.bias_grads[l - 1]), expected_b);
        report.max_discrepancy = std::max(
            {report.max_discrepancy, check.weight_discrepancy, check.bias_discrepancy});
        report.layers.push_back(check);
    }
    return report;
}

}  // namespace scnet
