#pragma once

#include <string>
#include <vector>

#include "scnet/activation.hpp"
#include "scnet/error.hpp"
#include "scnet/loss.hpp"
#include "scnet/matrix.hpp"
#include "scnet/topology.hpp"

namespace scnet {

// Cached weighted sums and activations for one batch. a(0) is the input
// batch; z(l) and a(l) for l in 1..L follow the layer widths.
struct ForwardTrace {
    Matrix input;
    std::vector<Matrix> z;  // z[l-1] = weighted sums of layer l
    std::vector<Matrix> a;  // a[l-1] = activations of layer l

    const Matrix& weighted_sum(std::size_t l) const { return z[l - 1]; }
    const Matrix& activation(std::size_t l) const { return l == 0 ? input : a[l - 1]; }
    const Matrix& output() const { return a.back(); }
};

// Per-layer gradients plus the sensitivities the chain rule produced.
// deltas[l-1] is the vanilla sensitivity dJ/dZ_l; short circuits modify only
// the assembled weight/bias gradients, never the stored deltas.
struct GradientSet {
    std::vector<Matrix> weight_grads;
    std::vector<Matrix> bias_grads;
    std::vector<Matrix> deltas;
};

inline bool bitwise_equal(const GradientSet& a, const GradientSet& b) {
    if (a.weight_grads.size() != b.weight_grads.size()) return false;
    for (std::size_t i = 0; i < a.weight_grads.size(); ++i) {
        if (!bitwise_equal(a.weight_grads[i], b.weight_grads[i])) return false;
        if (!bitwise_equal(a.bias_grads[i], b.bias_grads[i])) return false;
    }
    return true;
}

namespace detail {
inline void check_layer_finite(const Matrix& m, std::size_t layer, const char* what) {
    if (!m.is_finite()) {
        throw NumericError(std::string(what) + " at layer " + std::to_string(layer) +
                           " contains a non-finite value");
    }
}
}  // namespace detail

// Feedforward pass. Short-circuit edges take no part here: they exist only
// in the backward computation. Residual layers add the identity skip after
// the activation: a_l = f(z_l) + a_{l-1}.
inline ForwardTrace forward(const ResolvedTopology& topo, const Parameters& params,
                            const Matrix& batch) {
    if (batch.cols != topo.input_width) {
        throw ShapeError("forward: batch width " + std::to_string(batch.cols) +
                         " != input width " + std::to_string(topo.input_width));
    }
    if (params.weights.size() != topo.layer_count()) {
        throw ShapeError("forward: parameter set has " + std::to_string(params.weights.size()) +
                         " layers, topology has " + std::to_string(topo.layer_count()));
    }
    ForwardTrace trace;
    trace.input = batch;
    trace.z.reserve(topo.layer_count());
    trace.a.reserve(topo.layer_count());
    const Matrix* prev = &trace.input;
    for (std::size_t l = 1; l <= topo.layer_count(); ++l) {
        const LayerSpec& spec = topo.layers[l - 1];
        Matrix z = add_row_broadcast(matmul(*prev, params.weights[l - 1]), params.biases[l - 1]);
        detail::check_layer_finite(z, l, "forward: weighted sum");
        Matrix a = activate(spec.activation, z);
        if (spec.kind == LayerKind::dense_residual) a = add(a, *prev);
        detail::check_layer_finite(a, l, "forward: activation");
        trace.z.push_back(std::move(z));
        trace.a.push_back(std::move(a));
        prev = &trace.a.back();
    }
    return trace;
}

// Backward pass. The sensitivity recursion is the vanilla chain rule:
//
//   delta_L = dJ/dZ_L                      (from the loss)
//   delta_l = f'(z_l) .* (delta_{l+1} W_{l+1}^T)   [+ residual identity path]
//
// Each short-circuit edge (front f, rear sc, weight lambda) changes only the
// gradient assembly of layer f: the weight/bias gradients use
// delta_f + lambda * delta_sc in place of delta_f. The rear sensitivity is
// used verbatim -- the Jacobian across the skipped span is truncated to
// identity, so no f' or W factor is applied along it -- and the chained
// delta passed further down is left untouched, so layers below the front
// layer see exactly the vanilla recursion.
inline GradientSet backward(const ResolvedTopology& topo, const Parameters& params,
                            const ForwardTrace& trace, const Matrix& target) {
    const std::size_t depth = topo.layer_count();
    if (trace.z.size() != depth || trace.a.size() != depth) {
        throw ShapeError("backward: trace has " + std::to_string(trace.z.size()) +
                         " layers, topology has " + std::to_string(depth));
    }
    for (std::size_t l = 1; l <= depth; ++l) {
        if (trace.z[l - 1].cols != topo.width(l) ||
            params.weights[l - 1].rows != topo.width(l - 1) ||
            params.weights[l - 1].cols != topo.width(l)) {
            throw ShapeError("backward: trace/params do not match topology at layer " +
                             std::to_string(l));
        }
    }
    require_same_shape(trace.output(), target, "backward: target");

    GradientSet grads;
    grads.weight_grads.resize(depth);
    grads.bias_grads.resize(depth);
    grads.deltas.resize(depth);

    // dJ/da_L of the batch-mean loss.
    const std::size_t batch = target.rows;
    const double inv_batch = batch == 0 ? 0.0 : 1.0 / static_cast<double>(batch);
    Matrix upstream(target.rows, target.cols);
    switch (topo.loss) {
        case Loss::half_squared_error:
            for (std::size_t i = 0; i < upstream.size(); ++i)
                upstream.data[i] = (trace.output().data[i] - target.data[i]) * inv_batch;
            break;
        case Loss::softmax_cross_entropy:
            upstream = softmax_rows(trace.output());
            for (std::size_t i = 0; i < upstream.size(); ++i)
                upstream.data[i] = (upstream.data[i] - target.data[i]) * inv_batch;
            break;
    }

    for (std::size_t l = depth; l >= 1; --l) {
        const LayerSpec& spec = topo.layers[l - 1];
        Matrix delta = hadamard(upstream, activate_derivative(spec.activation, trace.z[l - 1]));
        grads.deltas[l - 1] = std::move(delta);
        const Matrix& d = grads.deltas[l - 1];

        if (l > 1) {
            Matrix next = matmul_bt(d, params.weights[l - 1]);
            // Residual skip: dJ/da_{l-1} also receives dJ/da_l unchanged.
            if (spec.kind == LayerKind::dense_residual) next = add(next, upstream);
            upstream = std::move(next);
        }

        // Gradient assembly; short-circuit injection happens here and only here.
        const auto incoming = topo.edges_into(l);
        bool injected = false;
        Matrix summed;
        for (const auto& e : incoming) {
            if (e.weight == 0.0) continue;  // degenerates to vanilla backprop
            if (!injected) {
                summed = d;
                injected = true;
            }
            add_scaled_in_place(summed, grads.deltas[e.rear - 1], e.weight);
        }
        const Matrix& assembly = injected ? summed : d;
        grads.weight_grads[l - 1] = matmul_at(trace.activation(l - 1), assembly);
        grads.bias_grads[l - 1] = column_sums(assembly);
        detail::check_layer_finite(grads.weight_grads[l - 1], l, "backward: weight gradient");
        detail::check_layer_finite(grads.bias_grads[l - 1], l, "backward: bias gradient");
    }
    return grads;
}

// The rear layer's sensitivity as the vanilla recursion computed it,
// shape (batch x width(sc)).
inline const Matrix& sc_sensitivity(const GradientSet& grads, std::size_t sc) {
    if (sc < 1 || sc > grads.deltas.size()) {
        throw ShapeError("sc_sensitivity: layer " + std::to_string(sc) + " out of range 1.." +
                         std::to_string(grads.deltas.size()));
    }
    return grads.deltas[sc - 1];
}

// Plain descent step: every weight and bias moves by -lr * gradient.
inline void sgd_step(Parameters& params, const GradientSet& grads, double lr) {
    if (lr <= 0.0) throw ConfigError("sgd_step: learning rate must be > 0");
    if (params.weights.size() != grads.weight_grads.size()) {
        throw ShapeError("sgd_step: parameter/gradient layer count mismatch");
    }
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        add_scaled_in_place(params.weights[i], grads.weight_grads[i], -lr);
        add_scaled_in_place(params.biases[i], grads.bias_grads[i], -lr);
        if (!params.weights[i].is_finite() || !params.biases[i].is_finite()) {
            throw NumericError("sgd_step: non-finite update at layer " + std::to_string(i + 1));
        }
    }
}

struct StepResult {
    double loss = 0.0;
    GradientSet grads;
};

// forward -> backward -> sgd_step. Returns the pre-update batch loss and the
// gradients that were applied.
inline StepResult train_step(const ResolvedTopology& topo, Parameters& params,
                             const Matrix& batch, const Matrix& target, double lr) {
    StepResult result;
    const ForwardTrace trace = forward(topo, params, batch);
    result.loss = loss_value(topo.loss, trace.output(), target);
    result.grads = backward(topo, params, trace, target);
    sgd_step(params, result.grads, lr);
    return result;
}

}  // namespace scnet
