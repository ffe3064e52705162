#pragma once

#include <cmath>
#include <string>

#include "scnet/activation.hpp"
#include "scnet/error.hpp"
#include "scnet/matrix.hpp"

namespace scnet {

enum class Loss { half_squared_error, softmax_cross_entropy };

inline const char* to_string(Loss l) {
    switch (l) {
        case Loss::half_squared_error: return "half-squared-error";
        case Loss::softmax_cross_entropy: return "softmax-cross-entropy";
    }
    return "?";
}

inline Loss parse_loss(const std::string& s) {
    if (s == "half-squared-error") return Loss::half_squared_error;
    if (s == "softmax-cross-entropy") return Loss::softmax_cross_entropy;
    throw ConfigError("unknown loss '" + s + "'");
}

// Row-wise softmax, stabilized by subtracting the row max.
inline Matrix softmax_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = out.row_ptr(i);
        double mx = row[0];
        for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < m.cols; ++j) row[j] /= sum;
    }
    return out;
}

// Batch-mean loss. Averaging (rather than summing) over the batch keeps the
// learning rate independent of batch size.
inline double loss_value(Loss l, const Matrix& prediction, const Matrix& target) {
    require_same_shape(prediction, target, "loss_value");
    const std::size_t batch = prediction.rows;
    double total = 0.0;
    switch (l) {
        case Loss::half_squared_error:
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                const double d = prediction.data[i] - target.data[i];
                total += 0.5 * d * d;
            }
            break;
        case Loss::softmax_cross_entropy:
            // -sum d_j log softmax(pred)_j per row, via log-sum-exp.
            for (std::size_t i = 0; i < prediction.rows; ++i) {
                const double* p = prediction.row_ptr(i);
                const double* d = target.row_ptr(i);
                double mx = p[0];
                for (std::size_t j = 1; j < prediction.cols; ++j) mx = std::max(mx, p[j]);
                double lse = 0.0;
                for (std::size_t j = 0; j < prediction.cols; ++j) lse += std::exp(p[j] - mx);
                lse = std::log(lse) + mx;
                for (std::size_t j = 0; j < prediction.cols; ++j) total += d[j] * (lse - p[j]);
            }
            break;
    }
    return batch == 0 ? 0.0 : total / static_cast<double>(batch);
}

// Sensitivity of the batch-mean loss at the output weighted sums:
// delta_L = dJ/dZ_L, with prediction = f(Z_L) elementwise. For
// half-squared-error this is f'(Z_L) .* (prediction - target) / batch; for
// softmax-cross-entropy it is f'(Z_L) .* (softmax(prediction) - target) / batch,
// which with an identity output activation reduces to the familiar
// (softmax(Z_L) - target) / batch.
inline Matrix loss_output_sensitivity(Loss l, const Matrix& prediction, const Matrix& target,
                                      const Matrix& z_last, Activation f) {
    require_same_shape(prediction, target, "loss_output_sensitivity");
    require_same_shape(prediction, z_last, "loss_output_sensitivity");
    const double inv_batch = prediction.rows == 0 ? 0.0 : 1.0 / static_cast<double>(prediction.rows);
    Matrix grad_out(prediction.rows, prediction.cols);
    switch (l) {
        case Loss::half_squared_error:
            for (std::size_t i = 0; i < grad_out.size(); ++i)
                grad_out.data[i] = (prediction.data[i] - target.data[i]) * inv_batch;
            break;
        case Loss::softmax_cross_entropy: {
            grad_out = softmax_rows(prediction);
            for (std::size_t i = 0; i < grad_out.size(); ++i)
                grad_out.data[i] = (grad_out.data[i] - target.data[i]) * inv_batch;
            break;
        }
    }
    return hadamard(grad_out, activate_derivative(f, z_last));
}

}  // namespace scnet
