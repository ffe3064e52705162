#pragma once

#include <cmath>
#include <string>

#include "scnet/error.hpp"
#include "scnet/matrix.hpp"

namespace scnet {

enum class Activation { sigmoid, relu, tanh, identity };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation parse_activation(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "identity") return Activation::identity;
    throw ConfigError("unknown activation '" + s + "'");
}

inline double activate_scalar(Activation f, double z) {
    switch (f) {
        case Activation::sigmoid:
            // Branch on sign so exp never overflows.
            if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
            {
                const double e = std::exp(z);
                return e / (1.0 + e);
            }
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::identity: return z;
    }
    return 0.0;
}

inline double activate_derivative_scalar(Activation f, double z) {
    switch (f) {
        case Activation::sigmoid: {
            const double s = activate_scalar(Activation::sigmoid, z);
            return s * (1.0 - s);
        }
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::identity: return 1.0;
    }
    return 0.0;
}

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.is_finite()) throw NumericError(std::string(what) + ": non-finite entry");
}

// Elementwise application of f.
inline Matrix activate(Activation f, const Matrix& z) {
    require_finite(z, "activate");
    Matrix out = z;
    for (double& v : out.data) v = activate_scalar(f, v);
    return out;
}

// Elementwise f'(z); the relu derivative at exactly 0 is taken as 0.
inline Matrix activate_derivative(Activation f, const Matrix& z) {
    require_finite(z, "activate_derivative");
    Matrix out = z;
    for (double& v : out.data) v = activate_derivative_scalar(f, v);
    return out;
}

}  // namespace scnet
