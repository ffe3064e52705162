#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scnet/activation.hpp"
#include "scnet/error.hpp"
#include "scnet/loss.hpp"
#include "scnet/matrix.hpp"
#include "scnet/rng.hpp"

namespace scnet {

enum class LayerKind { dense, dense_residual };

inline const char* to_string(LayerKind k) {
    return k == LayerKind::dense ? "dense" : "residual";
}

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t width = 0;
    Activation activation = Activation::sigmoid;
};

// A short circuit: a backward-only connection from a rear layer to one or
// more front layers. The front set is given either explicitly or as a skip
// gap k (every layer l with l mod k == 0 and l < rear receives it). Layer
// indices are 1-based throughout.
struct ShortCircuitSpec {
    std::size_t rear_layer = 0;
    std::vector<std::size_t> front_layers;  // explicit form
    std::optional<std::size_t> skip_gap;    // gap form; exactly one form is set
    double weight = 0.2;
};

struct NetworkConfig {
    std::size_t input_width = 0;
    std::vector<LayerSpec> layers;
    std::vector<ShortCircuitSpec> short_circuits;
    Loss loss = Loss::half_squared_error;
    std::uint64_t seed = 0;
};

// One expanded short-circuit edge. During backward, the weight and bias
// gradients of layer `front` are assembled from delta_front + weight * delta_rear.
struct ScEdge {
    std::size_t front = 0;
    std::size_t rear = 0;
    double weight = 0.2;
};

inline bool operator==(const ScEdge& a, const ScEdge& b) {
    return a.front == b.front && a.rear == b.rear && a.weight == b.weight;
}

// Front-layer selection rule for the gap form: { l : l mod k == 0, l < sc }.
// With 1-based indices this never selects layer 1; use the explicit form to
// target layer 1.
inline std::vector<std::size_t> plan_sc_layers(std::size_t total_layers, std::size_t sc,
                                               std::size_t k) {
    if (k == 0) throw ConfigError("plan_sc_layers: skip gap k must be >= 1");
    if (sc < 1 || sc > total_layers) {
        throw ConfigError("plan_sc_layers: rear layer " + std::to_string(sc) +
                          " out of range 1.." + std::to_string(total_layers));
    }
    std::vector<std::size_t> fronts;
    for (std::size_t l = k; l < sc; l += k) fronts.push_back(l);
    return fronts;
}

// Structurally checked network: explicit edge list, resolved widths.
struct ResolvedTopology {
    std::size_t input_width = 0;
    std::vector<LayerSpec> layers;
    std::vector<ScEdge> edges;
    Loss loss = Loss::half_squared_error;
    std::uint64_t seed = 0;

    std::size_t layer_count() const { return layers.size(); }

    // Width of layer l, 1-based; width(0) is the input width.
    std::size_t width(std::size_t l) const {
        return l == 0 ? input_width : layers[l - 1].width;
    }

    std::vector<ScEdge> edges_into(std::size_t front) const {
        std::vector<ScEdge> out;
        for (const auto& e : edges)
            if (e.front == front) out.push_back(e);
        return out;
    }

    bool has_edges() const { return !edges.empty(); }

    ResolvedTopology without_short_circuits() const {
        ResolvedTopology t = *this;
        t.edges.clear();
        return t;
    }

    // Equivalent declarative config with every edge in explicit form.
    NetworkConfig to_config() const {
        NetworkConfig cfg;
        cfg.input_width = input_width;
        cfg.layers = layers;
        cfg.loss = loss;
        cfg.seed = seed;
        for (const auto& e : edges) {
            ShortCircuitSpec sc;
            sc.rear_layer = e.rear;
            sc.front_layers = {e.front};
            sc.weight = e.weight;
            cfg.short_circuits.push_back(sc);
        }
        return cfg;
    }
};

struct ValidationResult {
    std::optional<ResolvedTopology> topology;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && topology.has_value(); }
};

// Total structural validation: returns either a resolved topology or the
// complete list of violations, never a partial result and never a throw for
// malformed content.
inline ValidationResult validate(const NetworkConfig& cfg) {
    ValidationResult res;
    auto& errs = res.errors;
    const std::size_t depth = cfg.layers.size();

    if (cfg.input_width < 1) errs.push_back("input width must be >= 1");
    if (depth == 0) errs.push_back("network must have at least one layer");

    auto width_of = [&](std::size_t l) -> std::size_t {
        return l == 0 ? cfg.input_width : cfg.layers[l - 1].width;
    };

    for (std::size_t l = 1; l <= depth; ++l) {
        const LayerSpec& spec = cfg.layers[l - 1];
        if (spec.width < 1)
            errs.push_back("layer " + std::to_string(l) + ": width must be >= 1");
        if (spec.kind == LayerKind::dense_residual && spec.width >= 1 &&
            width_of(l - 1) != spec.width) {
            errs.push_back("layer " + std::to_string(l) +
                           ": residual layer width " + std::to_string(spec.width) +
                           " must equal incoming width " + std::to_string(width_of(l - 1)));
        }
    }

    std::vector<ScEdge> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t s = 0; s < cfg.short_circuits.size(); ++s) {
        const ShortCircuitSpec& sc = cfg.short_circuits[s];
        const std::string tag = "short circuit " + std::to_string(s + 1);

        if (sc.front_layers.empty() == !sc.skip_gap.has_value()) {
            errs.push_back(tag + ": exactly one of front layer list / skip gap required");
            continue;
        }
        if (!std::isfinite(sc.weight) || sc.weight < 0.0) {
            errs.push_back(tag + ": weight must be finite and >= 0");
            continue;
        }
        if (sc.rear_layer < 1 || sc.rear_layer > depth) {
            errs.push_back(tag + ": rear layer " + std::to_string(sc.rear_layer) +
                           " out of range 1.." + std::to_string(depth));
            continue;
        }

        std::vector<std::size_t> fronts;
        if (sc.skip_gap) {
            if (*sc.skip_gap == 0) {
                errs.push_back(tag + ": skip gap k must be >= 1");
                continue;
            }
            fronts = plan_sc_layers(depth, sc.rear_layer, *sc.skip_gap);
        } else {
            fronts = sc.front_layers;
        }

        for (std::size_t f : fronts) {
            if (f < 1 || f > depth) {
                errs.push_back(tag + ": front layer " + std::to_string(f) +
                               " out of range 1.." + std::to_string(depth));
                continue;
            }
            if (f >= sc.rear_layer) {
                errs.push_back(tag + ": front layer " + std::to_string(f) +
                               " not less than rear layer " + std::to_string(sc.rear_layer));
                continue;
            }
            if (width_of(f) != width_of(sc.rear_layer)) {
                errs.push_back(tag + ": front layer " + std::to_string(f) + " width " +
                               std::to_string(width_of(f)) + " != rear layer " +
                               std::to_string(sc.rear_layer) + " width " +
                               std::to_string(width_of(sc.rear_layer)));
                continue;
            }
            if (!seen.insert({f, sc.rear_layer}).second) {
                errs.push_back(tag + ": duplicate edge front " + std::to_string(f) +
                               " -> rear " + std::to_string(sc.rear_layer));
                continue;
            }
            edges.push_back(ScEdge{f, sc.rear_layer, sc.weight});
        }
    }

    if (errs.empty()) {
        ResolvedTopology t;
        t.input_width = cfg.input_width;
        t.layers = cfg.layers;
        t.edges = std::move(edges);
        t.loss = cfg.loss;
        t.seed = cfg.seed;
        res.topology = std::move(t);
    }
    return res;
}

// Per-layer weights (in_width x out_width) and bias rows (1 x out_width).
struct Parameters {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& w : weights) n += w.size();
        for (const auto& b : biases) n += b.size();
        return n;
    }
};

inline bool bitwise_equal(const Parameters& a, const Parameters& b) {
    if (a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) return false;
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        if (!bitwise_equal(a.weights[i], b.weights[i])) return false;
    for (std::size_t i = 0; i < a.biases.size(); ++i)
        if (!bitwise_equal(a.biases[i], b.biases[i])) return false;
    return true;
}

// Scaled uniform initialization: weights drawn from
// U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases zero.
// Deterministic given topology.seed; layers are drawn in order from one
// MT19937-64 stream.
inline Parameters init_weights(const ResolvedTopology& topo) {
    Parameters params;
    Rng rng(derive_seed(topo.seed, /*stream=*/0x57e16875));
    for (std::size_t l = 1; l <= topo.layer_count(); ++l) {
        const std::size_t fan_in = topo.width(l - 1);
        const std::size_t fan_out = topo.width(l);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_in, fan_out);
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(1, fan_out);
    }
    return params;
}

}  // namespace scnet
