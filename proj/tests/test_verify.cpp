#include <catch2/catch.hpp>

#include "scnet/engine.hpp"
#include "scnet/verify.hpp"

#include "helpers.hpp"

using namespace scnet;

TEST_CASE("fd_gradient of a single linear neuron matches the closed form") {
    // J = 0.5 (w x - d)^2 with w=1, x=2, d=0: dJ/dw = (y - d) x = 4
    NetworkConfig cfg =
        testutil::stack_config(1, {1}, Activation::identity, Loss::half_squared_error, 1);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    Parameters params;
    params.weights.push_back(Matrix{{1.0}});
    params.biases.emplace_back(1, 1);
    const Matrix x{{2.0}};
    const Matrix d{{0.0}};
    const GradientSet fd = fd_gradient(topo, params, x, d);
    CHECK(std::fabs(fd.weight_grads[0](0, 0) - 4.0) < 1e-8);
}

TEST_CASE("fd_gradient of a zero-weight sigmoid output bias matches the hand computation") {
    // One sigmoid neuron with w=0, b=0 always outputs 0.5. With symmetric
    // targets {0, 1} over a batch of two, dJ/db per sample is
    // (0.5 - d) * sigmoid'(0) = +/- 0.125, so the batch mean is exactly 0.
    NetworkConfig cfg =
        testutil::stack_config(1, {1}, Activation::sigmoid, Loss::half_squared_error, 1);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    Parameters params;
    params.weights.push_back(Matrix{{0.0}});
    params.biases.emplace_back(1, 1);
    const Matrix x{{0.3}, {0.8}};
    const Matrix d{{0.0}, {1.0}};
    const GradientSet fd = fd_gradient(topo, params, x, d);
    const ForwardTrace trace = forward(topo, params, x);
    const GradientSet analytic = backward(topo, params, trace, d);
    CHECK(std::fabs(fd.bias_grads[0](0, 0) - 0.0) < 1e-8);
    CHECK(std::fabs(analytic.bias_grads[0](0, 0) - fd.bias_grads[0](0, 0)) < 1e-8);
}

TEST_CASE("fd_gradient refuses networks beyond its parameter budget") {
    NetworkConfig cfg = testutil::stack_config(64, {64, 64}, Activation::sigmoid,
                                               Loss::half_squared_error, 1);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    FdConfig fd_cfg;
    fd_cfg.max_parameters = 100;
    CHECK_THROWS_AS(fd_gradient(topo, params, Matrix(1, 64), Matrix(1, 64), fd_cfg), BudgetError);
}

TEST_CASE("fd_gradient is converged: halving epsilon moves it by less than 1e-7") {
    NetworkConfig cfg =
        testutil::stack_config(3, {4, 3}, Activation::tanh, Loss::half_squared_error, 5);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(6);
    const Matrix batch = testutil::random_matrix(2, 3, rng);
    const Matrix target = testutil::random_matrix(2, 3, rng, 0.0, 1.0);
    FdConfig coarse, fine;
    coarse.epsilon = 1e-5;
    fine.epsilon = 5e-6;
    const GradientSet a = fd_gradient(topo, params, batch, target, coarse);
    const GradientSet b = fd_gradient(topo, params, batch, target, fine);
    for (std::size_t l = 0; l < a.weight_grads.size(); ++l) {
        CHECK(max_abs_diff(a.weight_grads[l], b.weight_grads[l]) < 1e-7);
        CHECK(max_abs_diff(a.bias_grads[l], b.bias_grads[l]) < 1e-7);
    }
}

TEST_CASE("check_gradients passes identical sets and flags a single perturbed entry") {
    NetworkConfig cfg =
        testutil::stack_config(3, {4, 2}, Activation::sigmoid, Loss::half_squared_error, 7);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(8);
    const Matrix batch = testutil::random_matrix(2, 3, rng);
    const Matrix target = testutil::random_matrix(2, 2, rng, 0.0, 1.0);
    const ForwardTrace trace = forward(topo, params, batch);
    const GradientSet grads = backward(topo, params, trace, target);

    CHECK(check_gradients(grads, grads).pass());

    GradientSet perturbed = grads;
    perturbed.weight_grads[1](2, 1) += 1e-3;
    const CheckReport report = check_gradients(perturbed, grads);
    REQUIRE(report.failures.size() == 1);
    CHECK(report.failures[0].layer == 2);
    CHECK(report.failures[0].row == 2);
    CHECK(report.failures[0].col == 1);
    CHECK_FALSE(report.failures[0].is_bias);
    CHECK(report.to_text().find("FAIL") != std::string::npos);
    CHECK(report.to_jsonl().find("\"layer\":2") != std::string::npos);
}

TEST_CASE("check_gradients is symmetric in its arguments") {
    Rng rng(9);
    NetworkConfig cfg =
        testutil::stack_config(3, {3, 3}, Activation::tanh, Loss::half_squared_error, 9);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    const Matrix batch = testutil::random_matrix(2, 3, rng);
    const Matrix target = testutil::random_matrix(2, 3, rng, 0.0, 1.0);
    const ForwardTrace trace = forward(topo, params, batch);
    const GradientSet a = backward(topo, params, trace, target);
    GradientSet b = a;
    b.weight_grads[0](0, 0) += 3e-4;
    b.bias_grads[1](0, 2) -= 2e-4;
    const CheckReport ab = check_gradients(a, b);
    const CheckReport ba = check_gradients(b, a);
    CHECK(ab.failures.size() == ba.failures.size());
    CHECK(ab.checked == ba.checked);
}

TEST_CASE("vanilla backprop agrees with fd_gradient on a random 3-layer net") {
    NetworkConfig cfg = testutil::stack_config(4, {5, 5, 3}, Activation::sigmoid,
                                               Loss::softmax_cross_entropy, 10);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(11);
    const Matrix batch = testutil::random_matrix(3, 4, rng, 0.0, 1.0);
    const Matrix target = testutil::one_hot_targets(3, 3, rng);
    const ForwardTrace trace = forward(topo, params, batch);
    const GradientSet analytic = backward(topo, params, trace, target);
    const GradientSet fd = fd_gradient(topo, params, batch, target);
    CHECK(check_gradients(analytic, fd).pass());
}

TEST_CASE("relu kink masking skips parameters whose perturbation crosses zero") {
    NetworkConfig cfg =
        testutil::stack_config(2, {3, 2}, Activation::relu, Loss::half_squared_error, 12);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    Parameters params = init_weights(topo);
    // Put one weighted sum exactly on the kink: perturbing its incoming bias
    // in either direction flips the sign pattern.
    params.biases[0](0, 0) = 0.0;
    params.weights[0](0, 0) = 0.0;
    params.weights[0](1, 0) = 0.0;
    const Matrix batch{{0.4, 0.6}};
    const Matrix target{{0.2, 0.7}};
    GradientSet comparable;
    (void)fd_gradient(topo, params, batch, target, FdConfig{}, &comparable);
    CHECK(comparable.bias_grads[0](0, 0) == 0.0);  // masked out
}

TEST_CASE("mean_gradient_profile reference values") {
    GradientSet grads;
    grads.weight_grads.emplace_back(2, 2);  // all zero
    grads.weight_grads.push_back(Matrix{{1.0, -1.0}, {1.0, -1.0}});
    grads.bias_grads.emplace_back(1, 2);
    grads.bias_grads.emplace_back(1, 2);
    const auto profile = mean_gradient_profile(grads);
    REQUIRE(profile.size() == 2);
    CHECK(profile[0].layer == 1);
    CHECK(profile[0].signed_mean == 0.0);
    CHECK(profile[0].abs_mean == 0.0);
    CHECK(profile[1].signed_mean == 0.0);
    CHECK(profile[1].abs_mean == 1.0);
    CHECK(profile[1].abs_mean >= std::fabs(profile[1].signed_mean));
}

TEST_CASE("profile of averaged gradients equals average of profiles") {
    // Linearity of the mean: averaging three epochs' gradient sets and then
    // profiling equals profiling each and averaging the stats.
    Rng rng(13);
    std::vector<GradientSet> epochs(3);
    for (auto& g : epochs) {
        g.weight_grads.push_back(testutil::random_matrix(3, 2, rng));
        g.weight_grads.push_back(testutil::random_matrix(2, 2, rng));
        g.bias_grads.emplace_back(1, 2);
        g.bias_grads.emplace_back(1, 2);
    }
    GradientSet combined;
    combined.weight_grads.push_back(Matrix(3, 2));
    combined.weight_grads.push_back(Matrix(2, 2));
    combined.bias_grads.emplace_back(1, 2);
    combined.bias_grads.emplace_back(1, 2);
    double signed_avg[2] = {0, 0};
    for (const auto& g : epochs) {
        for (std::size_t l = 0; l < 2; ++l) {
            add_scaled_in_place(combined.weight_grads[l], g.weight_grads[l], 1.0 / 3.0);
            signed_avg[l] += mean_gradient_profile(g)[l].signed_mean / 3.0;
        }
    }
    const auto profile = mean_gradient_profile(combined);
    CHECK(profile[0].signed_mean == Approx(signed_avg[0]).margin(1e-15));
    CHECK(profile[1].signed_mean == Approx(signed_avg[1]).margin(1e-15));
}

TEST_CASE("profile of concatenated batches is the weighted combination") {
    Rng rng(14);
    const Matrix g1 = testutil::random_matrix(4, 3, rng);
    const Matrix g2 = testutil::random_matrix(4, 3, rng);
    GradientSet a, b, both;
    a.weight_grads.push_back(g1);
    b.weight_grads.push_back(g2);
    Matrix sum = add(scale(g1, 0.5), scale(g2, 0.5));
    both.weight_grads.push_back(sum);
    const double expected =
        0.5 * mean_gradient_profile(a)[0].signed_mean + 0.5 * mean_gradient_profile(b)[0].signed_mean;
    CHECK(mean_gradient_profile(both)[0].signed_mean == Approx(expected).margin(1e-15));
}

TEST_CASE("sc_delta_check reports zero discrepancy for lambda zero") {
    NetworkConfig cfg = testutil::stack_config(3, {4, 4, 4}, Activation::sigmoid,
                                               Loss::half_squared_error, 15);
    ShortCircuitSpec sc;
    sc.rear_layer = 3;
    sc.front_layers = {1};
    sc.weight = 0.0;
    cfg.short_circuits.push_back(sc);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(16);
    const Matrix batch = testutil::random_matrix(2, 3, rng);
    const Matrix target = testutil::random_matrix(2, 4, rng, 0.0, 1.0);
    const ScDeltaReport report = sc_delta_check(topo, params, batch, target);
    CHECK(report.max_discrepancy == 0.0);
}

TEST_CASE("sc_delta_check confirms the injection algebra of a single edge") {
    NetworkConfig cfg = testutil::stack_config(3, {4, 4, 4, 4}, Activation::tanh,
                                               Loss::half_squared_error, 17);
    ShortCircuitSpec sc;
    sc.rear_layer = 4;
    sc.front_layers = {2};
    sc.weight = 0.2;
    cfg.short_circuits.push_back(sc);
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(18);
    const Matrix batch = testutil::random_matrix(3, 3, rng);
    const Matrix target = testutil::random_matrix(3, 4, rng, 0.0, 1.0);
    const ScDeltaReport report = sc_delta_check(topo, params, batch, target);
    REQUIRE(report.layers.size() == 1);
    CHECK(report.layers[0].front == 2);
    CHECK(report.max_discrepancy <= 1e-12);
    CHECK(report.to_text().find("front layer 2") != std::string::npos);
}

TEST_CASE("two edges into one front layer combine additively") {
    NetworkConfig cfg = testutil::stack_config(3, {4, 4, 4, 4, 4}, Activation::sigmoid,
                                               Loss::softmax_cross_entropy, 19);
    ShortCircuitSpec sc1, sc2;
    sc1.rear_layer = 4;
    sc1.front_layers = {2};
    sc1.weight = 0.2;
    sc2.rear_layer = 5;
    sc2.front_layers = {2};
    sc2.weight = 0.5;
    cfg.short_circuits = {sc1, sc2};
    const ResolvedTopology topo = testutil::resolve_or_die(cfg);
    const Parameters params = init_weights(topo);
    Rng rng(20);
    const Matrix batch = testutil::random_matrix(2, 3, rng, 0.0, 1.0);
    const Matrix target = testutil::one_hot_targets(2, 4, rng);

    CHECK(sc_delta_check(topo, params, batch, target).max_discrepancy <= 1e-12);

    // recompute the sum independently from the two rear sensitivities
    const ForwardTrace trace = forward(topo, params, batch);
    const GradientSet vanilla = backward(topo.without_short_circuits(), params, trace, target);
    const GradientSet injected = backward(topo, params, trace, target);
    Matrix expected(4, 4);
    add_scaled_in_place(expected, matmul_at(trace.activation(1), sc_sensitivity(vanilla, 4)), 0.2);
    add_scaled_in_place(expected, matmul_at(trace.activation(1), sc_sensitivity(vanilla, 5)), 0.5);
    const Matrix diff = subtract(injected.weight_grads[1], vanilla.weight_grads[1]);
    CHECK(max_abs_diff(diff, expected) <= 1e-12);
}
