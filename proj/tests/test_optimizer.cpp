#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "hpo/errors.hpp"
#include "hpo/mask.hpp"
#include "hpo/noise.hpp"
#include "hpo/optimizer.hpp"
#include "hpo/pauli.hpp"
#include "hpo/ptm.hpp"

using namespace hpo;

namespace {

NoiseParams acceptance_point() {
    NoiseParams params;
    params.p_depol = 0.02;
    params.gamma_ad = 0.02;
    params.theta_zz = 0.25;
    params.residual_magnitude = 0.02;
    params.residual_density = 0.05;
    params.seed = 20260816;
    return params;
}

bool same_entries(const std::vector<DeltaEntry>& a, const std::vector<DeltaEntry>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].i != b[k].i || a[k].j != b[k].j ||
            std::memcmp(&a[k].value, &b[k].value, sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("cosine annealing runs from learning_rate down to eta_min") {
    HPOConfig config;
    CHECK(cosine_annealing_lr(0, config) == doctest::Approx(config.learning_rate));
    CHECK(cosine_annealing_lr(config.epochs - 1, config) == doctest::Approx(config.eta_min));
    CHECK(cosine_annealing_lr((config.epochs - 1) / 2, config) ==
          doctest::Approx((config.learning_rate + config.eta_min) / 2.0).epsilon(1e-3));

    // Monotone non-increasing across the schedule.
    double prev = cosine_annealing_lr(0, config);
    for (int e = 1; e < config.epochs; e += 37) {
        const double lr = cosine_annealing_lr(e, config);
        CHECK(lr <= prev + 1e-15);
        prev = lr;
    }

    CHECK_THROWS_AS(cosine_annealing_lr(-1, config), ValidationError);
    CHECK_THROWS_AS(cosine_annealing_lr(config.epochs, config), ValidationError);

    HPOConfig single;
    single.epochs = 1;
    CHECK(cosine_annealing_lr(0, single) == single.learning_rate);
}

TEST_CASE("HPOConfig validation rejects out-of-range settings") {
    HPOConfig config;
    CHECK_NOTHROW(config.validate());

    HPOConfig bad = config;
    bad.eta_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.eta_min = bad.learning_rate * 2;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.adam_beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.adam_beta2 = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.adam_epsilon = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.convergence_threshold = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = config;
    bad.observation_sigma = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("the first Adam step moves by about lr in the gradient direction") {
    HPOConfig config;
    AdamState state(2);
    std::vector<double> params = {0.0, 0.0};
    const std::vector<double> grads = {0.5, -2.0};
    projected_adam_step(state, grads, 0.01, config, params);

    // With bias correction the first update is lr * g / (|g| + eps).
    CHECK(params[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(state.step_count == 1);

    std::vector<double> wrong_size = {1.0};
    CHECK_THROWS_AS(projected_adam_step(state, grads, 0.01, config, wrong_size), ValidationError);
}

TEST_CASE("training probes mirror the mask with direct-entry targets") {
    const NoiseParams params = acceptance_point();
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), params);
    const MaskSet mask = materialize(MaskSpec::baseline(2));

    const ProbeSet probes = generate_probes(truth.edge_block, mask, 16, 3);
    REQUIRE(probes.training.size() == mask.pairs.size());
    for (std::size_t k = 0; k < mask.pairs.size(); ++k) {
        const auto [i, j] = mask.pairs[k];
        const ProbeRecord& probe = probes.training[k];
        CHECK(probe.observable_row == i);
        REQUIRE(probe.input.size() == 1);
        CHECK(probe.input[0].first == j);
        CHECK(probe.input[0].second == 1.0);
        CHECK(probe.target ==
              doctest::Approx((i == j ? 1.0 : 0.0) + truth.edge_block.delta_at(i, j)));
    }

    REQUIRE(probes.validation.size() == 16);
    for (const ProbeRecord& probe : probes.validation) {
        CHECK(probe.observable_row >= 1);
        CHECK(probe.observable_row < basis_size(2));
        REQUIRE(probe.input.size() == basis_size(2));
        CHECK(probe.input[0].second == 1.0);
        // the target is the true channel's response to the probe input
        PauliVector v = PauliVector::zero(2);
        for (const auto& [j, x] : probe.input) v.coeffs[j] = x;
        const PauliVector out = truth.edge_block.apply(v);
        CHECK(probe.target == doctest::Approx(out.coeffs[probe.observable_row]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(generate_probes(truth.edge_block, materialize(MaskSpec::residual(3)), 0, 0),
                    ValidationError);
    CHECK_THROWS_AS(generate_probes(truth.edge_block, mask, -1, 0), ValidationError);
}

TEST_CASE("observation noise perturbs targets reproducibly") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    const MaskSet mask = materialize(MaskSpec::baseline(2));
    const ProbeSet clean = generate_probes(truth.edge_block, mask, 0, 5);
    const ProbeSet noisy1 = generate_probes(truth.edge_block, mask, 0, 5, 1e-3);
    const ProbeSet noisy2 = generate_probes(truth.edge_block, mask, 0, 5, 1e-3);

    bool any_moved = false;
    for (std::size_t k = 0; k < clean.training.size(); ++k) {
        CHECK(noisy1.training[k].target == noisy2.training[k].target);
        any_moved = any_moved || noisy1.training[k].target != clean.training[k].target;
        CHECK(std::abs(noisy1.training[k].target - clean.training[k].target) < 1e-2);
    }
    CHECK(any_moved);
}

TEST_CASE("mse_loss is zero exactly at the data-generating model") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    const MaskSet mask = materialize(MaskSpec::baseline(2));
    const ProbeSet probes = generate_probes(truth.edge_block, mask, 32, 9);

    CHECK(mse_loss(truth.edge_block, probes.training) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mse_loss(truth.edge_block, probes.validation) < 1e-24);
    CHECK(mse_loss(identity_ptm(2), probes.training) > 1e-5);
    CHECK_THROWS_AS(mse_loss(identity_ptm(2), {}), ValidationError);
}

TEST_CASE("analytic gradient matches central finite differences") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    const MaskSet mask = materialize(MaskSpec::baseline(2));
    const ProbeSet probes = generate_probes(truth.edge_block, mask, 0, 1);

    // A generic evaluation point away from both the optimum and zero.
    std::vector<DeltaEntry> point;
    PortableRng rng(31);
    for (const auto& [i, j] : mask.pairs) {
        if (i == 0) continue;
        if (rng.uniform() < 0.2) point.push_back({i, j, 0.05 * rng.uniform_symmetric()});
    }
    REQUIRE(point.size() > 10);
    const SparsePTM model(2, point);

    const auto grad = analytic_gradient(model, probes.training, mask);
    REQUIRE(grad.size() == mask.pairs.size());

    const double h = 1e-6;
    int compared = 0;
    for (std::size_t k = 0; k < grad.size(); k += 7) {
        const auto [i, j] = mask.pairs[k];
        if (i == 0) continue;  // structurally untrainable

        auto plus = point;
        auto minus = point;
        const auto hit = std::find_if(plus.begin(), plus.end(), [&](const DeltaEntry& e) {
            return e.i == i && e.j == j;
        });
        if (hit != plus.end()) {
            hit->value += h;
            minus[static_cast<std::size_t>(hit - plus.begin())].value -= h;
        } else {
            plus.push_back({i, j, h});
            minus.push_back({i, j, -h});
        }
        const double fd = (mse_loss(SparsePTM(2, plus), probes.training) -
                           mse_loss(SparsePTM(2, minus), probes.training)) /
                          (2.0 * h);
        const double analytic = grad[k].value;
        if (analytic == 0.0 && fd == 0.0) {
            compared += 1;
            continue;
        }
        CHECK(std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-9}) <
              1e-6);
        compared += 1;
    }
    CHECK(compared >= 30);
}

TEST_CASE("gradient coordinates cover the mask exactly once, row 0 inert") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    const MaskSet mask = materialize(MaskSpec::baseline(2));
    const ProbeSet probes = generate_probes(truth.edge_block, mask, 0, 1);
    const auto grad = analytic_gradient(identity_ptm(2), probes.training, mask);

    REQUIRE(grad.size() == mask.pairs.size());
    for (std::size_t k = 0; k < grad.size(); ++k) {
        CHECK(grad[k].i == mask.pairs[k].first);
        CHECK(grad[k].j == mask.pairs[k].second);
        if (grad[k].i == 0) CHECK(grad[k].value == 0.0);
    }
}

TEST_CASE("fitting an identity channel stops immediately at zero loss") {
    HPOConfig config;
    const FitResult fit = fit_baseline(identity_ptm(2), config);
    REQUIRE(fit.trace.rows.size() == 1);
    CHECK(fit.trace.rows[0].epoch == 0);
    CHECK(fit.trace.rows[0].mse == 0.0);
    CHECK(fit.trace.rows[0].lr == doctest::Approx(config.learning_rate));
    CHECK(fit.trace.stage == "baseline");
    CHECK(fit.model.delta().empty());
}

TEST_CASE("baseline fit reaches machine-precision loss on a synthetic block") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    HPOConfig config;
    const FitResult fit = fit_baseline(truth.edge_block, config);

    CHECK(fit.trace.rows.back().mse <= 1e-12);
    CHECK(fit.trace.rows.size() <= static_cast<std::size_t>(config.epochs) + 1);
    CHECK(fit.active_parameters == 240);  // 256 baseline pairs minus 16 row-0 coordinates
    CHECK(fit.validation_mse < 1e-9);

    // The fitted model reproduces the ground truth coordinate-wise.
    double max_err = 0.0;
    for (std::uint32_t i = 1; i < 16; ++i) {
        for (std::uint32_t j = 0; j < 16; ++j) {
            max_err = std::max(max_err, std::abs(fit.model.delta_at(i, j) -
                                                 truth.edge_block.delta_at(i, j)));
        }
    }
    CHECK(max_err < 1e-5);

    CHECK_THROWS_AS(fit_baseline(identity_ptm(3), config), ValidationError);
}

TEST_CASE("trace rows carry the schedule and end on the final training loss") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    HPOConfig config;
    config.epochs = 50;
    config.convergence_threshold = 0.0;
    const FitResult fit = fit_baseline(truth.edge_block, config);

    REQUIRE(fit.trace.rows.size() == 51);
    for (int e = 0; e <= 50; ++e) {
        CHECK(fit.trace.rows[static_cast<std::size_t>(e)].epoch == e);
    }
    CHECK(fit.trace.rows[0].lr == doctest::Approx(config.learning_rate));
    CHECK(fit.trace.rows[10].lr == doctest::Approx(cosine_annealing_lr(10, config)));
    CHECK(fit.trace.rows[50].lr == doctest::Approx(config.eta_min));
    CHECK(fit.trace.rows.back().mse < fit.trace.rows.front().mse);
}

TEST_CASE("residual fit recovers an injected full-weight perturbation") {
    // No baseline noise: the frozen stage-1 model is exactly the identity.
    NoiseParams params;
    params.residual_magnitude = 0.02;
    params.residual_density = 0.05;
    params.seed = 311;
    const GroundTruth truth = synthesize(TopologyGraph::chain(3), params);
    REQUIRE(!truth.injected.empty());

    HPOConfig config;
    config.convergence_threshold = 0.0;  // drive each coordinate to machine precision
    const HPOResult result = run_hpo(truth, config);
    CHECK(result.frozen.delta().empty());
    REQUIRE(result.traces.size() == 2);
    CHECK(result.traces[1].stage == "residual-3");
    // No residual pair can sit on row 0 at n = 3 (the identity string is at
    // Hamming distance 3 from every weight-3 string), so all pairs train.
    CHECK(result.active_parameters == 1485);

    double max_err = 0.0;
    for (const DeltaEntry& e : truth.injected) {
        bool found = false;
        for (const DeltaEntry& r : result.residual) {
            if (r.i == e.i && r.j == e.j) {
                max_err = std::max(max_err, std::abs(r.value - e.value));
                found = true;
                break;
            }
        }
        CHECK(found);
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("run_hpo at n = 2 stops after the frozen baseline") {
    const GroundTruth truth = synthesize(TopologyGraph::chain(2), acceptance_point());
    HPOConfig config;
    const HPOResult result = run_hpo(truth, config);
    REQUIRE(result.traces.size() == 1);
    CHECK(result.active_parameters == 0);
    CHECK(same_entries(result.effective.delta(), result.frozen.delta()));
    CHECK((result.frozen.to_dense() - result.baseline_2q.to_dense()).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("run_hpo refuses oversized problems and bad configs") {
    GroundTruth truth;
    truth.graph = TopologyGraph::chain(6);
    CHECK_THROWS_AS(run_hpo(truth, HPOConfig{}), CapacityError);

    HPOConfig bad;
    bad.epochs = -1;
    CHECK_THROWS_AS(run_hpo(synthesize(TopologyGraph::chain(2), NoiseParams{}), bad),
                    ValidationError);
}

TEST_CASE("the stage observer sees a frozen model that never changes") {
    NoiseParams params = acceptance_point();
    const GroundTruth truth = synthesize(TopologyGraph::chain(3), params);

    HPOConfig config;
    config.epochs = 120;  // keep the audit quick
    std::vector<DeltaEntry> first_frozen;
    int calls = 0;
    bool frozen_stable = true;
    bool support_on_mask = true;
    const MaskSet mask = materialize(MaskSpec::residual(3));

    const HPOResult result = run_hpo(truth, config,
                                     [&](int, const SparsePTM& frozen,
                                         const std::vector<DeltaEntry>& residual) {
        if (calls == 0) {
            first_frozen = frozen.delta();
        } else {
            frozen_stable = frozen_stable && same_entries(first_frozen, frozen.delta());
        }
        for (const DeltaEntry& e : residual) {
            support_on_mask = support_on_mask && e.i != 0 && mask.contains(e.i, e.j);
        }
        calls += 1;
    });

    CHECK(calls == static_cast<int>(result.traces[1].rows.size()));
    CHECK(frozen_stable);
    CHECK(support_on_mask);
    CHECK(same_entries(result.frozen.delta(), first_frozen));
}
