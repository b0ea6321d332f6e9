#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hpo/errors.hpp"
#include "hpo/noise.hpp"
#include "hpo/pauli.hpp"
#include "hpo/ptm.hpp"
#include "hpo/qem.hpp"

using namespace hpo;
using Complex = std::complex<double>;

namespace {

DensityMatrix pure_state(int n, std::uint32_t basis_index) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    rho(basis_index, basis_index) = 1.0;
    return make_density_matrix(n, std::move(rho));
}

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

// Uniform white-noise channel: every non-identity coefficient contracts by
// 1 - q. It commutes with unitary transfer matrices, which makes ideal
// mitigation outcomes exactly computable.
SparsePTM white_noise(int n, double q) {
    std::vector<DeltaEntry> delta;
    for (std::uint32_t k = 1; k < basis_size(n); ++k) delta.push_back({k, k, -q});
    return SparsePTM(n, std::move(delta));
}

}  // namespace

TEST_CASE("make_density_matrix validates shape, Hermiticity, and trace") {
    Eigen::MatrixXcd good = Eigen::MatrixXcd::Zero(4, 4);
    good(0, 0) = 0.5;
    good(3, 3) = 0.5;
    good(0, 3) = Complex(0.1, 0.2);
    good(3, 0) = Complex(0.1, -0.2);
    CHECK_NOTHROW(make_density_matrix(2, good));

    Eigen::MatrixXcd skew = good;
    skew(0, 3) = Complex(0.1, 0.2);
    skew(3, 0) = Complex(0.1, 0.2);  // not conjugated
    CHECK_THROWS_AS(make_density_matrix(2, skew), ValidationError);

    Eigen::MatrixXcd off_trace = good;
    off_trace(1, 1) = 0.5;
    CHECK_THROWS_AS(make_density_matrix(2, off_trace), ValidationError);

    CHECK_THROWS_AS(make_density_matrix(1, good), ValidationError);  // wrong dimension
    CHECK_THROWS_AS(make_density_matrix(6, Eigen::MatrixXcd::Identity(64, 64)), CapacityError);

    // Small negative eigenvalues are accepted: quasi-states are legitimate here.
    Eigen::MatrixXcd quasi = Eigen::MatrixXcd::Zero(2, 2);
    quasi(0, 0) = 1.02;
    quasi(1, 1) = -0.02;
    CHECK_NOTHROW(make_density_matrix(1, quasi));
}

TEST_CASE("state fidelity satisfies the textbook axioms") {
    const DensityMatrix zero = pure_state(1, 0);
    const DensityMatrix one = pure_state(1, 1);
    CHECK(state_fidelity(zero, zero) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(state_fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-10));

    const DensityMatrix maximally_mixed =
        make_density_matrix(1, 0.5 * Eigen::MatrixXcd::Identity(2, 2));
    CHECK(state_fidelity(zero, maximally_mixed) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(state_fidelity(maximally_mixed, zero) == doctest::Approx(0.5).epsilon(1e-10));

    CHECK_THROWS_AS(state_fidelity(zero, pure_state(2, 0)), ValidationError);
}

TEST_CASE("fidelity clamps and reports negative quasi-state eigenvalues") {
    Eigen::MatrixXcd quasi = Eigen::MatrixXcd::Zero(2, 2);
    quasi(0, 0) = 1.05;
    quasi(1, 1) = -0.05;
    const DensityMatrix rho = make_density_matrix(1, quasi);

    ClampStats stats;
    const double f = state_fidelity(rho, pure_state(1, 0), &stats);
    CHECK(f <= 1.0);
    CHECK(f == doctest::Approx(1.0).epsilon(1e-6));  // the negative part is clamped away
    CHECK(stats.clamped >= 1);
    CHECK(stats.min_eigenvalue == doctest::Approx(-0.05).epsilon(1e-9));

    ClampStats clean;
    state_fidelity(pure_state(1, 0), pure_state(1, 0), &clean);
    CHECK(clean.clamped == 0);
}

TEST_CASE("pauli vector conversion matches the |0..0> expansion") {
    const DensityMatrix rho = pure_state(2, 0);
    const PauliVector v = pauli_vector_from_density(rho);
    // |00><00| = (I + Z)(I + Z)/4: support on II, ZI, IZ, ZZ.
    for (std::uint64_t j = 0; j < basis_size(2); ++j) {
        const bool z_only = ((j & 3) == 0 || (j & 3) == 3) && (((j >> 2) & 3) == 0 || ((j >> 2) & 3) == 3);
        CHECK(v.coeffs[j] == doctest::Approx(z_only ? 1.0 : 0.0).epsilon(1e-12));
    }

    const DensityMatrix back = density_from_pauli_vector(v);
    CHECK((back.entries - rho.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("density round trip preserves generic mixed states") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = 0.4;
    m(1, 1) = 0.3;
    m(2, 2) = 0.2;
    m(3, 3) = 0.1;
    m(0, 3) = Complex(0.05, 0.02);
    m(3, 0) = Complex(0.05, -0.02);
    m(1, 2) = Complex(-0.03, 0.01);
    m(2, 1) = Complex(-0.03, -0.01);
    const DensityMatrix rho = make_density_matrix(2, m);

    const PauliVector v = pauli_vector_from_density(rho);
    CHECK(v.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
    const DensityMatrix back = density_from_pauli_vector(v);
    CHECK((back.entries - rho.entries).cwiseAbs().maxCoeff() < 1e-12);

    PauliVector unnormalized = v;
    unnormalized.coeffs[0] = 0.9;
    CHECK_THROWS_AS(density_from_pauli_vector(unnormalized), ValidationError);
}

TEST_CASE("the mini-QPE plan has the advertised structure") {
    const CircuitPlan plan = build_mini_qpe(3, 0.25);
    CHECK(plan.n == 3);
    CHECK(plan.injection_count() == 2);
    // prep + Hadamard layer + 2 controlled phases + 4 inverse-QFT gates.
    REQUIRE(plan.stages.size() == 8);
    CHECK(plan.stages[0].role == "state-prep");
    CHECK(plan.stages[1].role == "hadamard-layer");
    CHECK(plan.stages[2].role == "controlled-phase");
    CHECK(plan.stages[2].inject_after);
    CHECK(plan.stages[3].role == "controlled-phase");
    CHECK(plan.stages[3].inject_after);
    int qft_stages = 0;
    for (const CircuitStage& stage : plan.stages) {
        if (stage.role == "inverse-qft") {
            qft_stages += 1;
            CHECK_FALSE(stage.inject_after);
        }
    }
    CHECK(qft_stages == 4);  // H, CP, H and one swap on the two clocks

    CHECK_THROWS_AS(build_mini_qpe(2, 0.25), ValidationError);
    CHECK_THROWS_AS(build_mini_qpe(6, 0.25), ValidationError);
}

TEST_CASE("ideal mini-QPE concentrates on the expected readout state") {
    struct Case {
        int n;
        double phase;
        std::uint32_t peak;
    };
    // peak = round(phase * 2^clocks) with the target qubit left in |1>.
    for (const Case& c : {Case{3, 0.25, 5}, Case{4, 0.625, 13}}) {
        const CircuitPlan plan = build_mini_qpe(c.n, c.phase);
        const DensityMatrix rho = execute(plan);
        CHECK(rho.entries(c.peak, c.peak).real() == doctest::Approx(1.0).epsilon(1e-9));
        ClampStats stats;
        CHECK(state_fidelity(rho, pure_state(c.n, c.peak), &stats) ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(stats.clamped == 0);
    }
}

TEST_CASE("noise injection fires once per controlled-phase stage") {
    const CircuitPlan plan = build_mini_qpe(3, 0.25);
    const SparsePTM noise = white_noise(3, 0.05);
    int hook_calls = 0;
    execute_vector(plan, &noise, [&](PauliVector&) { hook_calls += 1; });
    CHECK(hook_calls == plan.injection_count());

    const SparsePTM wrong_size = white_noise(4, 0.05);
    CHECK_THROWS_AS(execute_vector(plan, &wrong_size), ValidationError);
}

TEST_CASE("depolarizing estimation recovers a known contraction exactly") {
    const CircuitPlan plan = build_mini_qpe(3, 0.25);
    const double q = 0.04;
    const SparsePTM noise = white_noise(3, q);

    const PauliVector ideal = execute_vector(plan);
    const PauliVector noisy = execute_vector(plan, &noise);
    const int injections = plan.injection_count();

    const double p_est = estimate_depolarizing_p(ideal, noisy, injections);
    CHECK(p_est == doctest::Approx(q).epsilon(1e-9));

    const PauliVector mitigated = mitigate_global_depolarizing(noisy, p_est, injections);
    const double f = state_fidelity(density_from_pauli_vector(ideal),
                                    density_from_pauli_vector(mitigated));
    CHECK(f == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("depolarizing estimation clips to zero without a contraction") {
    const CircuitPlan plan = build_mini_qpe(3, 0.25);
    const PauliVector ideal = execute_vector(plan);
    CHECK(estimate_depolarizing_p(ideal, ideal, 2) == 0.0);

    PauliVector flat = PauliVector::zero(3);
    flat.coeffs[0] = 1.0;
    CHECK_THROWS_AS(estimate_depolarizing_p(flat, ideal, 2), ValidationError);
    CHECK_THROWS_AS(estimate_depolarizing_p(ideal, flat, 0), ValidationError);
    CHECK_THROWS_AS(mitigate_global_depolarizing(ideal, 1.0, 2), ValidationError);
    CHECK_THROWS_AS(mitigate_global_depolarizing(ideal, -0.1, 2), ValidationError);
}

TEST_CASE("PtmInverter solves the channel and refuses singular ones") {
    const SparsePTM noise = white_noise(2, 0.1);
    const PtmInverter inverter(noise);
    CHECK(inverter.condition_number() == doctest::Approx(1.0 / 0.9).epsilon(1e-9));

    PauliVector v = PauliVector::zero(2);
    v.coeffs[0] = 1.0;
    v.coeffs[5] = 0.45;
    const PauliVector w = inverter.apply_inverse(v);
    CHECK(w.coeffs[0] == 1.0);
    CHECK(w.coeffs[5] == doctest::Approx(0.5).epsilon(1e-12));

    // A channel that annihilates a direction cannot be inverted.
    CHECK_THROWS_AS(PtmInverter(SparsePTM(1, {{1, 1, -1.0}})), ConditioningError);
    try {
        PtmInverter(SparsePTM(1, {{1, 1, -1.0}}));
    } catch (const ConditioningError& e) {
        CHECK(e.exit_code() == 4);
        CHECK(e.condition_number() >= kConditionLimit);
    }
}

TEST_CASE("replaying the exact inverse after each injection restores the state") {
    const NoiseParams params = acceptance_point();
    const GroundTruth truth = synthesize(TopologyGraph::chain(3), params);
    const CircuitPlan plan = build_mini_qpe(3, 0.25);

    const PauliVector ideal = execute_vector(plan);
    const PtmInverter inverter(truth.channel);
    const PauliVector replayed = execute_vector(plan, &truth.channel, [&](PauliVector& v) {
        v = inverter.apply_inverse(v);
    });

    double max_err = 0.0;
    for (std::size_t k = 0; k < ideal.coeffs.size(); ++k) {
        max_err = std::max(max_err, std::abs(ideal.coeffs[k] - replayed.coeffs[k]));
    }
    CHECK(max_err < 1e-10);
}

TEST_CASE("end-applied mitigation is exact when the noise commutes with the circuit") {
    const CircuitPlan plan = build_mini_qpe(3, 0.25);
    const double q = 0.06;
    const SparsePTM noise = white_noise(3, q);

    const PauliVector ideal = execute_vector(plan);
    const PauliVector noisy = execute_vector(plan, &noise);
    const PauliVector mitigated = mitigate_hpo(noisy, noise, plan.injection_count());

    double max_err = 0.0;
    for (std::size_t k = 0; k < ideal.coeffs.size(); ++k) {
        max_err = std::max(max_err, std::abs(ideal.coeffs[k] - mitigated.coeffs[k]));
    }
    CHECK(max_err < 1e-10);
    CHECK_THROWS_AS(mitigate_hpo(noisy, noise, 0), ValidationError);
}

TEST_CASE("fidelity report with the exact model beats the depolarizing baseline") {
    const NoiseParams params = acceptance_point();
    const GroundTruth truth = synthesize(TopologyGraph::chain(3), params);
    const FidelityReport report = fidelity_report_with_model(3, 0.25, params, truth.channel);

    CHECK(report.n == 3);
    CHECK(report.phase == 0.25);
    CHECK(report.injections == 2);
    CHECK(report.ideal == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(report.hpo >= 1.0 - 1e-8);
    CHECK(report.hpo > report.depol);
    CHECK(report.depol > report.raw);
    CHECK(report.raw > 0.5);
    CHECK(report.delta_hpo_vs_depol ==
          doctest::Approx(report.hpo - report.depol).epsilon(1e-12));
    CHECK(report.p_est > 0.0);
    CHECK(report.p_est < 0.2);
    CHECK(report.condition_number >= 1.0);
    CHECK(report.condition_number < 2.0);
    CHECK(report.min_eigenvalue <= 0.0);
    CHECK(report.clamped_eigenvalues >= 0);
    // The count and the minimum must agree on whether clamping happened.
    CHECK((report.clamped_eigenvalues > 0) == (report.min_eigenvalue < -kEigenvalueSlack));

    CHECK_THROWS_AS(fidelity_report_with_model(3, 0.25, params, identity_ptm(2)),
                    ValidationError);
}
