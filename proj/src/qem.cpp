#include "hpo/qem.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

using Complex = std::complex<double>;

// Action of a Pauli string on computational basis kets: P|b> = phase(b)|perm(b)>.
struct PauliAction {
    std::vector<std::uint32_t> perm;
    std::vector<Complex> phase;
};

PauliAction pauli_action(std::uint64_t index, int n) {
    const std::uint32_t dim = std::uint32_t{1} << n;
    PauliAction action;
    action.perm.resize(dim);
    action.phase.resize(dim);
    for (std::uint32_t b = 0; b < dim; ++b) {
        std::uint32_t out = b;
        Complex phase(1, 0);
        for (int k = 0; k < n; ++k) {
            const int digit = static_cast<int>((index >> (2 * k)) & 3);
            const bool bit = (b >> k) & 1;
            switch (digit) {
                case 0: break;
                case 1: out ^= (1u << k); break;
                case 2:
                    out ^= (1u << k);
                    phase *= bit ? Complex(0, -1) : Complex(0, 1);
                    break;
                default:
                    if (bit) phase = -phase;
                    break;
            }
        }
        action.perm[b] = out;
        action.phase[b] = phase;
    }
    return action;
}

void check_state_cap(int n, const char* what) {
    check_qubit_count(n);
    if (n > kDenseStateCap) {
        throw CapacityError(std::string(what) + " is capped at n=" + std::to_string(kDenseStateCap) +
                            " (got n=" + std::to_string(n) + ")");
    }
}

void check_hermitian(const Eigen::MatrixXcd& m, const char* what) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
        throw ValidationError(std::string(what) + " is not Hermitian within tolerance");
    }
}

// Hermitian square root with negative eigenvalues clamped to zero.
Eigen::MatrixXcd clamped_sqrt(const Eigen::MatrixXcd& m, ClampStats* stats) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
    Eigen::VectorXd values = eig.eigenvalues();
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (stats) {
            stats->min_eigenvalue = std::min(stats->min_eigenvalue, values[k]);
            if (values[k] < -kEigenvalueSlack) stats->clamped += 1;
        }
        values[k] = values[k] > 0.0 ? std::sqrt(values[k]) : 0.0;
    }
    return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().adjoint();
}

PauliVector zero_state_vector(int n) {
    PauliVector v = PauliVector::zero(n);
    const auto size = basis_size(n);
    for (std::uint64_t j = 0; j < size; ++j) {
        bool supported = true;
        for (int k = 0; k < n && supported; ++k) {
            const auto digit = (j >> (2 * k)) & 3;
            supported = digit == 0 || digit == 3;  // Tr[Z|0><0|] = 1
        }
        if (supported) v.coeffs[j] = 1.0;
    }
    return v;
}

Eigen::MatrixXcd gate_hadamard() {
    Eigen::MatrixXcd h(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return h;
}

Eigen::MatrixXcd gate_pauli_x() {
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    return x;
}

Eigen::MatrixXcd gate_controlled_phase(double theta) {
    Eigen::MatrixXcd cp = Eigen::MatrixXcd::Identity(4, 4);
    cp(3, 3) = std::exp(Complex(0, theta));
    return cp;
}

Eigen::MatrixXcd gate_swap() {
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(4, 4);
    s(0, 0) = 1;
    s(1, 2) = 1;
    s(2, 1) = 1;
    s(3, 3) = 1;
    return s;
}

// Gate list of the forward QFT (qubit k = bit k of the transform index):
// for q = m-1..0: H(q) then CP(pi/2^(q-l)) on (l, q) for l = q-1..0;
// finally swap k <-> m-1-k. The inverse runs the list backwards with
// conjugated phases.
struct GateOp {
    std::vector<int> qubits;
    Eigen::MatrixXcd unitary;
};

std::vector<GateOp> inverse_qft_gates(int m) {
    std::vector<GateOp> forward;
    for (int q = m - 1; q >= 0; --q) {
        forward.push_back({{q}, gate_hadamard()});
        for (int l = q - 1; l >= 0; --l) {
            forward.push_back({{l, q}, gate_controlled_phase(M_PI / std::pow(2.0, q - l))});
        }
    }
    for (int k = 0; k < m / 2; ++k) {
        forward.push_back({{k, m - 1 - k}, gate_swap()});
    }
    std::vector<GateOp> inverse;
    inverse.reserve(forward.size());
    for (auto it = forward.rbegin(); it != forward.rend(); ++it) {
        inverse.push_back({it->qubits, it->unitary.adjoint()});
    }
    return inverse;
}

}  // namespace

DensityMatrix make_density_matrix(int n, Eigen::MatrixXcd entries) {
    check_state_cap(n, "DensityMatrix");
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    if (entries.rows() != dim || entries.cols() != dim) {
        throw ValidationError("density matrix dimension mismatch: expected " + std::to_string(dim) +
                              "x" + std::to_string(dim));
    }
    check_hermitian(entries, "density matrix");
    if (std::abs(entries.trace().real() - 1.0) > kTraceTolerance ||
        std::abs(entries.trace().imag()) > kTraceTolerance) {
        throw ValidationError("density matrix trace deviates from 1");
    }
    return DensityMatrix{n, std::move(entries)};
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma, ClampStats* stats) {
    if (rho.n != sigma.n) throw ValidationError("fidelity dimension mismatch");
    check_hermitian(rho.entries, "fidelity input rho");
    check_hermitian(sigma.entries, "fidelity input sigma");

    const Eigen::MatrixXcd sqrt_rho = clamped_sqrt(rho.entries, stats);
    Eigen::MatrixXcd inner = sqrt_rho * sigma.entries * sqrt_rho;
    inner = (inner + inner.adjoint()) / 2.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(inner);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
        const double value = eig.eigenvalues()[k];
        if (stats) {
            stats->min_eigenvalue = std::min(stats->min_eigenvalue, value);
            if (value < -kEigenvalueSlack) stats->clamped += 1;
        }
        if (value > 0.0) sum += std::sqrt(value);
    }
    return std::clamp(sum * sum, 0.0, 1.0);
}

PauliVector pauli_vector_from_density(const DensityMatrix& rho) {
    check_state_cap(rho.n, "pauli_vector_from_density");
    check_hermitian(rho.entries, "pauli_vector_from_density input");
    const auto size = basis_size(rho.n);
    const std::uint32_t dim = std::uint32_t{1} << rho.n;
    PauliVector v = PauliVector::zero(rho.n);
    for (std::uint64_t j = 0; j < size; ++j) {
        const PauliAction action = pauli_action(j, rho.n);
        Complex trace(0, 0);
        // P[a, b] = phase(b) delta_{a, perm(b)}, so Tr[P rho] = sum_b phase(b) rho[b, perm(b)].
        for (std::uint32_t b = 0; b < dim; ++b) {
            trace += action.phase[b] * rho.entries(b, action.perm[b]);
        }
        if (std::abs(trace.imag()) > kHermitianTolerance) {
            throw ValidationError("Pauli expectation has imaginary residue");
        }
        v.coeffs[j] = trace.real();
    }
    return v;
}

DensityMatrix density_from_pauli_vector(const PauliVector& v) {
    check_state_cap(v.n, "density_from_pauli_vector");
    const auto size = basis_size(v.n);
    if (v.coeffs.size() != size) throw ValidationError("Pauli vector length mismatch");
    if (std::abs(v.coeffs[0] - 1.0) > kTraceTolerance) {
        throw ValidationError("Pauli vector is not normalized: coeffs[0] deviates from 1 by " +
                              std::to_string(std::abs(v.coeffs[0] - 1.0)));
    }
    const std::uint32_t dim = std::uint32_t{1} << v.n;
    const double norm = 1.0 / static_cast<double>(dim);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::uint64_t j = 0; j < size; ++j) {
        if (v.coeffs[j] == 0.0) continue;
        const PauliAction action = pauli_action(j, v.n);
        for (std::uint32_t b = 0; b < dim; ++b) {
            rho(action.perm[b], b) += v.coeffs[j] * norm * action.phase[b];
        }
    }
    rho = (rho + rho.adjoint()) / 2.0;  // remove numerical skew
    return DensityMatrix{v.n, std::move(rho)};
}

int CircuitPlan::injection_count() const {
    int count = 0;
    for (const CircuitStage& stage : stages) count += stage.inject_after ? 1 : 0;
    return count;
}

CircuitPlan build_mini_qpe(int n, double phase) {
    if (n < 3 || n > 5) {
        throw ValidationError("build_mini_qpe requires 3 <= n <= 5, got n=" + std::to_string(n));
    }
    if (!std::isfinite(phase)) throw ValidationError("phase must be finite");
    const int m = n - 1;  // clock qubits 0..m-1, target qubit n-1
    CircuitPlan plan;
    plan.n = n;
    plan.phase = phase;

    plan.stages.push_back(
        {"state-prep", lift_subset(ptm_from_unitary(1, gate_pauli_x()), {n - 1}, n), false});

    SparsePTM hadamards = identity_ptm(n);
    const SparsePTM h1 = ptm_from_unitary(1, gate_hadamard());
    for (int k = 0; k < m; ++k) {
        hadamards = compose(lift_subset(h1, {k}, n), hadamards);
    }
    plan.stages.push_back({"hadamard-layer", std::move(hadamards), false});

    for (int k = 0; k < m; ++k) {
        const double theta = 2.0 * M_PI * phase * std::pow(2.0, k);
        plan.stages.push_back(
            {"controlled-phase",
             lift_subset(ptm_from_unitary(2, gate_controlled_phase(theta)), {k, n - 1}, n), true});
    }

    for (const GateOp& gate : inverse_qft_gates(m)) {
        plan.stages.push_back(
            {"inverse-qft",
             lift_subset(ptm_from_unitary(static_cast<int>(gate.qubits.size()), gate.unitary),
                         gate.qubits, n),
             false});
    }
    return plan;
}

PauliVector execute_vector(const CircuitPlan& plan, const SparsePTM* noise,
                           const InjectionHook& after_injection) {
    check_state_cap(plan.n, "execute");
    if (noise && noise->n() != plan.n) {
        throw ValidationError("noise channel dimension mismatch: plan n=" + std::to_string(plan.n) +
                              " vs noise n=" + std::to_string(noise->n()));
    }
    PauliVector v = zero_state_vector(plan.n);
    for (const CircuitStage& stage : plan.stages) {
        if (stage.ptm.n() != plan.n) {
            throw ValidationError("stage '" + stage.role + "' dimension mismatch");
        }
        v = stage.ptm.apply(v);
        if (stage.inject_after && noise) {
            v = noise->apply(v);
            if (after_injection) after_injection(v);
        }
    }
    return v;
}

DensityMatrix execute(const CircuitPlan& plan, const SparsePTM* noise) {
    return density_from_pauli_vector(execute_vector(plan, noise));
}

double estimate_depolarizing_p(const PauliVector& ideal, const PauliVector& noisy, int injections) {
    if (ideal.n != noisy.n || ideal.coeffs.size() != noisy.coeffs.size()) {
        throw ValidationError("depolarizing fit dimension mismatch");
    }
    if (injections < 1) throw ValidationError("injection count must be >= 1");
    double ideal_norm = 0.0;
    double noisy_norm = 0.0;
    for (std::size_t k = 1; k < ideal.coeffs.size(); ++k) {
        ideal_norm += ideal.coeffs[k] * ideal.coeffs[k];
        noisy_norm += noisy.coeffs[k] * noisy.coeffs[k];
    }
    if (ideal_norm <= 0.0) {
        throw ValidationError("ideal vector has no non-identity component to fit against");
    }
    const double contraction = std::sqrt(noisy_norm / ideal_norm);
    if (contraction >= 1.0) return 0.0;  // no net contraction to undo
    return 1.0 - std::pow(contraction, 1.0 / static_cast<double>(injections));
}

PauliVector mitigate_global_depolarizing(const PauliVector& noisy, double p_est, int injections) {
    if (!(p_est >= 0.0) || p_est >= 1.0) {
        throw ValidationError("p_est must lie in [0, 1), got " + std::to_string(p_est));
    }
    if (injections < 1) throw ValidationError("injection count must be >= 1");
    const double scale = 1.0 / std::pow(1.0 - p_est, static_cast<double>(injections));
    PauliVector out = noisy;
    for (std::size_t k = 1; k < out.coeffs.size(); ++k) out.coeffs[k] *= scale;
    return out;
}

PtmInverter::PtmInverter(const SparsePTM& model, double condition_limit) : n_(model.n()) {
    check_state_cap(n_, "PtmInverter");
    const Eigen::MatrixXd dense = model.to_dense();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
    condition_number_ = smallest > 0.0 ? svd.singularValues()(0) / smallest
                                       : std::numeric_limits<double>::infinity();
    if (!(condition_number_ < condition_limit)) {
        throw ConditioningError("learned channel is too ill-conditioned to invert (condition number " +
                                    std::to_string(condition_number_) + ")",
                                condition_number_);
    }
    lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(dense);
}

PauliVector PtmInverter::apply_inverse(const PauliVector& v) const {
    if (v.n != n_) throw ValidationError("inverter dimension mismatch");
    Eigen::VectorXd dense(static_cast<Eigen::Index>(v.coeffs.size()));
    for (std::size_t k = 0; k < v.coeffs.size(); ++k) dense[static_cast<Eigen::Index>(k)] = v.coeffs[k];
    const Eigen::VectorXd solved = lu_.solve(dense);
    PauliVector out = v;
    for (std::size_t k = 0; k < v.coeffs.size(); ++k) out.coeffs[k] = solved[static_cast<Eigen::Index>(k)];
    out.coeffs[0] = 1.0;
    return out;
}

PauliVector mitigate_hpo(const PauliVector& noisy, const SparsePTM& learned, int injections) {
    if (injections < 1) throw ValidationError("injection count must be >= 1");
    const PtmInverter inverter(learned);
    PauliVector out = noisy;
    for (int k = 0; k < injections; ++k) out = inverter.apply_inverse(out);
    return out;
}

FidelityReport fidelity_report_with_model(int n, double phase, const NoiseParams& params,
                                          const SparsePTM& learned) {
    const GroundTruth truth = synthesize(TopologyGraph::chain(n), params);
    if (learned.n() != n) throw ValidationError("learned model dimension mismatch");

    const CircuitPlan plan = build_mini_qpe(n, phase);
    const int injections = plan.injection_count();

    const PauliVector v_ideal = execute_vector(plan);
    const PauliVector v_raw = execute_vector(plan, &truth.channel);

    const PtmInverter inverter(learned);
    const PauliVector v_hpo = execute_vector(plan, &truth.channel, [&inverter](PauliVector& v) {
        v = inverter.apply_inverse(v);
    });

    const double p_est = estimate_depolarizing_p(v_ideal, v_raw, injections);
    const PauliVector v_depol = mitigate_global_depolarizing(v_raw, p_est, injections);

    const DensityMatrix rho_ideal = density_from_pauli_vector(v_ideal);
    ClampStats stats;
    FidelityReport report;
    report.n = n;
    report.phase = phase;
    report.ideal = state_fidelity(rho_ideal, rho_ideal, &stats);
    report.raw = state_fidelity(rho_ideal, density_from_pauli_vector(v_raw), &stats);
    report.depol = state_fidelity(rho_ideal, density_from_pauli_vector(v_depol), &stats);
    report.hpo = state_fidelity(rho_ideal, density_from_pauli_vector(v_hpo), &stats);
    report.delta_hpo_vs_depol = report.hpo - report.depol;
    report.clamped_eigenvalues = stats.clamped;
    report.min_eigenvalue = stats.min_eigenvalue;
    report.p_est = p_est;
    report.condition_number = inverter.condition_number();
    report.injections = injections;
    return report;
}

FidelityReport fidelity_report(int n, double phase, const NoiseParams& params,
                               const HPOConfig& config) {
    const GroundTruth truth = synthesize(TopologyGraph::chain(n), params);
    const HPOResult hpo = run_hpo(truth, config);
    return fidelity_report_with_model(n, phase, params, hpo.effective);
}

}  // namespace hpo
