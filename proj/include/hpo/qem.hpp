#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpo/noise.hpp"
#include "hpo/optimizer.hpp"
#include "hpo/pauli.hpp"
#include "hpo/ptm.hpp"

namespace hpo {

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-9;
inline constexpr double kEigenvalueSlack = 1e-9;
inline constexpr double kConditionLimit = 1e8;

// Hermitian, unit-trace matrix. Inversion-based mitigation and injected
// residuals can produce quasi-states with small negative eigenvalues, so
// positivity is not enforced here; fidelity clamps and counts them instead.
struct DensityMatrix {
    int n = 1;
    Eigen::MatrixXcd entries;
};

DensityMatrix make_density_matrix(int n, Eigen::MatrixXcd entries);

struct ClampStats {
    int clamped = 0;             // eigenvalues below -kEigenvalueSlack set to 0
    double min_eigenvalue = 0.0; // most negative eigenvalue seen
};

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via Hermitian
// eigendecompositions; negative eigenvalues are clamped to zero before the
// square roots and material clamps are reported through `stats`.
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma,
                      ClampStats* stats = nullptr);

PauliVector pauli_vector_from_density(const DensityMatrix& rho);
DensityMatrix density_from_pauli_vector(const PauliVector& v);

struct CircuitStage {
    std::string role;  // state-prep | hadamard-layer | controlled-phase | inverse-qft
    SparsePTM ptm;
    bool inject_after = false;
};

struct CircuitPlan {
    int n = 3;
    double phase = 0.0;
    std::vector<CircuitStage> stages;

    int injection_count() const;
};

// Phase estimation with n-1 clock qubits (qubits 0..n-2) and one target
// (qubit n-1) prepared in the phase eigenstate: Hadamard layer, one
// controlled-phase stage per clock with noise injected after each, and a
// gate-decomposed inverse QFT on the clocks. For phases representable in the
// clock register the ideal outcome is a single basis state.
CircuitPlan build_mini_qpe(int n, double phase);

DensityMatrix execute(const CircuitPlan& plan, const SparsePTM* noise = nullptr);

// Vector-level execution with a hook invoked right after every noise
// injection; the replay mitigation applies the learned inverse there.
using InjectionHook = std::function<void(PauliVector&)>;
PauliVector execute_vector(const CircuitPlan& plan, const SparsePTM* noise = nullptr,
                           const InjectionHook& after_injection = {});

// Single-scalar least-squares fit of the global contraction: c matches the
// non-identity norm of the noisy vector to the ideal one, and
// p_est = 1 - c^(1/injections).
double estimate_depolarizing_p(const PauliVector& ideal, const PauliVector& noisy, int injections);

// Rescales every non-identity coefficient by 1/(1-p_est)^injections.
PauliVector mitigate_global_depolarizing(const PauliVector& noisy, double p_est, int injections);

// Dense inverse of a learned channel, factored once; refuses channels whose
// condition number reaches kConditionLimit.
class PtmInverter {
public:
    explicit PtmInverter(const SparsePTM& model, double condition_limit = kConditionLimit);

    PauliVector apply_inverse(const PauliVector& v) const;
    double condition_number() const { return condition_number_; }

private:
    int n_;
    double condition_number_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Applies the inverse of the learned channel once per injection point and
// restores coeffs[0] = 1 exactly.
PauliVector mitigate_hpo(const PauliVector& noisy, const SparsePTM& learned, int injections);

struct FidelityReport {
    int n = 3;
    double phase = 0.0;
    double ideal = 1.0;
    double raw = 0.0;
    double depol = 0.0;
    double hpo = 0.0;
    double delta_hpo_vs_depol = 0.0;
    int clamped_eigenvalues = 0;
    // diagnostics
    double p_est = 0.0;
    double condition_number = 0.0;
    int injections = 0;
    double min_eigenvalue = 0.0;
};

// Four-scenario comparison on the mini-QPE circuit over a chain topology:
// ideal, raw, depolarizing-mitigated, and hpo-mitigated (replay inversion
// after each injection) with the model learned by run_hpo.
FidelityReport fidelity_report(int n, double phase, const NoiseParams& params,
                               const HPOConfig& config);

// Same comparison with a caller-supplied learned model (e.g. loaded from a
// characterization run).
FidelityReport fidelity_report_with_model(int n, double phase, const NoiseParams& params,
                                          const SparsePTM& learned);

}  // namespace hpo
