#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hpo/mask.hpp"
#include "hpo/noise.hpp"
#include "hpo/ptm.hpp"
#include "hpo/topology.hpp"

namespace hpo {

// One tomographic data point: observable row i, sparse input coefficient
// vector, and the ground-truth expectation target.
struct ProbeRecord {
    std::uint32_t observable_row = 0;
    std::vector<std::pair<std::uint32_t, double>> input;  // sorted by index
    double target = 0.0;
};

struct HPOConfig {
    double learning_rate = 0.002;
    double eta_min = 1e-5;
    int epochs = 3000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    double convergence_threshold = 1e-13;
    double observation_sigma = 0.0;  // additive Gaussian noise on probe targets

    void validate() const;
};

struct TraceRow {
    int epoch = 0;   // number of Adam updates applied so far
    double mse = 0;  // full-batch training MSE at that point
    double lr = 0;   // schedule value the next update would use
};

struct ExperimentTrace {
    std::string stage;
    std::vector<TraceRow> rows;
};

// Direct-entry probes (one per mask pair) for training, plus held-out probes
// with dense random inputs for validation.
struct ProbeSet {
    std::vector<ProbeRecord> training;
    std::vector<ProbeRecord> validation;
};

ProbeSet generate_probes(const SparsePTM& truth, const MaskSet& mask, int n_random_validation,
                         std::uint64_t seed, double observation_sigma = 0.0);

double mse_loss(const SparsePTM& model, const std::vector<ProbeRecord>& probes);

// Loss gradient with respect to the delta entries, restricted to mask
// coordinates; every mask pair appears exactly once (possibly with value 0),
// off-mask coordinates never appear.
std::vector<DeltaEntry> analytic_gradient(const SparsePTM& model,
                                          const std::vector<ProbeRecord>& probes,
                                          const MaskSet& mask);

double cosine_annealing_lr(int epoch, const HPOConfig& config);

// Adam moment vectors indexed by masked parameter position; parameters
// outside that vector cannot be touched by construction.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step_count = 0;

    explicit AdamState(std::size_t size) : m(size, 0.0), v(size, 0.0) {}
};

void projected_adam_step(AdamState& state, const std::vector<double>& grads, double lr,
                         const HPOConfig& config, std::vector<double>& params);

struct FitResult {
    SparsePTM model;                       // fitted channel (effective model)
    ExperimentTrace trace;
    std::vector<DeltaEntry> residual;      // fitted values on trainable coordinates
    double validation_mse = 0.0;
    std::size_t active_parameters = 0;
};

// Called once per recorded trace row with the current state of the run;
// lets callers audit that frozen/off-mask data never moves.
using StageObserver =
    std::function<void(int epoch, const SparsePTM& frozen, const std::vector<DeltaEntry>& residual)>;

FitResult fit_baseline(const SparsePTM& truth_2q, const HPOConfig& config,
                       const StageObserver& observer = {});
FitResult fit_residual(const SparsePTM& truth, const SparsePTM& frozen, int n,
                       const HPOConfig& config, const StageObserver& observer = {});

struct HPOResult {
    SparsePTM baseline_2q{2, {}};
    SparsePTM frozen;                  // lifted + composed baseline, stage-2 constant
    std::vector<DeltaEntry> residual;  // stage-2 fitted coordinates
    SparsePTM effective;
    std::vector<ExperimentTrace> traces;
    std::size_t active_parameters = 0;  // stage-2 trainable coordinate count
    double baseline_validation_mse = 0.0;
    double residual_validation_mse = 0.0;
};

// Stage 1 fits the shared 2-qubit edge block, lifts it onto every edge and
// freezes the composition; stage 2 fits only residual-mask coordinates.
HPOResult run_hpo(const GroundTruth& truth, const HPOConfig& config,
                  const StageObserver& stage2_observer = {});

}  // namespace hpo
