#include "hpo/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

void check_beta(double beta, const char* name) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ValidationError(std::string(name) + " must lie in (0, 1), got " + std::to_string(beta));
    }
}

// Training probes are unit-basis, so against R = I + frozen + theta the k-th
// prediction is a constant plus (for trainable coordinates) one parameter:
// pred_k = offset_k + theta_k. The fit loop exploits that separability.
struct SeparableProblem {
    // residual offset d_k = pred_k(theta=0) - target_k per trainable coordinate
    std::vector<double> offsets;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> coords;
    double inert_loss_sum = 0.0;  // probes with no trainable coordinate
    std::size_t probe_count = 0;

    double loss(const std::vector<double>& params) const {
        double sum = inert_loss_sum;
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double r = params[k] + offsets[k];
            sum += r * r;
        }
        return sum / static_cast<double>(probe_count);
    }

    void gradient(const std::vector<double>& params, std::vector<double>& out) const {
        const double scale = 2.0 / static_cast<double>(probe_count);
        for (std::size_t k = 0; k < params.size(); ++k) {
            out[k] = scale * (params[k] + offsets[k]);
        }
    }
};

double predict(const SparsePTM& model, const ProbeRecord& probe) {
    double pred = 0.0;
    for (const auto& [j, x] : probe.input) {
        if (j == probe.observable_row) pred += x;
    }
    const auto row = model.row(probe.observable_row);
    auto it = row.begin();
    for (const auto& [j, x] : probe.input) {
        while (it != row.end() && it->j < j) ++it;
        if (it == row.end()) break;
        if (it->j == j) pred += it->value * x;
    }
    return pred;
}

struct StageOutcome {
    std::vector<double> params;
    ExperimentTrace trace;
};

StageOutcome run_stage(const SeparableProblem& problem, const std::string& stage_label,
                       const HPOConfig& config, const SparsePTM& frozen,
                       const std::vector<std::pair<std::uint32_t, std::uint32_t>>& coords,
                       const StageObserver& observer) {
    StageOutcome out;
    out.trace.stage = stage_label;
    out.params.assign(coords.size(), 0.0);

    const auto schedule = [&config](int update_index) {
        return cosine_annealing_lr(std::min(update_index, config.epochs - 1), config);
    };
    const auto snapshot = [&](int epoch) {
        if (!observer) return;
        std::vector<DeltaEntry> residual;
        residual.reserve(coords.size());
        for (std::size_t k = 0; k < coords.size(); ++k) {
            residual.push_back({coords[k].first, coords[k].second, out.params[k]});
        }
        observer(epoch, frozen, residual);
    };

    AdamState adam(coords.size());
    std::vector<double> grads(coords.size(), 0.0);
    double mse = problem.loss(out.params);
    out.trace.rows.push_back({0, mse, schedule(0)});
    snapshot(0);

    for (int update = 0; update < config.epochs && mse > config.convergence_threshold; ++update) {
        problem.gradient(out.params, grads);
        projected_adam_step(adam, grads, cosine_annealing_lr(update, config), config, out.params);
        mse = problem.loss(out.params);
        out.trace.rows.push_back({update + 1, mse, schedule(update + 1)});
        snapshot(update + 1);
    }
    return out;
}

FitResult fit_masked(const SparsePTM& truth, const SparsePTM& frozen, const MaskSet& mask,
                     const std::string& stage_label, const HPOConfig& config,
                     const StageObserver& observer) {
    config.validate();
    const ProbeSet probes = generate_probes(truth, mask, 64, config.seed, config.observation_sigma);

    SeparableProblem problem;
    problem.probe_count = probes.training.size();
    for (std::size_t k = 0; k < mask.pairs.size(); ++k) {
        const auto [i, j] = mask.pairs[k];
        const ProbeRecord& probe = probes.training[k];
        const double offset = (i == j ? 1.0 : 0.0) + frozen.delta_at(i, j) - probe.target;
        if (i == 0) {
            problem.inert_loss_sum += offset * offset;  // row 0 is never trainable
        } else {
            problem.coords.emplace_back(i, j);
            problem.offsets.push_back(offset);
        }
    }

    StageOutcome outcome = run_stage(problem, stage_label, config, frozen, problem.coords, observer);

    FitResult result;
    result.trace = std::move(outcome.trace);
    result.active_parameters = problem.coords.size();
    result.residual.reserve(problem.coords.size());
    for (std::size_t k = 0; k < problem.coords.size(); ++k) {
        result.residual.push_back(
            {problem.coords[k].first, problem.coords[k].second, outcome.params[k]});
    }
    result.model = effective_ptm(frozen, result.residual, mask);
    result.validation_mse = mse_loss(result.model, probes.validation);
    return result;
}

}  // namespace

void HPOConfig::validate() const {
    if (!(eta_min > 0.0) || !(eta_min <= learning_rate)) {
        throw ValidationError("require 0 < eta_min <= learning_rate");
    }
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    check_beta(adam_beta1, "adam_beta1");
    check_beta(adam_beta2, "adam_beta2");
    if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be positive");
    if (!(convergence_threshold >= 0.0)) {
        throw ValidationError("convergence_threshold must be nonnegative");
    }
    if (!(observation_sigma >= 0.0)) throw ValidationError("observation_sigma must be nonnegative");
}

ProbeSet generate_probes(const SparsePTM& truth, const MaskSet& mask, int n_random_validation,
                         std::uint64_t seed, double observation_sigma) {
    if (truth.n() != mask.n) {
        throw ValidationError("truth and mask dimension mismatch");
    }
    if (n_random_validation < 0) {
        throw ValidationError("validation probe count must be nonnegative");
    }
    PortableRng rng(seed);
    ProbeSet set;

    set.training.reserve(mask.pairs.size());
    for (const auto& [i, j] : mask.pairs) {
        ProbeRecord probe;
        probe.observable_row = i;
        probe.input = {{j, 1.0}};
        probe.target = (i == j ? 1.0 : 0.0) + truth.delta_at(i, j);
        if (observation_sigma > 0.0) probe.target += observation_sigma * rng.gaussian();
        set.training.push_back(std::move(probe));
    }

    const auto size = basis_size(truth.n());
    for (int k = 0; k < n_random_validation; ++k) {
        ProbeRecord probe;
        probe.observable_row =
            1 + static_cast<std::uint32_t>(rng.uniform() * static_cast<double>(size - 1));
        probe.input.reserve(size);
        probe.input.emplace_back(0, 1.0);
        for (std::uint32_t j = 1; j < size; ++j) {
            probe.input.emplace_back(j, rng.uniform_symmetric());
        }
        double target = 0.0;
        for (const auto& [j, x] : probe.input) {
            if (j == probe.observable_row) target += x;
        }
        for (const DeltaEntry& e : truth.row(probe.observable_row)) {
            target += e.value * probe.input[e.j].second;
        }
        if (observation_sigma > 0.0) target += observation_sigma * rng.gaussian();
        probe.target = target;
        set.validation.push_back(std::move(probe));
    }
    return set;
}

double mse_loss(const SparsePTM& model, const std::vector<ProbeRecord>& probes) {
    if (probes.empty()) throw ValidationError("mse_loss requires a nonempty probe list");
    double sum = 0.0;
    for (const ProbeRecord& probe : probes) {
        const double r = predict(model, probe) - probe.target;
        sum += r * r;
    }
    return sum / static_cast<double>(probes.size());
}

std::vector<DeltaEntry> analytic_gradient(const SparsePTM& model,
                                          const std::vector<ProbeRecord>& probes,
                                          const MaskSet& mask) {
    if (probes.empty()) throw ValidationError("analytic_gradient requires a nonempty probe list");
    if (model.n() != mask.n) throw ValidationError("model and mask dimension mismatch");

    std::vector<double> values(mask.pairs.size(), 0.0);
    const double scale = 2.0 / static_cast<double>(probes.size());
    for (const ProbeRecord& probe : probes) {
        const double r = predict(model, probe) - probe.target;
        for (const auto& [j, x] : probe.input) {
            const auto key = std::make_pair(probe.observable_row, j);
            const auto it = std::lower_bound(mask.pairs.begin(), mask.pairs.end(), key);
            if (it != mask.pairs.end() && *it == key) {
                values[static_cast<std::size_t>(it - mask.pairs.begin())] += scale * r * x;
            }
        }
    }
    std::vector<DeltaEntry> out;
    out.reserve(mask.pairs.size());
    for (std::size_t k = 0; k < mask.pairs.size(); ++k) {
        out.push_back({mask.pairs[k].first, mask.pairs[k].second, values[k]});
    }
    return out;
}

double cosine_annealing_lr(int epoch, const HPOConfig& config) {
    if (epoch < 0 || epoch >= config.epochs) {
        throw ValidationError("epoch " + std::to_string(epoch) + " outside schedule [0, " +
                              std::to_string(config.epochs) + ")");
    }
    if (config.epochs == 1) return config.learning_rate;
    const double progress = static_cast<double>(epoch) / static_cast<double>(config.epochs - 1);
    return config.eta_min +
           (config.learning_rate - config.eta_min) * (1.0 + std::cos(M_PI * progress)) / 2.0;
}

void projected_adam_step(AdamState& state, const std::vector<double>& grads, double lr,
                         const HPOConfig& config, std::vector<double>& params) {
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw ValidationError("Adam state/gradient/parameter size mismatch");
    }
    state.step_count += 1;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step_count));
    const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step_count));
    for (std::size_t k = 0; k < params.size(); ++k) {
        state.m[k] = config.adam_beta1 * state.m[k] + (1.0 - config.adam_beta1) * grads[k];
        state.v[k] = config.adam_beta2 * state.v[k] + (1.0 - config.adam_beta2) * grads[k] * grads[k];
        const double m_hat = state.m[k] / bias1;
        const double v_hat = state.v[k] / bias2;
        params[k] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
}

FitResult fit_baseline(const SparsePTM& truth_2q, const HPOConfig& config,
                       const StageObserver& observer) {
    if (truth_2q.n() != 2) {
        throw ValidationError("fit_baseline requires a 2-qubit channel, got n=" +
                              std::to_string(truth_2q.n()));
    }
    const MaskSet mask = materialize(MaskSpec::baseline(2));
    return fit_masked(truth_2q, identity_ptm(2), mask, "baseline", config, observer);
}

FitResult fit_residual(const SparsePTM& truth, const SparsePTM& frozen, int n,
                       const HPOConfig& config, const StageObserver& observer) {
    if (n < 3 || n > 5) {
        throw ValidationError("fit_residual requires 3 <= n <= 5, got n=" + std::to_string(n));
    }
    if (truth.n() != n || frozen.n() != n) {
        throw ValidationError("fit_residual dimension mismatch");
    }
    const MaskSet mask = materialize(MaskSpec::residual(n));
    return fit_masked(truth, frozen, mask, "residual-" + std::to_string(n), config, observer);
}

HPOResult run_hpo(const GroundTruth& truth, const HPOConfig& config,
                  const StageObserver& stage2_observer) {
    config.validate();
    const int n = truth.graph.n;
    if (n > 5) {
        throw CapacityError("run_hpo is capped at n=5 (got n=" + std::to_string(n) + ")");
    }

    HPOResult result;
    FitResult stage1 = fit_baseline(truth.edge_block, config);
    result.baseline_2q = stage1.model;
    result.baseline_validation_mse = stage1.validation_mse;
    result.traces.push_back(std::move(stage1.trace));

    std::map<std::pair<int, int>, SparsePTM> assignment;
    for (const auto& edge : truth.graph.edges) assignment.emplace(edge, result.baseline_2q);
    result.frozen = compose_global(truth.graph, assignment);

    if (n >= 3) {
        FitResult stage2 = fit_residual(truth.channel, result.frozen, n, config, stage2_observer);
        result.residual = std::move(stage2.residual);
        result.effective = std::move(stage2.model);
        result.residual_validation_mse = stage2.validation_mse;
        result.active_parameters = stage2.active_parameters;
        result.traces.push_back(std::move(stage2.trace));
    } else {
        result.effective = result.frozen;
    }
    return result;
}

}  // namespace hpo
