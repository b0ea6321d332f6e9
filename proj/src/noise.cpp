#include "hpo/noise.hpp"

#include <cmath>
#include <complex>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

void check_unit_interval(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError(std::string(name) + " must lie in [0, 1], got " + std::to_string(x));
    }
}

}  // namespace

double PortableRng::gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

SparsePTM depolarizing_ptm(double p) {
    check_unit_interval(p, "p_depol");
    std::vector<DeltaEntry> delta;
    for (std::uint32_t k = 1; k <= 3; ++k) delta.push_back({k, k, -p});
    return SparsePTM(1, std::move(delta));
}

SparsePTM amplitude_damping_ptm(double gamma) {
    check_unit_interval(gamma, "gamma_ad");
    using Complex = std::complex<double>;
    Eigen::MatrixXcd k0(2, 2);
    Eigen::MatrixXcd k1(2, 2);
    k0 << 1, 0, 0, Complex(std::sqrt(1.0 - gamma), 0);
    k1 << 0, Complex(std::sqrt(gamma), 0), 0, 0;
    return ptm_from_kraus(1, {k0, k1});
}

SparsePTM zz_crosstalk_ptm(double theta) {
    if (!std::isfinite(theta)) throw ValidationError("theta_zz must be finite");
    using Complex = std::complex<double>;
    // exp(-i theta Z(x)Z / 2) is diagonal with phase -theta/2 on |00>,|11>
    // and +theta/2 on |01>,|10>.
    const Complex same = std::exp(Complex(0, -theta / 2.0));
    const Complex diff = std::exp(Complex(0, theta / 2.0));
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
    u(0, 0) = same;
    u(1, 1) = diff;
    u(2, 2) = diff;
    u(3, 3) = same;
    return ptm_from_unitary(2, u);
}

std::vector<DeltaEntry> random_residual(int n, const MaskSet& mask, double magnitude,
                                        std::uint64_t seed, double density) {
    if (mask.kind != MaskKind::Residual) {
        throw ValidationError("random_residual requires a residual-kind mask");
    }
    if (mask.n != n) {
        throw ValidationError("mask dimension mismatch: mask n=" + std::to_string(mask.n) +
                              " vs n=" + std::to_string(n));
    }
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw ValidationError("residual magnitude must be finite and nonnegative");
    }
    check_unit_interval(density, "residual_density");
    if (magnitude == 0.0) return {};  // the knob is off: nothing to inject

    PortableRng rng(seed);
    std::vector<DeltaEntry> out;
    for (const auto& [i, j] : mask.pairs) {
        if (i == 0) continue;  // trace preservation
        if (rng.uniform() < density) {
            out.push_back({i, j, magnitude * rng.uniform_symmetric()});
        }
    }
    return out;
}

GroundTruth synthesize(const TopologyGraph& graph, const NoiseParams& params) {
    check_unit_interval(params.p_depol, "p_depol");
    check_unit_interval(params.gamma_ad, "gamma_ad");
    if (!std::isfinite(params.theta_zz)) throw ValidationError("theta_zz must be finite");

    GroundTruth truth;
    truth.graph = graph;
    truth.params = params;

    // Per-qubit channel: depolarizing first, then amplitude damping; the edge
    // block applies it to both endpoints and follows with the ZZ rotation.
    const SparsePTM local = compose(amplitude_damping_ptm(params.gamma_ad),
                                    depolarizing_ptm(params.p_depol));
    const SparsePTM both = compose(lift_subset(local, {1}, 2), lift_subset(local, {0}, 2));
    truth.edge_block = compose(zz_crosstalk_ptm(params.theta_zz), both);

    std::map<std::pair<int, int>, SparsePTM> assignment;
    for (const auto& edge : graph.edges) assignment.emplace(edge, truth.edge_block);
    truth.base_channel = compose_global(graph, assignment);

    const MaskSet mask = materialize(MaskSpec::residual(graph.n));
    truth.injected = random_residual(graph.n, mask, params.residual_magnitude, params.seed,
                                     params.residual_density);
    truth.channel = effective_ptm(truth.base_channel, truth.injected, mask);
    return truth;
}

SparsePTM ground_truth_channel(const TopologyGraph& graph, const NoiseParams& params) {
    return synthesize(graph, params).channel;
}

}  // namespace hpo
