#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hpo/mask.hpp"
#include "hpo/ptm.hpp"
#include "hpo/topology.hpp"

namespace hpo {

// Physical knobs of the synthetic ground truth. Residual entries are drawn
// uniformly from [-magnitude, +magnitude] on a density-fraction of the
// residual mask.
struct NoiseParams {
    double p_depol = 0.0;
    double gamma_ad = 0.0;
    double theta_zz = 0.0;
    double residual_magnitude = 0.0;
    double residual_density = 0.05;
    std::uint64_t seed = 0;
};

// Deterministic across platforms: mt19937_64 (standard-mandated sequence)
// mapped to doubles via the top 53 bits. Model sidecars name this generator
// as "mt19937-64/53bit".
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    double uniform_symmetric() {  // [-1, 1)
        return 2.0 * uniform() - 1.0;
    }
    double gaussian();  // Box-Muller

private:
    std::mt19937_64 engine_;
};

inline constexpr char kRngName[] = "mt19937-64/53bit";

SparsePTM depolarizing_ptm(double p);
SparsePTM amplitude_damping_ptm(double gamma);
SparsePTM zz_crosstalk_ptm(double theta);

// Seeded sparse residual supported on the given Residual mask, excluding all
// row-0 coordinates so trace preservation survives injection.
std::vector<DeltaEntry> random_residual(int n, const MaskSet& mask, double magnitude,
                                        std::uint64_t seed, double density = 0.05);

// The synthesis bundle keeps every separately-known piece of the ground truth
// together: the shared 2-qubit edge block (device-uniform parameters), the
// composed baseline-only channel, the injected residual, and their sum.
struct GroundTruth {
    TopologyGraph graph;
    NoiseParams params;
    SparsePTM edge_block{2, {}};
    SparsePTM base_channel;
    std::vector<DeltaEntry> injected;
    SparsePTM channel;
};

GroundTruth synthesize(const TopologyGraph& graph, const NoiseParams& params);
SparsePTM ground_truth_channel(const TopologyGraph& graph, const NoiseParams& params);

}  // namespace hpo
