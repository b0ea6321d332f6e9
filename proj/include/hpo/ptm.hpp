#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hpo/mask.hpp"
#include "hpo/pauli.hpp"
#include "hpo/topology.hpp"

namespace hpo {

// One nonzero of the delta part of R = I + Delta.
struct DeltaEntry {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double value = 0.0;
};

inline constexpr double kDeltaPruneTolerance = 1e-14;
inline constexpr double kKrausTpTolerance = 1e-10;
inline constexpr int kDensePtmCap = 6;   // dense 4^n x 4^n work
inline constexpr int kDenseStateCap = 5; // dense 2^n x 2^n state work
inline constexpr int kKrausCap = 3;

// Pauli transfer matrix stored as R = I + Delta with only Delta kept, as a
// coordinate list sorted by (row, col). Trace preservation shows up as an
// empty row 0, which every constructor enforces.
class SparsePTM {
public:
    SparsePTM() = default;  // 1-qubit identity
    SparsePTM(int n, std::vector<DeltaEntry> delta);

    static SparsePTM identity(int n);

    int n() const { return n_; }
    const std::vector<DeltaEntry>& delta() const { return delta_; }

    // Entries of delta row i (sorted by column).
    std::span<const DeltaEntry> row(std::uint32_t i) const;
    // Delta value at (i, j), 0 when absent.
    double delta_at(std::uint32_t i, std::uint32_t j) const;

    PauliVector apply(const PauliVector& v) const;
    Eigen::MatrixXd to_dense() const;

private:
    int n_ = 1;
    std::vector<DeltaEntry> delta_;
};

SparsePTM identity_ptm(int n);

// Dense 2^n x 2^n representation of the Pauli string with the given index.
Eigen::MatrixXcd pauli_matrix(std::uint64_t index, int n);

// R_ij = Tr[P_i sum_k K_k P_j K_k^dagger] / 2^n. The Kraus set must be trace
// preserving to 1e-10; n is capped at 3 (dense 2^n-dimensional work).
SparsePTM ptm_from_kraus(int n, const std::vector<Eigen::MatrixXcd>& kraus);

// Single-Kraus convenience for unitary layers.
SparsePTM ptm_from_unitary(int n, const Eigen::MatrixXcd& u);

// Embed a k-qubit PTM so it acts on the listed global qubits (qubits[a] hosts
// local qubit a) and as identity on the rest.
SparsePTM lift_subset(const SparsePTM& r_local, const std::vector<int>& qubits, int n_global);
SparsePTM lift_edge(const SparsePTM& r2, std::pair<int, int> edge, int n_global);

// Matrix product second * first (i.e. `first` is applied to states first).
SparsePTM compose(const SparsePTM& second, const SparsePTM& first);

// Product of lifted edge blocks in ascending lexicographic edge order:
// R_global = L_{e_k}(R_k) * ... * L_{e_1}(R_1). Reduces to the tensor-product
// construction when the edges are disjoint.
SparsePTM compose_global(const TopologyGraph& graph,
                         const std::map<std::pair<int, int>, SparsePTM>& edge_ptms);

// I + W_frozen + (residual restricted to mask). Residual coordinates outside
// the mask are rejected rather than dropped.
SparsePTM effective_ptm(const SparsePTM& frozen, const std::vector<DeltaEntry>& residual,
                        const MaskSet& mask);

}  // namespace hpo
