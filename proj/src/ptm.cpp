#include "hpo/ptm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

using Complex = std::complex<double>;

bool coord_less(const DeltaEntry& a, const DeltaEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
}

void check_dense_cap(int n, const char* what) {
    check_qubit_count(n);
    if (n > kDensePtmCap) {
        throw CapacityError(std::string(what) + " is capped at n=" + std::to_string(kDensePtmCap) +
                            " (got n=" + std::to_string(n) + ")");
    }
}

Eigen::Matrix2cd single_pauli(int digit) {
    Eigen::Matrix2cd m;
    switch (digit) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

}  // namespace

TopologyGraph::TopologyGraph(int n, std::vector<std::pair<int, int>> edge_list)
    : n(n), edges(std::move(edge_list)) {
    check_qubit_count(n);
    std::vector<std::pair<int, int>> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto [u, v] = sorted[k];
        if (u < 0 || v < 0 || u >= n || v >= n || u >= v) {
            throw ValidationError("invalid edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                  "): endpoints must satisfy 0 <= u < v < n");
        }
        if (k > 0 && sorted[k - 1] == sorted[k]) {
            throw ValidationError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                  ")");
        }
    }
}

TopologyGraph TopologyGraph::chain(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int q = 0; q + 1 < n; ++q) edges.emplace_back(q, q + 1);
    return TopologyGraph(n, std::move(edges));
}

SparsePTM::SparsePTM(int n, std::vector<DeltaEntry> delta) : n_(n), delta_(std::move(delta)) {
    check_dense_cap(n_, "SparsePTM");
    const auto size = basis_size(n_);
    std::sort(delta_.begin(), delta_.end(), coord_less);
    std::vector<DeltaEntry> kept;
    kept.reserve(delta_.size());
    for (std::size_t k = 0; k < delta_.size(); ++k) {
        const DeltaEntry& e = delta_[k];
        if (e.i >= size || e.j >= size) {
            throw ValidationError("delta coordinate (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ") out of range for n=" + std::to_string(n_));
        }
        if (!std::isfinite(e.value)) {
            throw ValidationError("non-finite delta value at (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ")");
        }
        if (k > 0 && delta_[k - 1].i == e.i && delta_[k - 1].j == e.j) {
            throw ValidationError("duplicate delta coordinate (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ")");
        }
        if (std::abs(e.value) < kDeltaPruneTolerance) continue;
        if (e.i == 0) {
            throw ValidationError("nonzero row-0 delta entry at column " + std::to_string(e.j) +
                                  " violates trace preservation");
        }
        kept.push_back(e);
    }
    delta_ = std::move(kept);
}

SparsePTM SparsePTM::identity(int n) { return SparsePTM(n, {}); }

SparsePTM identity_ptm(int n) { return SparsePTM::identity(n); }

std::span<const DeltaEntry> SparsePTM::row(std::uint32_t i) const {
    const DeltaEntry lo{i, 0, 0.0};
    const DeltaEntry hi{i + 1, 0, 0.0};
    const auto begin = std::lower_bound(delta_.begin(), delta_.end(), lo, coord_less);
    const auto end = std::lower_bound(begin, delta_.end(), hi, coord_less);
    return {begin, end};
}

double SparsePTM::delta_at(std::uint32_t i, std::uint32_t j) const {
    const DeltaEntry key{i, j, 0.0};
    const auto it = std::lower_bound(delta_.begin(), delta_.end(), key, coord_less);
    if (it != delta_.end() && it->i == i && it->j == j) return it->value;
    return 0.0;
}

PauliVector SparsePTM::apply(const PauliVector& v) const {
    if (v.n != n_ || v.coeffs.size() != basis_size(n_)) {
        throw ValidationError("PTM/vector dimension mismatch: n=" + std::to_string(n_) +
                              " vs vector n=" + std::to_string(v.n));
    }
    PauliVector out = v;
    for (const DeltaEntry& e : delta_) {
        out.coeffs[e.i] += e.value * v.coeffs[e.j];
    }
    return out;
}

Eigen::MatrixXd SparsePTM::to_dense() const {
    const auto size = static_cast<Eigen::Index>(basis_size(n_));
    Eigen::MatrixXd dense = Eigen::MatrixXd::Identity(size, size);
    for (const DeltaEntry& e : delta_) {
        dense(e.i, e.j) += e.value;
    }
    return dense;
}

Eigen::MatrixXcd pauli_matrix(std::uint64_t index, int n) {
    check_qubit_count(n, kDenseStateCap);
    if (index >= basis_size(n)) {
        throw ValidationError("Pauli index out of range");
    }
    Eigen::MatrixXcd m = single_pauli(static_cast<int>((index >> (2 * (n - 1))) & 3));
    for (int k = n - 2; k >= 0; --k) {
        const Eigen::Matrix2cd p = single_pauli(static_cast<int>((index >> (2 * k)) & 3));
        Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                next.block<2, 2>(2 * r, 2 * c) = m(r, c) * p;
            }
        }
        m = std::move(next);
    }
    return m;
}

SparsePTM ptm_from_kraus(int n, const std::vector<Eigen::MatrixXcd>& kraus) {
    check_qubit_count(n);
    if (n > kKrausCap) {
        throw CapacityError("ptm_from_kraus is capped at n=" + std::to_string(kKrausCap) +
                            " (got n=" + std::to_string(n) + ")");
    }
    if (kraus.empty()) throw ValidationError("empty Kraus set");
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    Eigen::MatrixXcd completeness = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& k : kraus) {
        if (k.rows() != dim || k.cols() != dim) {
            throw ValidationError("Kraus operator dimension mismatch: expected " +
                                  std::to_string(dim) + "x" + std::to_string(dim));
        }
        completeness += k.adjoint() * k;
    }
    const double tp_defect =
        (completeness - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (tp_defect > kKrausTpTolerance) {
        throw ValidationError("Kraus set is not trace preserving: sum K^d K deviates from identity by " +
                              std::to_string(tp_defect));
    }

    const auto size = basis_size(n);
    std::vector<Eigen::MatrixXcd> paulis(size);
    for (std::uint64_t j = 0; j < size; ++j) paulis[j] = pauli_matrix(j, n);

    const double norm = 1.0 / static_cast<double>(dim);
    std::vector<DeltaEntry> delta;
    for (std::uint64_t j = 0; j < size; ++j) {
        Eigen::MatrixXcd mapped = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& k : kraus) mapped += k * paulis[j] * k.adjoint();
        for (std::uint64_t i = 0; i < size; ++i) {
            const Complex entry = (paulis[i] * mapped).trace() * norm;
            if (std::abs(entry.imag()) > kKrausTpTolerance) {
                throw ValidationError("PTM entry has imaginary residue " +
                                      std::to_string(entry.imag()) + " at (" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")");
            }
            double value = entry.real() - (i == j ? 1.0 : 0.0);
            // Row-0 residue is exactly the trace-preservation defect, already
            // validated above; drop it so the stored channel is canonical.
            if (i == 0 && std::abs(value) <= kKrausTpTolerance) value = 0.0;
            if (std::abs(value) >= kDeltaPruneTolerance) {
                delta.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), value});
            }
        }
    }
    return SparsePTM(n, std::move(delta));
}

SparsePTM ptm_from_unitary(int n, const Eigen::MatrixXcd& u) {
    const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << n);
    if (u.rows() != dim || u.cols() != dim) {
        throw ValidationError("unitary dimension mismatch: expected " + std::to_string(dim) + "x" +
                              std::to_string(dim));
    }
    const double defect = (u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (defect > kKrausTpTolerance) {
        throw ValidationError("matrix is not unitary: U^d U deviates from identity by " +
                              std::to_string(defect));
    }
    return ptm_from_kraus(n, {u});
}

SparsePTM lift_subset(const SparsePTM& r_local, const std::vector<int>& qubits, int n_global) {
    check_dense_cap(n_global, "lift_subset");
    const int k = r_local.n();
    if (static_cast<int>(qubits.size()) != k) {
        throw ValidationError("lift_subset qubit tuple size " + std::to_string(qubits.size()) +
                              " does not match block size " + std::to_string(k));
    }
    std::vector<bool> used(static_cast<std::size_t>(n_global), false);
    for (int q : qubits) {
        if (q < 0 || q >= n_global) {
            throw ValidationError("lift target qubit " + std::to_string(q) + " out of range for n=" +
                                  std::to_string(n_global));
        }
        if (used[static_cast<std::size_t>(q)]) {
            throw ValidationError("lift target qubits must be distinct");
        }
        used[static_cast<std::size_t>(q)] = true;
    }

    std::vector<int> spectators;
    for (int q = 0; q < n_global; ++q) {
        if (!used[static_cast<std::size_t>(q)]) spectators.push_back(q);
    }
    const std::uint64_t spectator_count = std::uint64_t{1} << (2 * spectators.size());

    std::vector<DeltaEntry> delta;
    delta.reserve(r_local.delta().size() * spectator_count);
    for (const DeltaEntry& e : r_local.delta()) {
        std::uint64_t i_base = 0;
        std::uint64_t j_base = 0;
        for (int a = 0; a < k; ++a) {
            i_base |= ((static_cast<std::uint64_t>(e.i) >> (2 * a)) & 3) << (2 * qubits[a]);
            j_base |= ((static_cast<std::uint64_t>(e.j) >> (2 * a)) & 3) << (2 * qubits[a]);
        }
        for (std::uint64_t m = 0; m < spectator_count; ++m) {
            std::uint64_t pad = 0;
            for (std::size_t a = 0; a < spectators.size(); ++a) {
                pad |= ((m >> (2 * a)) & 3) << (2 * spectators[a]);
            }
            delta.push_back({static_cast<std::uint32_t>(i_base | pad),
                             static_cast<std::uint32_t>(j_base | pad), e.value});
        }
    }
    return SparsePTM(n_global, std::move(delta));
}

SparsePTM lift_edge(const SparsePTM& r2, std::pair<int, int> edge, int n_global) {
    if (r2.n() != 2) {
        throw ValidationError("lift_edge requires a 2-qubit block, got n=" + std::to_string(r2.n()));
    }
    if (edge.first == edge.second) {
        throw ValidationError("edge endpoints must be distinct");
    }
    return lift_subset(r2, {edge.first, edge.second}, n_global);
}

SparsePTM compose(const SparsePTM& second, const SparsePTM& first) {
    if (second.n() != first.n()) {
        throw ValidationError("compose dimension mismatch: n=" + std::to_string(second.n()) +
                              " vs n=" + std::to_string(first.n()));
    }
    // (I + B)(I + A) = I + A + B + B A, accumulated coordinate-wise.
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
    for (const DeltaEntry& b : second.delta()) {
        for (const DeltaEntry& a : first.row(b.j)) {
            acc[{b.i, a.j}] += b.value * a.value;
        }
    }
    for (const DeltaEntry& a : first.delta()) acc[{a.i, a.j}] += a.value;
    for (const DeltaEntry& b : second.delta()) acc[{b.i, b.j}] += b.value;

    std::vector<DeltaEntry> delta;
    delta.reserve(acc.size());
    for (const auto& [coord, value] : acc) {
        delta.push_back({coord.first, coord.second, value});
    }
    return SparsePTM(second.n(), std::move(delta));
}

SparsePTM compose_global(const TopologyGraph& graph,
                         const std::map<std::pair<int, int>, SparsePTM>& edge_ptms) {
    check_dense_cap(graph.n, "compose_global");
    std::vector<std::pair<int, int>> edges = graph.edges;
    std::sort(edges.begin(), edges.end());

    SparsePTM result = identity_ptm(graph.n);
    for (const auto& edge : edges) {
        const auto it = edge_ptms.find(edge);
        if (it == edge_ptms.end()) {
            throw ValidationError("missing PTM assignment for edge (" + std::to_string(edge.first) +
                                  ", " + std::to_string(edge.second) + ")");
        }
        result = compose(lift_edge(it->second, edge, graph.n), result);
    }
    return result;
}

SparsePTM effective_ptm(const SparsePTM& frozen, const std::vector<DeltaEntry>& residual,
                        const MaskSet& mask) {
    if (frozen.n() != mask.n) {
        throw ValidationError("frozen model and mask dimension mismatch");
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
    for (const DeltaEntry& e : frozen.delta()) acc[{e.i, e.j}] += e.value;
    for (const DeltaEntry& e : residual) {
        if (!mask.contains(e.i, e.j)) {
            throw ValidationError("residual coordinate (" + std::to_string(e.i) + ", " +
                                  std::to_string(e.j) + ") lies outside the mask");
        }
        acc[{e.i, e.j}] += e.value;
    }
    std::vector<DeltaEntry> delta;
    delta.reserve(acc.size());
    for (const auto& [coord, value] : acc) {
        delta.push_back({coord.first, coord.second, value});
    }
    return SparsePTM(frozen.n(), std::move(delta));
}

}  // namespace hpo
