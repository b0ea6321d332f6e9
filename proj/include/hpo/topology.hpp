#pragma once

#include <utility>
#include <vector>

namespace hpo {

// Coupling graph: vertices are qubits, edges are the 2-qubit couplings that
// carry baseline noise blocks. Edges are stored as (u, v) with u < v.
struct TopologyGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    TopologyGraph() = default;
    TopologyGraph(int n, std::vector<std::pair<int, int>> edges);

    // Linear chain 0-1-2-...-(n-1).
    static TopologyGraph chain(int n);
};

}  // namespace hpo
