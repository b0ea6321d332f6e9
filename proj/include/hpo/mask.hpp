#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hpo/topology.hpp"

namespace hpo {

enum class MaskKind { Baseline, Residual };

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& text);

// Baseline rule: (w(P_i) <= w_max or w(P_j) <= w_max) and D_H(P_i, P_j) <= d_max.
// Residual rule: (w(P_i) == w_exact or w(P_j) == w_exact) and D_H <= d_max.
// The closed-form counts below assume the default w_max = d_max = 2 and
// w_exact = n; other values are carried but have no closed form.
struct MaskSpec {
    int n = 2;
    MaskKind kind = MaskKind::Baseline;
    int w_max = 2;
    int d_max = 2;
    int w_exact = 2;

    static MaskSpec baseline(int n, int w_max = 2, int d_max = 2);
    static MaskSpec residual(int n, int d_max = 2);

    bool matches(std::uint64_t i, std::uint64_t j) const;
};

struct MaskSet {
    int n = 2;
    MaskKind kind = MaskKind::Baseline;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // sorted, unique

    bool contains(std::uint32_t i, std::uint32_t j) const;
};

// Exact pair set for n <= 6. Residual masks are built from the 3^n weight-n
// seeds and their distance <= d_max neighborhoods; baseline masks scan the
// full grid.
MaskSet materialize(const MaskSpec& spec);

// Independent oracle: evaluates the predicate on every one of the 16^n pairs.
std::uint64_t brute_force_count(const MaskSpec& spec);

// |{(i,j) : w(P_i) = n, D_H <= 2}| = 3^n (1 + 3n + 9 C(n,2)).
std::uint64_t count_A(int n);
// Both sides weight n, D_H <= 2: 3^n (1 + 2n + 4 C(n,2)).
std::uint64_t count_intersection(int n);
// Residual-mask size by inclusion-exclusion: 3^n (1 + 4n + 14 C(n,2)).
std::uint64_t k_res_closed_form(int n);

// 1 - k_res/16^n for n >= 3; the n = 2 row reports the baseline stage (0).
double compression_rate(int n);

// Baseline parameter budget: 256 per coupling edge.
std::uint64_t base_complexity(const TopologyGraph& graph);

}  // namespace hpo
