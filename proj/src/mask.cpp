#include "hpo/mask.hpp"

#include <algorithm>

#include "hpo/errors.hpp"
#include "hpo/pauli.hpp"

namespace hpo {

namespace {

constexpr int kEnumerationCap = 6;  // 16^6 ~ 16.8M pairs is the scan ceiling

void check_enumerable(int n, const char* what) {
    check_qubit_count(n);
    if (n > kEnumerationCap) {
        throw CapacityError(std::string(what) + " enumerates 16^n pairs and is capped at n=" +
                            std::to_string(kEnumerationCap) + " (got n=" + std::to_string(n) +
                            "); use the closed-form counts instead");
    }
}

std::uint64_t pow3(int n) {
    std::uint64_t r = 1;
    for (int k = 0; k < n; ++k) r *= 3;
    return r;
}

std::uint64_t choose2(std::uint64_t n) { return n * (n - 1) / 2; }

std::vector<int> weights_table(int n) {
    const auto size = basis_size(n);
    std::vector<int> w(size);
    for (std::uint64_t k = 0; k < size; ++k) w[k] = weight(k, n);
    return w;
}

// All indices t != s with D_H(s, t) <= d_max, generated by choosing up to
// d_max positions and replacing each with one of its 3 alternative letters.
void neighborhood(std::uint64_t s, int n, int d_max, std::vector<std::uint32_t>& out) {
    out.clear();
    out.push_back(static_cast<std::uint32_t>(s));
    std::vector<std::uint64_t> frontier{s};
    std::vector<std::uint64_t> next;
    for (int d = 0; d < d_max; ++d) {
        next.clear();
        for (std::uint64_t base : frontier) {
            // Changing only positions that still agree with s guarantees each
            // step strictly increases the distance from s.
            for (int k = 0; k < n; ++k) {
                const std::uint64_t s_digit = (s >> (2 * k)) & 3;
                if (((base >> (2 * k)) & 3) != s_digit) continue;
                for (std::uint64_t digit = 0; digit < 4; ++digit) {
                    if (digit == s_digit) continue;
                    const std::uint64_t t = (base & ~(std::uint64_t{3} << (2 * k))) | (digit << (2 * k));
                    next.push_back(t);
                }
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        for (std::uint64_t t : next) out.push_back(static_cast<std::uint32_t>(t));
        frontier = next;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace

std::string to_string(MaskKind kind) {
    return kind == MaskKind::Baseline ? "baseline" : "residual";
}

MaskKind mask_kind_from_string(const std::string& text) {
    if (text == "baseline") return MaskKind::Baseline;
    if (text == "residual") return MaskKind::Residual;
    throw ValidationError("unknown mask kind '" + text + "': expected 'baseline' or 'residual'");
}

MaskSpec MaskSpec::baseline(int n, int w_max, int d_max) {
    check_qubit_count(n);
    if (w_max < 0 || d_max < 0) throw ValidationError("mask bounds must be nonnegative");
    return MaskSpec{n, MaskKind::Baseline, w_max, d_max, n};
}

MaskSpec MaskSpec::residual(int n, int d_max) {
    check_qubit_count(n);
    if (d_max < 0) throw ValidationError("mask bounds must be nonnegative");
    return MaskSpec{n, MaskKind::Residual, 2, d_max, n};
}

bool MaskSpec::matches(std::uint64_t i, std::uint64_t j) const {
    const int wi = weight(i, n);
    const int wj = weight(j, n);
    const bool weight_ok = kind == MaskKind::Baseline ? (wi <= w_max || wj <= w_max)
                                                      : (wi == w_exact || wj == w_exact);
    return weight_ok && hamming_distance(i, j, n) <= d_max;
}

bool MaskSet::contains(std::uint32_t i, std::uint32_t j) const {
    return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(i, j));
}

MaskSet materialize(const MaskSpec& spec) {
    check_enumerable(spec.n, "materialize");
    MaskSet set;
    set.n = spec.n;
    set.kind = spec.kind;
    const auto size = static_cast<std::uint32_t>(basis_size(spec.n));

    if (spec.kind == MaskKind::Baseline) {
        const auto w = weights_table(spec.n);
        for (std::uint32_t i = 0; i < size; ++i) {
            for (std::uint32_t j = 0; j < size; ++j) {
                if ((w[i] <= spec.w_max || w[j] <= spec.w_max) &&
                    hamming_distance(i, j, spec.n) <= spec.d_max) {
                    set.pairs.emplace_back(i, j);
                }
            }
        }
        return set;  // generated in sorted order
    }

    // Residual: seed from the weight-w_exact strings, expand their Hamming
    // neighborhoods, and keep both orientations.
    std::vector<std::uint32_t> nbrs;
    for (std::uint32_t s = 0; s < size; ++s) {
        if (weight(s, spec.n) != spec.w_exact) continue;
        neighborhood(s, spec.n, spec.d_max, nbrs);
        for (std::uint32_t t : nbrs) {
            set.pairs.emplace_back(s, t);
            set.pairs.emplace_back(t, s);
        }
    }
    std::sort(set.pairs.begin(), set.pairs.end());
    set.pairs.erase(std::unique(set.pairs.begin(), set.pairs.end()), set.pairs.end());
    return set;
}

std::uint64_t brute_force_count(const MaskSpec& spec) {
    check_enumerable(spec.n, "brute_force_count");
    const auto size = static_cast<std::uint32_t>(basis_size(spec.n));
    std::uint64_t count = 0;
    for (std::uint32_t i = 0; i < size; ++i) {
        for (std::uint32_t j = 0; j < size; ++j) {
            count += spec.matches(i, j) ? 1 : 0;
        }
    }
    return count;
}

std::uint64_t count_A(int n) {
    check_qubit_count(n);
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    return pow3(n) * (1 + 3 * un + 9 * choose2(un));
}

std::uint64_t count_intersection(int n) {
    check_qubit_count(n);
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    return pow3(n) * (1 + 2 * un + 4 * choose2(un));
}

std::uint64_t k_res_closed_form(int n) {
    check_qubit_count(n);
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    return pow3(n) * (1 + 4 * un + 14 * choose2(un));
}

double compression_rate(int n) {
    if (n < 2) throw ValidationError("compression_rate requires n >= 2");
    check_qubit_count(n);
    if (n == 2) return 0.0;  // the baseline stage is the active stage at n = 2
    const double full = static_cast<double>(basis_size(n)) * static_cast<double>(basis_size(n));
    return 1.0 - static_cast<double>(k_res_closed_form(n)) / full;
}

std::uint64_t base_complexity(const TopologyGraph& graph) {
    return 256 * static_cast<std::uint64_t>(graph.edges.size());
}

}  // namespace hpo
