#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hpo {

// Pauli strings are words over {I, X, Y, Z} indexed in base 4 with qubit 0 as
// the least-significant digit (I=0, X=1, Y=2, Z=3). Text form writes qubit 0
// leftmost, so "XI" -> 1 and "IZ" -> 12.
inline constexpr int kMaxQubits = 12;

std::uint64_t encode(std::string_view letters);
std::string decode(std::uint64_t index, int n);

int weight(std::uint64_t index, int n);
int hamming_distance(std::uint64_t a, std::uint64_t b, int n);

struct PauliString {
    int n = 1;
    std::uint64_t index = 0;

    static PauliString from_text(std::string_view letters);
    static PauliString from_index(std::uint64_t index, int n);

    std::string text() const { return decode(index, n); }
    int weight() const { return hpo::weight(index, n); }
};

int weight(const PauliString& p);
int hamming_distance(const PauliString& p, const PauliString& q);

std::vector<PauliString> enumerate_basis(int n);

// Real coefficient vector over the 4^n Pauli basis: entry j is Tr[P_j rho]
// for states, so coeffs[0] == 1 encodes unit trace.
struct PauliVector {
    int n = 1;
    std::vector<double> coeffs;

    static PauliVector zero(int n);
};

// 4^n, valid for n <= kMaxQubits.
std::uint64_t basis_size(int n);
void check_qubit_count(int n, int max_n = kMaxQubits);

}  // namespace hpo
