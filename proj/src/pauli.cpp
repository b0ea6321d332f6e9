#include "hpo/pauli.hpp"

#include "hpo/errors.hpp"

namespace hpo {

namespace {

int letter_digit(char c) {
    switch (c) {
        case 'I': return 0;
        case 'X': return 1;
        case 'Y': return 2;
        case 'Z': return 3;
        default:
            throw ValidationError(std::string("invalid Pauli letter '") + c +
                                  "': expected one of I, X, Y, Z");
    }
}

constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};

}  // namespace

void check_qubit_count(int n, int max_n) {
    if (n < 1 || n > max_n) {
        throw ValidationError("qubit count " + std::to_string(n) +
                              " out of range [1, " + std::to_string(max_n) + "]");
    }
}

std::uint64_t basis_size(int n) {
    check_qubit_count(n);
    return std::uint64_t{1} << (2 * n);
}

std::uint64_t encode(std::string_view letters) {
    if (letters.empty() || letters.size() > kMaxQubits) {
        throw ValidationError("Pauli string length " + std::to_string(letters.size()) +
                              " out of range [1, " + std::to_string(kMaxQubits) + "]");
    }
    std::uint64_t index = 0;
    for (std::size_t k = letters.size(); k-- > 0;) {
        index = index * 4 + static_cast<std::uint64_t>(letter_digit(letters[k]));
    }
    return index;
}

std::string decode(std::uint64_t index, int n) {
    check_qubit_count(n);
    if (index >= basis_size(n)) {
        throw ValidationError("Pauli index " + std::to_string(index) +
                              " out of range for n=" + std::to_string(n));
    }
    std::string out(static_cast<std::size_t>(n), 'I');
    for (int k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = kLetters[(index >> (2 * k)) & 3];
    }
    return out;
}

int weight(std::uint64_t index, int n) {
    check_qubit_count(n);
    int w = 0;
    for (int k = 0; k < n; ++k) {
        w += ((index >> (2 * k)) & 3) != 0;
    }
    return w;
}

int hamming_distance(std::uint64_t a, std::uint64_t b, int n) {
    check_qubit_count(n);
    int d = 0;
    for (int k = 0; k < n; ++k) {
        d += ((a >> (2 * k)) & 3) != ((b >> (2 * k)) & 3);
    }
    return d;
}

PauliString PauliString::from_text(std::string_view letters) {
    PauliString p;
    p.index = encode(letters);
    p.n = static_cast<int>(letters.size());
    return p;
}

PauliString PauliString::from_index(std::uint64_t index, int n) {
    check_qubit_count(n);
    if (index >= basis_size(n)) {
        throw ValidationError("Pauli index " + std::to_string(index) +
                              " out of range for n=" + std::to_string(n));
    }
    return PauliString{n, index};
}

int weight(const PauliString& p) { return weight(p.index, p.n); }

int hamming_distance(const PauliString& p, const PauliString& q) {
    if (p.n != q.n) {
        throw ValidationError("Hamming distance requires equal lengths, got " +
                              std::to_string(p.n) + " and " + std::to_string(q.n));
    }
    return hamming_distance(p.index, q.index, p.n);
}

std::vector<PauliString> enumerate_basis(int n) {
    const std::uint64_t size = basis_size(n);
    std::vector<PauliString> basis;
    basis.reserve(size);
    for (std::uint64_t k = 0; k < size; ++k) {
        basis.push_back(PauliString{n, k});
    }
    return basis;
}

PauliVector PauliVector::zero(int n) {
    PauliVector v;
    v.n = n;
    v.coeffs.assign(basis_size(n), 0.0);
    return v;
}

}  // namespace hpo
