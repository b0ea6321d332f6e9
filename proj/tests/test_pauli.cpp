#include <doctest.h>

#include <cstdint>
#include <set>
#include <string>

#include "hpo/errors.hpp"
#include "hpo/pauli.hpp"

using namespace hpo;

TEST_CASE("encode places qubit 0 in the least significant base-4 digit") {
    CHECK(encode("I") == 0);
    CHECK(encode("X") == 1);
    CHECK(encode("Y") == 2);
    CHECK(encode("Z") == 3);
    CHECK(encode("XI") == 1);
    CHECK(encode("IX") == 4);
    CHECK(encode("IZ") == 12);
    CHECK(encode("ZZ") == 15);
    CHECK(encode("XYZ") == 1 + 2 * 4 + 3 * 16);
    CHECK(encode("IIIIIIIIIIIX") == std::uint64_t{1} << 22);
}

TEST_CASE("decode inverts encode across the full 2-qubit basis") {
    for (std::uint64_t k = 0; k < basis_size(2); ++k) {
        const std::string text = decode(k, 2);
        CHECK(text.size() == 2);
        CHECK(encode(text) == k);
    }
    CHECK(decode(1, 2) == "XI");
    CHECK(decode(12, 2) == "IZ");
    CHECK(decode(0, 3) == "III");
}

TEST_CASE("encode and decode reject malformed input") {
    CHECK_THROWS_AS(encode(""), ValidationError);
    CHECK_THROWS_AS(encode("XQ"), ValidationError);
    CHECK_THROWS_AS(encode("x"), ValidationError);
    CHECK_THROWS_AS(encode("IIIIIIIIIIIII"), ValidationError);  // 13 letters
    CHECK_THROWS_AS(decode(16, 1), ValidationError);
    CHECK_THROWS_AS(decode(0, 0), ValidationError);
    CHECK_THROWS_AS(decode(0, kMaxQubits + 1), ValidationError);
}

TEST_CASE("weight counts non-identity letters") {
    CHECK(weight(encode("III"), 3) == 0);
    CHECK(weight(encode("XIZ"), 3) == 2);
    CHECK(weight(encode("XYZ"), 3) == 3);

    // Exactly C(3, w) * 3^w strings of each weight at n = 3.
    int histogram[4] = {0, 0, 0, 0};
    for (std::uint64_t k = 0; k < basis_size(3); ++k) histogram[weight(k, 3)] += 1;
    CHECK(histogram[0] == 1);
    CHECK(histogram[1] == 9);
    CHECK(histogram[2] == 27);
    CHECK(histogram[3] == 27);
}

TEST_CASE("hamming distance counts differing positions") {
    CHECK(hamming_distance(encode("XYZ"), encode("XYZ"), 3) == 0);
    CHECK(hamming_distance(encode("XYZ"), encode("YYZ"), 3) == 1);
    CHECK(hamming_distance(encode("XXI"), encode("YYI"), 3) == 2);
    CHECK(hamming_distance(encode("III"), encode("XYZ"), 3) == 3);

    // Distance to the identity string equals the weight.
    for (std::uint64_t k = 0; k < basis_size(2); ++k) {
        CHECK(hamming_distance(0, k, 2) == weight(k, 2));
    }
}

TEST_CASE("PauliString round trips between text and index form") {
    const PauliString p = PauliString::from_text("IZX");
    CHECK(p.n == 3);
    CHECK(p.index == encode("IZX"));
    CHECK(p.text() == "IZX");
    CHECK(p.weight() == 2);

    const PauliString q = PauliString::from_index(p.index, 3);
    CHECK(q.text() == "IZX");
    CHECK(hamming_distance(p, q) == 0);
    CHECK_THROWS_AS(PauliString::from_index(basis_size(3), 3), ValidationError);
    CHECK_THROWS_AS(hamming_distance(p, PauliString::from_text("IZ")), ValidationError);
}

TEST_CASE("enumerate_basis lists every string exactly once") {
    const auto basis = enumerate_basis(2);
    REQUIRE(basis.size() == 16);
    std::set<std::uint64_t> seen;
    for (const PauliString& p : basis) {
        CHECK(p.n == 2);
        seen.insert(p.index);
    }
    CHECK(seen.size() == 16);
    CHECK(basis.front().text() == "II");
    CHECK(basis.back().text() == "ZZ");
}

TEST_CASE("basis_size and qubit-count validation") {
    CHECK(basis_size(1) == 4);
    CHECK(basis_size(5) == 1024);
    CHECK_THROWS_AS(basis_size(0), ValidationError);
    CHECK_THROWS_AS(basis_size(kMaxQubits + 1), ValidationError);
    CHECK_NOTHROW(check_qubit_count(kMaxQubits));
    CHECK_THROWS_AS(check_qubit_count(7, 6), ValidationError);
}

TEST_CASE("PauliVector::zero allocates the full basis") {
    const PauliVector v = PauliVector::zero(3);
    CHECK(v.n == 3);
    REQUIRE(v.coeffs.size() == 64);
    for (double c : v.coeffs) CHECK(c == 0.0);
}
