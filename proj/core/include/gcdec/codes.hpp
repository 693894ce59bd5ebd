#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcdec/gf2.hpp"

namespace gcdec {

// Binary linear block code [n, k] described by a generator and a parity-check
// matrix.  h may have zero rows (full-rate codes); g and h always satisfy
// g * h^T = 0, rank(g) = k, rank(h) = n - k.
struct Code {
    std::string name;
    std::size_t n = 0;
    std::size_t k = 0;
    BinaryMatrix g;  // k x n
    BinaryMatrix h;  // (n-k) x n

    BinaryVector encode(const BinaryVector& message) const;
};

// Builds a Code from a parity-check matrix alone; g is derived from the
// systematic form of h.  Throws RankDeficient if h is not full row rank.
Code code_from_parity(std::string name, const BinaryMatrix& h);

// Validates an explicit pair: shapes, ranks, g * h^T = 0.
Code code_from_pair(std::string name, const BinaryMatrix& g, const BinaryMatrix& h);

// Binary Hamming code with r parity bits: [2^r - 1, 2^r - 1 - r].
// h = [I_r | P] with the weight >= 2 columns of P in increasing value order.
Code hamming_code(std::size_t r);

// Reed-Muller code RM(m, r): length 2^m, generator rows are the evaluations
// of the monomials of degree <= r in graded-lex order; the parity check is the
// generator of the dual RM(m, m-r-1).  r = m yields a full-rate code with an
// empty parity check.
Code rm_code(std::size_t m, std::size_t r);

// Uniform random parity check of full row rank, generator derived from it.
// Deterministic in `seed`; throws GenerationFailed if the rank condition
// cannot be met within the retry budget.
Code random_code(std::size_t n, std::size_t k, std::uint64_t seed);

// Cyclic redundancy check polynomial.  `poly` holds the full polynomial with
// bit i = coefficient of x^i, so bit `degree` is always set.
struct CrcSpec {
    unsigned degree = 0;
    std::uint64_t poly = 0;

    // CRC-11 used by 5G polar control channels: x^11 + x^10 + x^9 + x^5 + 1.
    static CrcSpec crc11() { return CrcSpec{11, 0xE21}; }
};

// Remainder of message(x) * x^degree mod poly, highest-degree message
// coefficient first.  The result has `degree` bits, x^(degree-1) first.
std::vector<std::uint8_t> crc_remainder(const std::vector<std::uint8_t>& message, const CrcSpec& crc);

// message followed by its CRC remainder.
std::vector<std::uint8_t> crc_attach(const std::vector<std::uint8_t>& message, const CrcSpec& crc);

// True iff word = message || remainder is consistent, i.e. word(x) mod poly = 0.
bool crc_check(const std::vector<std::uint8_t>& word, const CrcSpec& crc);

// File I/O in the shared matrix text format.  A file holds either H alone or
// G followed by H; save_code always writes both.  load_code cross-checks a
// two-matrix file and throws InconsistentCode on failure.
void save_code(const Code& code, const std::string& path);
Code load_code(const std::string& path, std::string name = "");

}  // namespace gcdec
