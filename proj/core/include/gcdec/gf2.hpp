#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcdec/errors.hpp"

namespace gcdec {

// Bit-packed vector over GF(2).  Size may be zero (degenerate syndromes of a
// full-rate code are empty vectors).
class BinaryVector {
  public:
    BinaryVector() = default;
    explicit BinaryVector(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static BinaryVector from_bits(const std::vector<std::uint8_t>& bits);

    std::size_t size() const { return n_; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::size_t weight() const;

    BinaryVector& operator^=(const BinaryVector& other);
    friend BinaryVector operator^(BinaryVector a, const BinaryVector& b) { return a ^= b; }

    bool operator==(const BinaryVector&) const = default;

    // <this, other> over GF(2).
    bool dot(const BinaryVector& other) const;

    // Support indices in ascending order.
    std::vector<std::size_t> support() const;

    std::vector<std::uint8_t> to_bits() const;
    std::string to_string() const;  // e.g. "01101"

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

// Dense row-major bit matrix over GF(2).  Zero rows are allowed: the parity
// check of a full-rate code is a 0 x n matrix.
class BinaryMatrix {
  public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), row_words_((cols + 63) / 64), words_(rows * row_words_, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const {
        return (words_[r * row_words_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (c & 63);
        if (v)
            words_[r * row_words_ + (c >> 6)] |= mask;
        else
            words_[r * row_words_ + (c >> 6)] &= ~mask;
    }

    BinaryVector row(std::size_t r) const;
    void xor_row_into(std::size_t r, BinaryVector& acc) const;  // acc ^= row r

    bool operator==(const BinaryMatrix&) const = default;

    BinaryMatrix transposed() const;

    // Row-space rank (does not modify *this).
    std::size_t rank() const;

    // v * M^T: one parity bit per row.  Requires v.size() == cols().
    BinaryVector mul_vector(const BinaryVector& v) const;

    // this * other over GF(2); requires cols() == other.rows().
    BinaryMatrix mul(const BinaryMatrix& other) const;

  private:
    std::size_t rows_ = 0, cols_ = 0, row_words_ = 0;
    std::vector<std::uint64_t> words_;
};

// Result of bringing a parity-check matrix to systematic form [I | P] with a
// column permutation.  perm[j] is the original column sitting at systematic
// position j; when the leading (n-k) columns of the input are already
// independent the permutation is the identity.
struct SystematicForm {
    BinaryMatrix p;                 // (n-k) x k right block
    std::vector<std::size_t> perm;  // size n, systematic index -> original index
};

// Row-reduces h to [I | P], swapping columns only when a pivot column is all
// zero below the current row.  Throws RankDeficient if rank(h) < rows(h).
SystematicForm systematize(const BinaryMatrix& h);

// s = z * h^T.  Requires z.size() == h.cols().
BinaryVector syndrome(const BinaryMatrix& h, const BinaryVector& z);

// Text format shared by all matrix files: a "rows cols" header line followed
// by `rows` lines of contiguous 0/1 characters, `cols` long each.
BinaryMatrix parse_matrix_text(std::istream& in, long& line_counter);
void write_matrix_text(std::ostream& out, const BinaryMatrix& m);

}  // namespace gcdec
