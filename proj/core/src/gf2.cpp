#include "gcdec/gf2.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <sstream>

namespace gcdec {

BinaryVector BinaryVector::from_bits(const std::vector<std::uint8_t>& bits) {
    BinaryVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) v.set(i, true);
    return v;
}

std::size_t BinaryVector::weight() const {
    std::size_t w = 0;
    for (std::uint64_t word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
}

BinaryVector& BinaryVector::operator^=(const BinaryVector& other) {
    if (other.n_ != n_) throw DimensionMismatch("BinaryVector xor: size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
}

bool BinaryVector::dot(const BinaryVector& other) const {
    if (other.n_ != n_) throw DimensionMismatch("BinaryVector dot: size mismatch");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & other.words_[i];
    return (std::popcount(acc) & 1) != 0;
}

std::vector<std::size_t> BinaryVector::support() const {
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t word = words_[w];
        while (word) {
            idx.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
            word &= word - 1;
        }
    }
    return idx;
}

std::vector<std::uint8_t> BinaryVector::to_bits() const {
    std::vector<std::uint8_t> bits(n_);
    for (std::size_t i = 0; i < n_; ++i) bits[i] = get(i) ? 1 : 0;
    return bits;
}

std::string BinaryVector::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BinaryVector BinaryMatrix::row(std::size_t r) const {
    BinaryVector v(cols_);
    for (std::size_t w = 0; w < row_words_; ++w) v.words()[w] = words_[r * row_words_ + w];
    return v;
}

void BinaryMatrix::xor_row_into(std::size_t r, BinaryVector& acc) const {
    if (acc.size() != cols_) throw DimensionMismatch("xor_row_into: size mismatch");
    for (std::size_t w = 0; w < row_words_; ++w) acc.words()[w] ^= words_[r * row_words_ + w];
}

BinaryMatrix BinaryMatrix::transposed() const {
    BinaryMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            if (get(r, c)) t.set(c, r, true);
    return t;
}

std::size_t BinaryMatrix::rank() const {
    std::vector<BinaryVector> rows;
    rows.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) rows.push_back(row(r));
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows_ && !rows[pivot].get(c)) ++pivot;
        if (pivot == rows_) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t r = 0; r < rows_; ++r)
            if (r != rank && rows[r].get(c)) rows[r] ^= rows[rank];
        ++rank;
    }
    return rank;
}

BinaryVector BinaryMatrix::mul_vector(const BinaryVector& v) const {
    if (v.size() != cols_) throw DimensionMismatch("mul_vector: size mismatch");
    BinaryVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < row_words_; ++w) acc ^= words_[r * row_words_ + w] & v.words()[w];
        if (std::popcount(acc) & 1) out.set(r, true);
    }
    return out;
}

BinaryMatrix BinaryMatrix::mul(const BinaryMatrix& other) const {
    if (cols_ != other.rows()) throw DimensionMismatch("matrix mul: shape mismatch");
    BinaryMatrix out(rows_, other.cols());
    for (std::size_t r = 0; r < rows_; ++r) {
        BinaryVector acc(other.cols());
        for (std::size_t c = 0; c < cols_; ++c)
            if (get(r, c)) other.xor_row_into(c, acc);
        for (std::size_t w = 0; w < acc.words().size(); ++w)
            out.words_[r * out.row_words_ + w] = acc.words()[w];
    }
    return out;
}

SystematicForm systematize(const BinaryMatrix& h) {
    const std::size_t rows = h.rows();
    const std::size_t cols = h.cols();
    if (rows > cols) throw RankDeficient("systematize: more rows than columns");

    std::vector<BinaryVector> work;
    work.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) work.push_back(h.row(r));

    std::vector<std::size_t> perm(cols);
    for (std::size_t j = 0; j < cols; ++j) perm[j] = j;

    // Column access goes through perm so swaps are O(1).
    auto bit = [&](std::size_t r, std::size_t j) { return work[r].get(perm[j]); };

    for (std::size_t t = 0; t < rows; ++t) {
        // Find a pivot: first look down column t, then scan columns to the
        // right, swapping in the first that has a 1 at or below row t.
        std::size_t pc = t;
        std::size_t pr = rows;
        for (; pc < cols; ++pc) {
            for (pr = t; pr < rows && !bit(pr, pc); ++pr) {
            }
            if (pr < rows) break;
        }
        if (pc == cols) throw RankDeficient("systematize: matrix rank below row count");
        if (pc != t) std::swap(perm[t], perm[pc]);
        if (pr != t) std::swap(work[pr], work[t]);
        for (std::size_t r = 0; r < rows; ++r)
            if (r != t && bit(r, t)) work[r] ^= work[t];
    }

    const std::size_t k = cols - rows;
    SystematicForm sys;
    sys.perm = std::move(perm);
    sys.p = BinaryMatrix(rows, k);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < k; ++j)
            if (work[r].get(sys.perm[rows + j])) sys.p.set(r, j, true);
    return sys;
}

BinaryVector syndrome(const BinaryMatrix& h, const BinaryVector& z) {
    return h.mul_vector(z);
}

BinaryMatrix parse_matrix_text(std::istream& in, long& line_counter) {
    std::string line;
    // Skip blank lines before the header.
    while (std::getline(in, line)) {
        ++line_counter;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    std::istringstream header(line);
    long long rows = -1, cols = -1;
    if (!(header >> rows >> cols) || rows < 0 || cols < 1)
        throw ParseError("expected matrix header 'rows cols'", line_counter);

    BinaryMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw ParseError("unexpected end of matrix", line_counter);
        ++line_counter;
        std::string trimmed;
        for (char ch : line)
            if (ch != ' ' && ch != '\t' && ch != '\r') trimmed.push_back(ch);
        if (trimmed.size() != static_cast<std::size_t>(cols))
            throw ParseError("matrix row has wrong length", line_counter);
        for (long long c = 0; c < cols; ++c) {
            const char ch = trimmed[static_cast<std::size_t>(c)];
            if (ch == '1')
                m.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c), true);
            else if (ch != '0')
                throw ParseError("matrix row contains a character other than 0/1", line_counter);
        }
    }
    return m;
}

void write_matrix_text(std::ostream& out, const BinaryMatrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::string line(m.cols(), '0');
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.get(r, c)) line[c] = '1';
        out << line << '\n';
    }
}

}  // namespace gcdec
