#include "gcdec/codes.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "gcdec/errors.hpp"
#include "gcdec/rng.hpp"

namespace gcdec {

BinaryVector Code::encode(const BinaryVector& message) const {
    if (message.size() != k) throw DimensionMismatch("encode: message length != k");
    BinaryVector c(n);
    for (std::size_t i = 0; i < k; ++i)
        if (message.get(i)) g.xor_row_into(i, c);
    return c;
}

// Generator matching h's systematic form: g_sys = [P^T | I_k] mapped back
// through the column permutation.
static BinaryMatrix generator_from_parity(const BinaryMatrix& h) {
    const std::size_t n = h.cols();
    const std::size_t rows = h.rows();
    const std::size_t k = n - rows;
    const SystematicForm sys = systematize(h);
    BinaryMatrix g(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        g.set(i, sys.perm[rows + i], true);
        for (std::size_t r = 0; r < rows; ++r)
            if (sys.p.get(r, i)) g.set(i, sys.perm[r], true);
    }
    return g;
}

Code code_from_parity(std::string name, const BinaryMatrix& h) {
    if (h.rank() != h.rows()) throw RankDeficient("code_from_parity: h is rank deficient");
    Code code;
    code.name = std::move(name);
    code.n = h.cols();
    code.k = h.cols() - h.rows();
    code.h = h;
    code.g = h.rows() == 0 ? [&] {
        BinaryMatrix id(code.n, code.n);
        for (std::size_t i = 0; i < code.n; ++i) id.set(i, i, true);
        return id;
    }()
                           : generator_from_parity(h);
    return code;
}

Code code_from_pair(std::string name, const BinaryMatrix& g, const BinaryMatrix& h) {
    if (g.cols() != h.cols()) throw InconsistentCode("code_from_pair: g and h lengths differ");
    if (g.rows() + h.rows() != g.cols()) throw InconsistentCode("code_from_pair: k + (n-k) != n");
    if (g.rank() != g.rows()) throw InconsistentCode("code_from_pair: g is rank deficient");
    if (h.rank() != h.rows()) throw InconsistentCode("code_from_pair: h is rank deficient");
    for (std::size_t i = 0; i < g.rows(); ++i)
        if (h.mul_vector(g.row(i)).weight() != 0)
            throw InconsistentCode("code_from_pair: g * h^T != 0");
    Code code;
    code.name = std::move(name);
    code.n = g.cols();
    code.k = g.rows();
    code.g = g;
    code.h = h;
    return code;
}

Code hamming_code(std::size_t r) {
    if (r < 2 || r > 16) throw InvalidParam("hamming_code: r must be in [2, 16]");
    const std::size_t n = (std::size_t{1} << r) - 1;
    const std::size_t k = n - r;
    BinaryMatrix h(r, n);
    for (std::size_t i = 0; i < r; ++i) h.set(i, i, true);
    std::size_t col = r;
    for (std::size_t v = 3; v < (std::size_t{1} << r); ++v) {
        if (std::popcount(v) < 2) continue;
        for (std::size_t bit = 0; bit < r; ++bit)
            if ((v >> bit) & 1) h.set(bit, col, true);
        ++col;
    }
    Code code = code_from_parity("hamming[" + std::to_string(n) + "," + std::to_string(k) + "]", h);
    return code;
}

// Monomials of degree <= r over m variables in graded-lex order, each encoded
// as a variable mask.  Within a degree, masks are ordered lexicographically by
// ascending variable index (x1 x2 before x1 x3 before x2 x3).
static std::vector<std::uint32_t> monomials_graded_lex(std::size_t m, std::size_t r) {
    std::vector<std::uint32_t> masks;
    masks.push_back(0);
    for (std::size_t deg = 1; deg <= r; ++deg) {
        if (deg > m) break;
        std::vector<std::size_t> idx(deg);
        for (std::size_t i = 0; i < deg; ++i) idx[i] = i;
        bool more = true;
        while (more) {
            std::uint32_t mask = 0;
            for (std::size_t i : idx) mask |= (1u << i);
            masks.push_back(mask);
            // Advance the index combination in lexicographic order.
            more = false;
            for (std::size_t pos = deg; pos-- > 0;) {
                if (idx[pos] + (deg - pos) < m) {
                    ++idx[pos];
                    for (std::size_t j = pos + 1; j < deg; ++j) idx[j] = idx[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    return masks;
}

// Evaluation matrix of the given monomials at all 2^m points; the point at
// column j assigns variable x_(i+1) the bit (j >> i) & 1.
static BinaryMatrix rm_evaluations(std::size_t m, const std::vector<std::uint32_t>& masks) {
    const std::size_t n = std::size_t{1} << m;
    BinaryMatrix eval(masks.size(), n);
    for (std::size_t row = 0; row < masks.size(); ++row)
        for (std::size_t j = 0; j < n; ++j)
            if ((j & masks[row]) == masks[row]) eval.set(row, j, true);
    return eval;
}

Code rm_code(std::size_t m, std::size_t r) {
    if (m < 1 || m > 20) throw InvalidParam("rm_code: m must be in [1, 20]");
    if (r > m) throw InvalidParam("rm_code: r must be in [0, m]");
    const std::size_t n = std::size_t{1} << m;
    const BinaryMatrix g = rm_evaluations(m, monomials_graded_lex(m, r));
    BinaryMatrix h;
    if (r == m) {
        h = BinaryMatrix(0, n);
    } else {
        h = rm_evaluations(m, monomials_graded_lex(m, m - r - 1));
    }
    Code code;
    code.name = "rm(" + std::to_string(m) + "," + std::to_string(r) + ")";
    code.n = n;
    code.k = g.rows();
    code.g = g;
    code.h = h;
    return code;
}

Code random_code(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (n < 1 || k > n) throw InvalidParam("random_code: need 1 <= k <= n");
    const std::size_t rows = n - k;
    Rng rng(seed ^ 0xc0dec0dec0dec0deull);
    for (int attempt = 0; attempt < 64; ++attempt) {
        BinaryMatrix h(rows, n);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < n; ++c)
                if (rng.next_bit()) h.set(r, c, true);
        if (h.rank() != rows) continue;
        Code code = code_from_parity(
            "random[" + std::to_string(n) + "," + std::to_string(k) + "]#" + std::to_string(seed), h);
        return code;
    }
    throw GenerationFailed("random_code: no full-rank parity check in 64 attempts");
}

std::vector<std::uint8_t> crc_remainder(const std::vector<std::uint8_t>& message, const CrcSpec& crc) {
    if (crc.degree == 0 || crc.degree > 63 || !((crc.poly >> crc.degree) & 1))
        throw InvalidParam("crc_remainder: polynomial must have its leading bit set");
    // Long division of message(x) * x^degree: shift bits through a register
    // holding the current remainder, highest degree at bit degree-1.
    std::uint64_t reg = 0;
    const std::uint64_t mask = (std::uint64_t{1} << crc.degree) - 1;
    const std::uint64_t tap = crc.poly & mask;  // poly minus its leading term
    auto shift_in = [&](std::uint64_t bit) {
        const std::uint64_t top = (reg >> (crc.degree - 1)) & 1;
        reg = ((reg << 1) | bit) & mask;
        if (top) reg ^= tap;
    };
    for (std::uint8_t b : message) shift_in(b & 1);
    for (unsigned i = 0; i < crc.degree; ++i) shift_in(0);
    std::vector<std::uint8_t> rem(crc.degree);
    for (unsigned i = 0; i < crc.degree; ++i)
        rem[i] = static_cast<std::uint8_t>((reg >> (crc.degree - 1 - i)) & 1);
    return rem;
}

std::vector<std::uint8_t> crc_attach(const std::vector<std::uint8_t>& message, const CrcSpec& crc) {
    std::vector<std::uint8_t> out = message;
    const std::vector<std::uint8_t> rem = crc_remainder(message, crc);
    out.insert(out.end(), rem.begin(), rem.end());
    return out;
}

bool crc_check(const std::vector<std::uint8_t>& word, const CrcSpec& crc) {
    if (word.size() < crc.degree) return false;
    // word(x) mod poly = 0 iff remainder(prefix) == suffix.
    const std::vector<std::uint8_t> prefix(word.begin(), word.end() - crc.degree);
    const std::vector<std::uint8_t> rem = crc_remainder(prefix, crc);
    return std::equal(rem.begin(), rem.end(), word.end() - crc.degree);
}

void save_code(const Code& code, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_code: cannot open " + path);
    write_matrix_text(out, code.g);
    write_matrix_text(out, code.h);
}

Code load_code(const std::string& path, std::string name) {
    std::ifstream in(path);
    if (!in) throw IoError("load_code: cannot open " + path);
    long line = 0;
    BinaryMatrix first = parse_matrix_text(in, line);
    // Peek for a second matrix.
    std::streampos pos = in.tellg();
    bool has_second = false;
    BinaryMatrix second;
    std::string probe;
    while (std::getline(in, probe)) {
        if (probe.find_first_not_of(" \t\r") != std::string::npos) {
            has_second = true;
            break;
        }
        pos = in.tellg();
    }
    if (has_second) {
        in.clear();
        in.seekg(pos);
        second = parse_matrix_text(in, line);
    }
    if (name.empty()) name = path;
    if (!has_second) return code_from_parity(std::move(name), first);
    return code_from_pair(std::move(name), first, second);
}

}  // namespace gcdec
