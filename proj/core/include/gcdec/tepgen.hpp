#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "gcdec/gf2.hpp"

namespace gcdec {

// Bit pattern over the k generator positions.  Patterns live in the
// generator's *sorted* coordinate system (ascending reliability).
struct TepMask {
    std::vector<std::uint64_t> words;

    TepMask() = default;
    explicit TepMask(std::size_t k) : words((k + 63) / 64, 0) {}

    bool get(std::size_t i) const { return (words[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { words[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void clear(std::size_t i) { words[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    std::size_t popcount() const;
    std::vector<std::size_t> support() const;  // ascending indices

    bool operator==(const TepMask&) const = default;

    // Lexicographic priority used as the final tie-break of the total order:
    // at the first index where the masks differ, the one with the set bit is
    // prior.  This is the direction under which a parent always precedes both
    // the bit-1 child and the moved-min sibling even when weights tie exactly.
    static bool lex_prior(const TepMask& a, const TepMask& b);
};

// A generated test error pattern with its soft weight.
struct Tep {
    TepMask mask;
    double weight = 0.0;
    std::uint32_t hamming = 0;
};

// Total order over patterns: soft weight, then Hamming weight, then the
// lexicographic rule above.  Weight ties are detected by exact floating-point
// equality; the generator's incremental sums are arranged so that patterns
// with genuinely equal weights (e.g. tied reliabilities) compare equal.
bool tep_less(const Tep& a, const Tep& b);

// Ordered enumeration of all 2^k patterns in non-decreasing soft weight.
//
// The pattern space is a tree rooted at the all-zero pattern: one child sets
// position 1, and a sibling moves the minimum-support position up one slot.
// A frontier of candidate nodes is kept in a min-heap under tep_less; popping
// the head and inserting its (at most two) successors yields the global order
// with O(emissions) memory and O(log) work per emission.
class TepGenerator {
  public:
    // Builds the generator over |r_p|.  Ties between equal magnitudes are
    // broken by the original index (stable sort) so the order is well defined.
    explicit TepGenerator(const std::vector<double>& r_p);

    std::size_t k() const { return mag_.size(); }

    // sorted position -> position in the caller's coordinate order
    const std::vector<std::size_t>& perm() const { return perm_; }
    const std::vector<double>& sorted_magnitudes() const { return mag_; }

    bool has_next() const { return !heap_.empty(); }
    double peek_weight() const { return heap_.top().weight; }
    std::uint32_t peek_hamming() const { return heap_.top().hamming; }

    // Pops the least pattern and expands its successors.
    Tep next();

    std::uint64_t emitted() const { return emitted_; }

    // Converts a pattern given in the caller's coordinate order into the
    // sorted coordinates this generator emits (used for genie bookkeeping).
    TepMask mask_from_caller_order(const BinaryVector& pattern) const;

    // Inverse mapping: an emitted mask expressed in the caller's coordinates.
    BinaryVector mask_to_caller_order(const TepMask& mask) const;

  private:
    struct Node {
        TepMask mask;
        double weight;  // canonical: support magnitudes summed in descending index order
        double tail;    // weight of mask minus its minimum-support element
        std::uint32_t min1;  // 1-based index of min support, 0 when empty
        std::uint32_t hamming;
    };
    struct NodeAfter {
        bool operator()(const Node& a, const Node& b) const {
            if (a.weight != b.weight) return a.weight > b.weight;
            if (a.hamming != b.hamming) return a.hamming > b.hamming;
            return TepMask::lex_prior(b.mask, a.mask);
        }
    };

    std::vector<double> mag_;
    std::vector<std::size_t> perm_;
    std::priority_queue<Node, std::vector<Node>, NodeAfter> heap_;
    std::uint64_t emitted_ = 0;
};

}  // namespace gcdec
