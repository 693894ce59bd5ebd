#include "gcdec/tepgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "gcdec/errors.hpp"

namespace gcdec {

std::size_t TepMask::popcount() const {
    std::size_t c = 0;
    for (std::uint64_t w : words) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

std::vector<std::size_t> TepMask::support() const {
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t word = words[w];
        while (word) {
            idx.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
            word &= word - 1;
        }
    }
    return idx;
}

bool TepMask::lex_prior(const TepMask& a, const TepMask& b) {
    for (std::size_t w = 0; w < a.words.size(); ++w) {
        const std::uint64_t diff = a.words[w] ^ b.words[w];
        if (diff) {
            const std::uint64_t first = diff & (~diff + 1);
            return (a.words[w] & first) != 0;
        }
    }
    return false;  // equal
}

bool tep_less(const Tep& a, const Tep& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.hamming != b.hamming) return a.hamming < b.hamming;
    return TepMask::lex_prior(a.mask, b.mask);
}

TepGenerator::TepGenerator(const std::vector<double>& r_p) {
    const std::size_t k = r_p.size();
    perm_.resize(k);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::stable_sort(perm_.begin(), perm_.end(),
                     [&](std::size_t a, std::size_t b) { return std::fabs(r_p[a]) < std::fabs(r_p[b]); });
    mag_.resize(k);
    for (std::size_t i = 0; i < k; ++i) mag_[i] = std::fabs(r_p[perm_[i]]);

    Node root;
    root.mask = TepMask(k);
    root.weight = 0.0;
    root.tail = 0.0;
    root.min1 = 0;
    root.hamming = 0;
    heap_.push(std::move(root));
}

Tep TepGenerator::next() {
    if (heap_.empty()) throw Exhausted("TepGenerator::next: pattern space exhausted");
    Node f = heap_.top();
    heap_.pop();
    ++emitted_;
    const std::size_t k = mag_.size();

    // Weights are extended one addition at a time on top of the parent's
    // stored sums, which keeps every node's weight bitwise equal to a
    // from-scratch descending-index accumulation over its support.
    if (k > 0 && f.min1 != 1) {
        // Left-most child: additionally flip position 1 (sorted index 0).
        Node child;
        child.mask = f.mask;
        child.mask.set(0);
        child.weight = f.weight + mag_[0];
        child.tail = f.weight;
        child.min1 = 1;
        child.hamming = f.hamming + 1;
        heap_.push(std::move(child));
    }
    if (f.min1 >= 1 && f.min1 < k && !f.mask.get(f.min1)) {
        // Adjacent right sibling: move the minimum-support position up one.
        Node sib;
        sib.mask = f.mask;
        sib.mask.clear(f.min1 - 1);
        sib.mask.set(f.min1);
        sib.weight = f.tail + mag_[f.min1];
        sib.tail = f.tail;
        sib.min1 = f.min1 + 1;
        sib.hamming = f.hamming;
        heap_.push(std::move(sib));
    }

    return Tep{std::move(f.mask), f.weight, f.hamming};
}

TepMask TepGenerator::mask_from_caller_order(const BinaryVector& pattern) const {
    if (pattern.size() != mag_.size())
        throw DimensionMismatch("mask_from_caller_order: size mismatch");
    TepMask m(mag_.size());
    for (std::size_t sorted = 0; sorted < perm_.size(); ++sorted)
        if (pattern.get(perm_[sorted])) m.set(sorted);
    return m;
}

BinaryVector TepGenerator::mask_to_caller_order(const TepMask& mask) const {
    BinaryVector out(mag_.size());
    for (std::size_t sorted : mask.support()) out.set(perm_[sorted], true);
    return out;
}

}  // namespace gcdec
