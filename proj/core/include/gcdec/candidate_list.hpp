#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace gcdec {

// Fixed-capacity list of the lightest candidates seen so far, kept sorted by
// weight.  Until the list is full its worst weight reads as +infinity (the
// "NULL patterns" a fresh decoder list starts with), so the optimality stop
// cannot fire early.  Insertion is strict: a candidate tying the current
// worst weight of a full list is rejected, and among equal weights the
// earlier insertion stays first.
template <typename Payload>
class CandidateList {
  public:
    struct Entry {
        double weight;
        Payload payload;
    };

    explicit CandidateList(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool full() const { return entries_.size() == capacity_; }

    double worst_weight() const {
        return full() ? entries_.back().weight : std::numeric_limits<double>::infinity();
    }

    bool try_insert(double weight, Payload payload) {
        if (full() && !(weight < entries_.back().weight)) return false;
        std::size_t pos = entries_.size();
        while (pos > 0 && weight < entries_[pos - 1].weight) --pos;
        entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(pos),
                        Entry{weight, std::move(payload)});
        if (entries_.size() > capacity_) entries_.pop_back();
        return true;
    }

    const Entry& operator[](std::size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

  private:
    std::size_t capacity_;
    std::vector<Entry> entries_;
};

}  // namespace gcdec
