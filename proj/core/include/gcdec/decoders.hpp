#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gcdec/channel.hpp"
#include "gcdec/codes.hpp"
#include "gcdec/gf2.hpp"
#include "gcdec/tepgen.hpp"

namespace gcdec {

// Optional early-termination rules for the guessing decoders.  The first rule
// to fire ends the decode; the completion check (no remaining pattern can
// beat the current list) is evaluated first, then tau_s, then l_max before
// each query, and tau_p after each query.
struct TruncationConfig {
    std::uint64_t l_max = 0;  // query budget; 0 means unlimited (all 2^k patterns)
    double tau_s = std::numeric_limits<double>::infinity();  // stop once the next
                                                             // pattern weighs >= tau_s
    double tau_p = 0.0;  // stop once queried posterior mass reaches 1 - tau_p; 0 disables
    double delta = 0.0;  // experimental slack added to the completion check
};

enum class StopReason { optimal, l_max, tau_s, tau_p, exhausted };
const char* to_string(StopReason reason);

struct ListEntry {
    BinaryVector codeword;  // original coordinate order
    double weight;          // soft weight of the associated error pattern
};

struct DecodeResult {
    std::vector<ListEntry> list;  // lightest first
    std::uint64_t queries = 0;    // re-encoded patterns (membership checks for gnd)
    std::uint64_t emissions = 0;  // generator pops (suffix pops for the parallel variant)
    StopReason stop_reason = StopReason::optimal;

    // Genie diagnostics, tracked when the caller supplies the transmitted
    // codeword: whether the true error pattern was among the queried ones,
    // and at which query it appeared.
    bool genie_tracked = false;
    bool genie_queried = false;
    std::uint64_t genie_rank = 0;
};

// Precomputed per-code state shared across frames: the systematic form of h,
// the columns of P for fast re-encoding, and the identity-checked dimensions.
struct SystematizedCode {
    const Code* code = nullptr;
    SystematicForm sys;
    std::vector<BinaryVector> p_cols;  // k columns, each n-k bits

    static SystematizedCode build(const Code& code);
};

// Per-frame scratch shared by the guessing decoders and the polar leaf
// extenders: LLRs permuted into systematic order, the hard decision and its
// syndrome, and the canonical weight arithmetic.  Keeping every decoder on
// this one implementation makes equal patterns score bitwise-equal weights,
// which the exact cross-decoder comparisons rely on.
class GcdWorkspace {
  public:
    GcdWorkspace(const SystematizedCode& ctx, const LlrVector& r);

    std::size_t n() const { return r_sys_.size(); }
    std::size_t k() const { return r_p_.size(); }
    std::size_t parity() const { return n() - k(); }

    const SystematizedCode& context() const { return *ctx_; }
    const LlrVector& r_partial() const { return r_p_; }
    const BinaryVector& syndrome_bits() const { return s_; }
    const BinaryVector& hard_decision_sys() const { return z_sys_; }

    // log posterior probability of the empty partial pattern.
    double log_p0() const { return log_p0_; }

    struct Completion {
        BinaryVector e_parity;
        double weight;
    };

    // Parity-side completion of a partial pattern given in generator-sorted
    // coordinates (gen_perm maps sorted index -> systematic partial index),
    // extending partial_weight by the parity magnitudes in canonical order.
    Completion complete(const std::vector<std::size_t>& gen_perm, const TepMask& ep,
                        double partial_weight) const;

    // Canonical fold of the parity-side magnitudes over e_parity on top of base.
    double extend_parity_weight(const BinaryVector& e_parity, double base) const;

    // z + (e_parity, ep) mapped back to the caller's coordinate order.
    BinaryVector codeword(const std::vector<std::size_t>& gen_perm, const TepMask& ep,
                          const BinaryVector& e_parity) const;

    // Partial slice (systematic order) of an error pattern given in caller
    // coordinates; used for genie bookkeeping.
    BinaryVector partial_of_error(const BinaryVector& e) const;

  private:
    const SystematizedCode* ctx_;
    LlrVector r_sys_;
    LlrVector r_p_;
    BinaryVector z_sys_;
    BinaryVector s_;
    double log_p0_;
};

// Guessing codeword decoding: enumerates partial patterns over the k least
// reliable-independent positions in non-decreasing soft weight, completes
// each to a full pattern through the parity check, and keeps the L lightest.
// Returns the maximum-likelihood list when no truncation rule fires.
DecodeResult gcd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L,
                        const TruncationConfig& trunc = {},
                        const BinaryVector* true_codeword = nullptr);
DecodeResult gcd_decode(const LlrVector& r, const Code& code, std::size_t L,
                        const TruncationConfig& trunc = {},
                        const BinaryVector* true_codeword = nullptr);

// Same search split into 2^delta_split branches on the least reliable
// positions, sharing one suffix generator; branches close independently once
// they can no longer contribute.  Output matches gcd_decode.
DecodeResult parallel_gcd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L,
                                 std::size_t delta_split, const TruncationConfig& trunc = {},
                                 const BinaryVector* true_codeword = nullptr);
DecodeResult parallel_gcd_decode(const LlrVector& r, const Code& code, std::size_t L,
                                 std::size_t delta_split, const TruncationConfig& trunc = {},
                                 const BinaryVector* true_codeword = nullptr);

// Guessing noise decoding baseline: enumerates full-length patterns over all
// n positions in the same order and keeps the first L that satisfy the parity
// check.  Throws Exhausted if fewer than L codewords appear within l_max.
DecodeResult gnd_decode(const LlrVector& r, const Code& code, std::size_t L, std::uint64_t l_max,
                        const BinaryVector* true_codeword = nullptr);

// Exhaustive search decoding: scores every information pattern and returns
// the L lightest.  The reference optimum for k <= 24.
DecodeResult esd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L);
DecodeResult esd_decode(const LlrVector& r, const Code& code, std::size_t L);

// Posterior probability of a partial pattern given the partial LLRs:
// product over positions of 1/(1+e^|r|) when flipped, e^|r|/(1+e^|r|) when not.
double tep_posterior(const BinaryVector& e_p, const LlrVector& r_p);

}  // namespace gcdec
