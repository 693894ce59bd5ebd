#pragma once

#include <cmath>
#include <vector>

#include "gcdec/gf2.hpp"
#include "gcdec/rng.hpp"

namespace gcdec {

using LlrVector = std::vector<double>;

// Memoryless binary-input channel.  LLRs follow the convention
// r_i = ln P(y_i | c_i = 0) / P(y_i | c_i = 1), so positive means "looks like 0".
struct ChannelSpec {
    enum class Kind { awgn, bsc };

    Kind kind = Kind::awgn;
    double sigma2 = 1.0;   // AWGN noise variance (BPSK 0 -> +1, 1 -> -1)
    double p = 0.0;        // BSC flip probability
    double snr_db = NAN;   // informational, set by from_snr_db

    // Eb/N0 convention: sigma2 = (2 * rate * 10^(snr_db/10))^-1.
    static ChannelSpec awgn_from_snr_db(double snr_db, double rate);
    // Direct convention: SNR = 1/sigma2, so sigma2 = 10^(-snr_db/10).
    static ChannelSpec awgn_snr_direct(double snr_db);
    static ChannelSpec awgn_sigma2(double sigma2);
    static ChannelSpec bsc(double p);

    // Transmits a codeword and returns raw observations: BPSK amplitudes for
    // AWGN, 0/1 values for the BSC.
    std::vector<double> transmit(const BinaryVector& codeword, Rng& rng) const;

    LlrVector llr(const std::vector<double>& observation) const;

    // One channel LLR for a transmitted 0 (used by reliability sampling).
    double sample_llr_of_zero(Rng& rng) const;
};

// Elementwise hard decision: z_i = 0 iff r_i >= 0.
BinaryVector hard_decision(const LlrVector& r);

// Soft weight gamma(e) = sum over the support of e of |r_i|.
//
// Accumulation runs over the support in *descending* index order.  That makes
// the incremental weights maintained by the ordered TEP generator bitwise
// equal to a from-scratch evaluation, so exact tie detection and cross-decoder
// list comparisons never depend on summation round-off.
double soft_weight(const BinaryVector& e, const LlrVector& r);

}  // namespace gcdec
