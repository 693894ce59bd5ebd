#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcdec/channel.hpp"

namespace gcdec {

// Result of the saddlepoint estimate of D(r_P), the number of partial
// patterns at least as light as the noise pattern. When every LLR has the
// same sign there is no interior saddlepoint and the exact boundary value is
// returned with `boundary` set (s_hat and the cumulant fields are zero).
struct SaddlepointEval {
    double s_hat = 0.0;
    double kappa = 0.0;   // cumulant generating function at s_hat
    double kappa1 = 0.0;  // first derivative at s_hat (residual, ~0)
    double kappa2 = 0.0;  // second derivative at s_hat
    double d_estimate = 0.0;
    bool boundary = false;
};

SaddlepointEval saddlepoint_D(const LlrVector& r_p);

// Exact count of patterns with soft weight <= that of the hard-decision noise
// pattern, by ordered enumeration. `cap` bounds the work: when the count
// reaches it, `saturated` is set and count == cap (read as ">= cap").
// cap = 0 means unbounded; keep the dimension small in that case.
struct ExactD {
    std::uint64_t count = 0;
    bool saturated = false;
};

ExactD exact_D(const LlrVector& r_p, std::uint64_t cap = 0);

// Soft weight of the noise pattern itself: sum of |r_i| over positions the
// hard decision gets wrong under the all-zero-codeword convention (r_i < 0).
double noise_soft_weight(const LlrVector& r_p);

// Monte Carlo complementary CDF of either D(r_P) or Gamma(r_P) when the K
// partial reliabilities are drawn i.i.d. from a channel.
enum class CcdfKind { D, Gamma };
enum class CcdfMethod { exact, saddlepoint };

const char* to_string(CcdfKind kind);
const char* to_string(CcdfMethod method);

struct CcdfCurve {
    std::vector<double> thresholds;     // ascending
    std::vector<double> probabilities;  // P{X > threshold}, non-increasing
    std::uint64_t trials = 0;
    double snr_db = 0.0;  // operating point (channel parameter for BSC)
    CcdfKind kind = CcdfKind::D;
    CcdfMethod method = CcdfMethod::exact;
};

CcdfCurve ccdf(CcdfKind kind, std::size_t k, const ChannelSpec& ch,
               std::vector<double> thresholds, std::uint64_t trials, std::uint64_t seed,
               CcdfMethod method = CcdfMethod::exact);

// CSV rows "threshold,probability,trials,snr,kind,method", one per grid point.
void write_ccdf_csv(std::ostream& out, const CcdfCurve& curve);

// Closed-form mean query counts of the two decoders on the [7,4] Hamming code
// over a BSC with crossover probability p, list size 1.
struct HammingQueryMeans {
    double gnd = 0.0;
    double gcd = 0.0;
};

HammingQueryMeans hamming_query_curves(double p);

namespace detail {
// log(erfc(x)/2), stable for large positive x.
double log_half_erfc(double x);
}  // namespace detail

}  // namespace gcdec
