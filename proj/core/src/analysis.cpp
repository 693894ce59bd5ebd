#include "gcdec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gcdec/errors.hpp"
#include "gcdec/rng.hpp"
#include "gcdec/tepgen.hpp"

namespace gcdec {

namespace {

// Per-position cumulant term log(1/2 + 1/2 e^x) without overflow.
double kappa_term(double x) {
    constexpr double log_half = -0.6931471805599453;
    if (x > 0.0) return log_half + x + std::log1p(std::exp(-x));
    return log_half + std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct Cgf {
    const LlrVector& r;

    double value(double s) const {
        double acc = 0.0;
        for (double v : r) acc += kappa_term(s * v);
        return acc;
    }
    double d1(double s) const {
        double acc = 0.0;
        for (double v : r) acc += v * logistic(s * v);
        return acc;
    }
    double d2(double s) const {
        double acc = 0.0;
        for (double v : r) {
            const double q = logistic(s * v);
            acc += v * v * q * (1.0 - q);
        }
        return acc;
    }
};

}  // namespace

namespace detail {

double log_half_erfc(double x) {
    // erfc underflows around x = 26.6; switch to the asymptotic series a bit
    // before that. erfc(x) ~ e^{-x^2}/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4)).
    if (x <= 25.0) return std::log(0.5 * std::erfc(x));
    const double x2 = x * x;
    return -x2 - std::log(2.0 * x * std::sqrt(M_PI)) + std::log1p(-0.5 / x2 + 0.75 / (x2 * x2));
}

}  // namespace detail

SaddlepointEval saddlepoint_D(const LlrVector& r_p) {
    const std::size_t k = r_p.size();
    SaddlepointEval ev;

    bool has_pos = false, has_neg = false;
    double abs_sum = 0.0;
    std::size_t zeros = 0;
    for (double v : r_p) {
        if (v > 0.0) has_pos = true;
        if (v < 0.0) has_neg = true;
        if (v == 0.0) ++zeros;
        abs_sum += std::fabs(v);
    }
    if (!has_neg) {
        // The noise pattern is all-zero: only patterns over the zero-LLR
        // positions tie with it.
        ev.boundary = true;
        ev.d_estimate = std::ldexp(1.0, static_cast<int>(zeros));
        return ev;
    }
    if (!has_pos) {
        // The noise pattern carries the full soft weight: every pattern
        // qualifies.
        ev.boundary = true;
        ev.d_estimate = std::ldexp(1.0, static_cast<int>(k));
        return ev;
    }

    const Cgf cgf{r_p};

    // kappa' is strictly increasing from sum of negatives to sum of
    // positives, so it has one sign change. Bracket it geometrically.
    double lo = 0.0, hi = 0.0;
    const double at0 = cgf.d1(0.0);
    if (at0 > 0.0) {
        hi = 0.0;
        double step = 1.0;
        lo = -step;
        while (cgf.d1(lo) > 0.0) {
            step *= 2.0;
            lo = -step;
            if (step > 1e12) break;
        }
    } else {
        lo = 0.0;
        double step = 1.0;
        hi = step;
        while (cgf.d1(hi) < 0.0) {
            step *= 2.0;
            hi = step;
            if (step > 1e12) break;
        }
    }

    // Newton iteration safeguarded by the bracket: shrink the bracket with
    // the current point first, then take a Newton step if it stays inside,
    // else bisect. Either way the bracket contracts every iteration.
    const double tol = 1e-10 * std::max(1.0, abs_sum);
    double s = 0.5 * (lo + hi);
    double g = cgf.d1(s);
    for (int it = 0; it < 200 && std::fabs(g) > tol; ++it) {
        if (g > 0.0)
            hi = s;
        else
            lo = s;
        const double h = cgf.d2(s);
        double s_next = h > 0.0 ? s - g / h : lo;
        if (!(s_next > lo && s_next < hi)) s_next = 0.5 * (lo + hi);
        s = s_next;
        g = cgf.d1(s);
    }

    ev.s_hat = s;
    ev.kappa = cgf.value(s);
    ev.kappa1 = g;
    ev.kappa2 = cgf.d2(s);

    // P{W < 0} ~ exp(kappa(s) + s^2 kappa''(s)/2) * erfc(-s sqrt(kappa''/2))/2,
    // assembled in the log domain so deep tails survive.  The count itself is
    // 1 + #{other patterns strictly below}: the true pattern contributes an
    // atom exactly at W = 0 that the continuous tail cannot resolve, so it is
    // added back explicitly.
    const double arg = -s * std::sqrt(0.5 * ev.kappa2);
    const double log_p = ev.kappa + 0.5 * s * s * ev.kappa2 + detail::log_half_erfc(arg);
    ev.d_estimate = 1.0 + std::exp(static_cast<double>(k) * std::log(2.0) + log_p);
    return ev;
}

double noise_soft_weight(const LlrVector& r_p) {
    // Fold in the generator's canonical order (descending sorted index) so
    // comparisons against generator weights are exact, not just close.
    TepGenerator gen(r_p);
    BinaryVector noise(r_p.size());
    for (std::size_t i = 0; i < r_p.size(); ++i)
        if (r_p[i] < 0.0) noise.set(i, true);
    const TepMask mask = gen.mask_from_caller_order(noise);
    const std::vector<double>& mag = gen.sorted_magnitudes();
    const std::vector<std::size_t> sup = mask.support();
    double acc = 0.0;
    for (std::size_t j = sup.size(); j-- > 0;) acc += mag[sup[j]];
    return acc;
}

ExactD exact_D(const LlrVector& r_p, std::uint64_t cap) {
    ExactD out;
    TepGenerator gen(r_p);

    BinaryVector noise(r_p.size());
    for (std::size_t i = 0; i < r_p.size(); ++i)
        if (r_p[i] < 0.0) noise.set(i, true);
    const TepMask mask = gen.mask_from_caller_order(noise);
    const std::vector<double>& mag = gen.sorted_magnitudes();
    const std::vector<std::size_t> sup = mask.support();
    double threshold = 0.0;
    for (std::size_t j = sup.size(); j-- > 0;) threshold += mag[sup[j]];

    while (gen.has_next() && gen.peek_weight() <= threshold) {
        if (cap != 0 && out.count >= cap) {
            out.saturated = true;
            return out;
        }
        gen.next();
        ++out.count;
    }
    return out;
}

const char* to_string(CcdfKind kind) { return kind == CcdfKind::D ? "D" : "Gamma"; }

const char* to_string(CcdfMethod method) {
    return method == CcdfMethod::exact ? "exact" : "saddlepoint";
}

CcdfCurve ccdf(CcdfKind kind, std::size_t k, const ChannelSpec& ch,
               std::vector<double> thresholds, std::uint64_t trials, std::uint64_t seed,
               CcdfMethod method) {
    if (k == 0) throw InvalidParam("ccdf: k must be >= 1");
    if (trials == 0) throw InvalidParam("ccdf: trials must be >= 1");
    std::sort(thresholds.begin(), thresholds.end());

    CcdfCurve curve;
    curve.kind = kind;
    curve.method = method;
    curve.trials = trials;
    curve.snr_db = ch.kind == ChannelSpec::Kind::awgn ? ch.snr_db : ch.p;
    curve.thresholds = thresholds;
    curve.probabilities.assign(thresholds.size(), 0.0);

    // Exact-D evaluations only ever need to resolve "above the largest
    // threshold or not", so the enumeration is capped just past it.
    std::uint64_t cap = 0;
    if (kind == CcdfKind::D && method == CcdfMethod::exact && !thresholds.empty()) {
        const double top = thresholds.back();
        cap = top >= 1e18 ? 0 : static_cast<std::uint64_t>(std::max(0.0, top)) + 2;
    }

    std::vector<std::uint64_t> exceed(thresholds.size(), 0);
    LlrVector r(k);
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng = rng_for_frame(seed, t);
        for (std::size_t i = 0; i < k; ++i) r[i] = ch.sample_llr_of_zero(rng);

        double x;
        if (kind == CcdfKind::Gamma) {
            x = 0.0;
            for (double v : r)
                if (v < 0.0) x += -v;
        } else if (method == CcdfMethod::exact) {
            const ExactD d = exact_D(r, cap);
            x = d.saturated ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(d.count);
        } else {
            x = saddlepoint_D(r).d_estimate;
        }
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            if (x > thresholds[j])
                ++exceed[j];
            else
                break;  // thresholds ascend, so later ones cannot be exceeded
        }
    }
    for (std::size_t j = 0; j < thresholds.size(); ++j)
        curve.probabilities[j] =
            static_cast<double>(exceed[j]) / static_cast<double>(trials);
    return curve;
}

void write_ccdf_csv(std::ostream& out, const CcdfCurve& curve) {
    out << "threshold,probability,trials,snr,kind,method\n";
    char buf[160];
    for (std::size_t j = 0; j < curve.thresholds.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%llu,%.6g,%s,%s\n", curve.thresholds[j],
                      curve.probabilities[j], static_cast<unsigned long long>(curve.trials),
                      curve.snr_db, to_string(curve.kind), to_string(curve.method));
        out << buf;
    }
}

HammingQueryMeans hamming_query_curves(double p) {
    if (!(p > 0.0 && p < 0.5)) throw InvalidParam("hamming_query_curves: p must be in (0, 0.5)");
    const double q = 1.0 - p;
    // Probability that the hard decision lands on a codeword: error vector in
    // the [7,4] code, whose weight enumerator is 1 + 7z^3 + 7z^4 + z^7.
    const double p0 = std::pow(q, 7) + 7.0 * std::pow(p, 3) * std::pow(q, 3) + std::pow(p, 7);
    const double p1 = (1.0 - p0) / 7.0;
    return HammingQueryMeans{p0 + 35.0 * p1, p0 + 17.0 * p1};
}

}  // namespace gcdec
