#include "gcdec/channel.hpp"

#include <bit>

#include "gcdec/errors.hpp"

namespace gcdec {

ChannelSpec ChannelSpec::awgn_from_snr_db(double snr_db, double rate) {
    if (!(rate > 0.0) || !(rate <= 1.0)) throw InvalidParam("awgn_from_snr_db: rate must be in (0, 1]");
    ChannelSpec ch;
    ch.kind = Kind::awgn;
    ch.sigma2 = 1.0 / (2.0 * rate * std::pow(10.0, snr_db / 10.0));
    ch.snr_db = snr_db;
    return ch;
}

ChannelSpec ChannelSpec::awgn_snr_direct(double snr_db) {
    ChannelSpec ch;
    ch.kind = Kind::awgn;
    ch.sigma2 = std::pow(10.0, -snr_db / 10.0);
    ch.snr_db = snr_db;
    return ch;
}

ChannelSpec ChannelSpec::awgn_sigma2(double sigma2) {
    if (!(sigma2 > 0.0)) throw InvalidParam("awgn_sigma2: sigma2 must be positive");
    ChannelSpec ch;
    ch.kind = Kind::awgn;
    ch.sigma2 = sigma2;
    return ch;
}

ChannelSpec ChannelSpec::bsc(double p) {
    if (!(p > 0.0) || !(p < 0.5)) throw InvalidParam("bsc: p must be in (0, 0.5)");
    ChannelSpec ch;
    ch.kind = Kind::bsc;
    ch.p = p;
    return ch;
}

std::vector<double> ChannelSpec::transmit(const BinaryVector& codeword, Rng& rng) const {
    std::vector<double> y(codeword.size());
    if (kind == Kind::awgn) {
        const double sigma = std::sqrt(sigma2);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double x = codeword.get(i) ? -1.0 : 1.0;
            y[i] = x + sigma * rng.next_gaussian();
        }
    } else {
        for (std::size_t i = 0; i < y.size(); ++i) {
            bool bit = codeword.get(i);
            if (rng.next_unit() < p) bit = !bit;
            y[i] = bit ? 1.0 : 0.0;
        }
    }
    return y;
}

LlrVector ChannelSpec::llr(const std::vector<double>& observation) const {
    LlrVector r(observation.size());
    if (kind == Kind::awgn) {
        const double scale = 2.0 / sigma2;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = scale * observation[i];
    } else {
        const double mag = std::log((1.0 - p) / p);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = observation[i] != 0.0 ? -mag : mag;
    }
    return r;
}

double ChannelSpec::sample_llr_of_zero(Rng& rng) const {
    if (kind == Kind::awgn) {
        const double sigma = std::sqrt(sigma2);
        return 2.0 / sigma2 * (1.0 + sigma * rng.next_gaussian());
    }
    const double mag = std::log((1.0 - p) / p);
    return rng.next_unit() < p ? -mag : mag;
}

BinaryVector hard_decision(const LlrVector& r) {
    BinaryVector z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] < 0.0) z.set(i, true);
    return z;
}

double soft_weight(const BinaryVector& e, const LlrVector& r) {
    if (e.size() != r.size()) throw DimensionMismatch("soft_weight: size mismatch");
    double acc = 0.0;
    const auto& words = e.words();
    for (std::size_t w = words.size(); w-- > 0;) {
        std::uint64_t word = words[w];
        while (word) {
            const int top = 63 - std::countl_zero(word);
            acc += std::fabs(r[w * 64 + static_cast<std::size_t>(top)]);
            word &= ~(std::uint64_t{1} << top);
        }
    }
    return acc;
}

}  // namespace gcdec
