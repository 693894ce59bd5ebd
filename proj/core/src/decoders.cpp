#include "gcdec/decoders.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gcdec/candidate_list.hpp"
#include "gcdec/errors.hpp"

namespace gcdec {

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::optimal: return "optimal";
        case StopReason::l_max: return "l_max";
        case StopReason::tau_s: return "tau_s";
        case StopReason::tau_p: return "tau_p";
        case StopReason::exhausted: return "exhausted";
    }
    return "?";
}

SystematizedCode SystematizedCode::build(const Code& code) {
    SystematizedCode ctx;
    ctx.code = &code;
    ctx.sys = systematize(code.h);
    ctx.p_cols.resize(code.k);
    const std::size_t parity = code.n - code.k;
    for (std::size_t j = 0; j < code.k; ++j) {
        BinaryVector col(parity);
        for (std::size_t r = 0; r < parity; ++r)
            if (ctx.sys.p.get(r, j)) col.set(r, true);
        ctx.p_cols[j] = std::move(col);
    }
    return ctx;
}

GcdWorkspace::GcdWorkspace(const SystematizedCode& ctx, const LlrVector& r) : ctx_(&ctx) {
    const Code& code = *ctx.code;
    if (r.size() != code.n) throw DimensionMismatch("GcdWorkspace: LLR length != n");
    const std::size_t parity = code.n - code.k;

    r_sys_.resize(code.n);
    for (std::size_t j = 0; j < code.n; ++j) r_sys_[j] = r[ctx.sys.perm[j]];
    z_sys_ = hard_decision(r_sys_);

    // s = z_I + z_P * P^T for h_sys = [I | P].
    s_ = BinaryVector(parity);
    for (std::size_t i = 0; i < parity; ++i)
        if (z_sys_.get(i)) s_.set(i, true);
    for (std::size_t j = 0; j < code.k; ++j)
        if (z_sys_.get(parity + j)) s_ ^= ctx.p_cols[j];

    r_p_.assign(r_sys_.begin() + static_cast<std::ptrdiff_t>(parity), r_sys_.end());
    log_p0_ = 0.0;
    for (double v : r_p_) log_p0_ -= std::log1p(std::exp(-std::fabs(v)));
}

double GcdWorkspace::extend_parity_weight(const BinaryVector& e_parity, double base) const {
    double acc = base;
    const auto& words = e_parity.words();
    for (std::size_t w = words.size(); w-- > 0;) {
        std::uint64_t word = words[w];
        while (word) {
            const int top = 63 - std::countl_zero(word);
            acc += std::fabs(r_sys_[w * 64 + static_cast<std::size_t>(top)]);
            word &= ~(std::uint64_t{1} << top);
        }
    }
    return acc;
}

GcdWorkspace::Completion GcdWorkspace::complete(const std::vector<std::size_t>& gen_perm,
                                                const TepMask& ep, double partial_weight) const {
    Completion out;
    out.e_parity = s_;
    for (std::size_t w = 0; w < ep.words.size(); ++w) {
        std::uint64_t word = ep.words[w];
        while (word) {
            const std::size_t sorted = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
            out.e_parity ^= ctx_->p_cols[gen_perm[sorted]];
            word &= word - 1;
        }
    }
    out.weight = extend_parity_weight(out.e_parity, partial_weight);
    return out;
}

BinaryVector GcdWorkspace::codeword(const std::vector<std::size_t>& gen_perm, const TepMask& ep,
                                    const BinaryVector& e_parity) const {
    const std::size_t parity = this->parity();
    BinaryVector c_sys = z_sys_;
    for (std::size_t i = 0; i < parity; ++i)
        if (e_parity.get(i)) c_sys.flip(i);
    for (std::size_t w = 0; w < ep.words.size(); ++w) {
        std::uint64_t word = ep.words[w];
        while (word) {
            const std::size_t sorted = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
            c_sys.flip(parity + gen_perm[sorted]);
            word &= word - 1;
        }
    }
    BinaryVector c(n());
    for (std::size_t j = 0; j < n(); ++j)
        if (c_sys.get(j)) c.set(ctx_->sys.perm[j], true);
    return c;
}

BinaryVector GcdWorkspace::partial_of_error(const BinaryVector& e) const {
    if (e.size() != n()) throw DimensionMismatch("partial_of_error: size mismatch");
    const std::size_t parity = this->parity();
    BinaryVector e_p(k());
    for (std::size_t j = 0; j < k(); ++j)
        if (e.get(ctx_->sys.perm[parity + j])) e_p.set(j, true);
    return e_p;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Candidate payload: the partial pattern in generator-sorted coordinates plus
// the parity-side completion.
struct Stored {
    TepMask ep;
    BinaryVector ei;
};

void materialize(const GcdWorkspace& ws, const std::vector<std::size_t>& gen_perm,
                 const CandidateList<Stored>& list, DecodeResult& out) {
    out.list.reserve(list.size());
    for (const auto& entry : list)
        out.list.push_back(ListEntry{ws.codeword(gen_perm, entry.payload.ep, entry.payload.ei),
                                     entry.weight});
}

// Genie target: the partial slice of the true error pattern, in the
// generator's sorted coordinates.
TepMask genie_target(const GcdWorkspace& ws, const TepGenerator& gen, const LlrVector& r,
                     const BinaryVector& true_codeword) {
    BinaryVector e_true = hard_decision(r);
    e_true ^= true_codeword;
    return gen.mask_from_caller_order(ws.partial_of_error(e_true));
}

}  // namespace

DecodeResult gcd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L,
                        const TruncationConfig& trunc, const BinaryVector* true_codeword) {
    if (L < 1) throw InvalidParam("gcd_decode: L must be >= 1");
    const GcdWorkspace ws(ctx, r);
    TepGenerator gen(ws.r_partial());
    const std::uint64_t l_max = trunc.l_max == 0 ? ~std::uint64_t{0} : trunc.l_max;

    DecodeResult out;
    TepMask target;
    if (true_codeword) {
        out.genie_tracked = true;
        target = genie_target(ws, gen, r, *true_codeword);
    }

    CandidateList<Stored> list(L);
    const double mass_goal = trunc.tau_p > 0.0 ? 1.0 - trunc.tau_p : kInf;
    double mass = 0.0;

    while (true) {
        if (!gen.has_next()) {
            out.stop_reason = StopReason::exhausted;
            break;
        }
        const double next_w = gen.peek_weight();
        if (next_w + trunc.delta >= list.worst_weight()) {
            out.stop_reason = StopReason::optimal;
            break;
        }
        if (next_w >= trunc.tau_s) {
            out.stop_reason = StopReason::tau_s;
            break;
        }
        if (out.queries >= l_max) {
            out.stop_reason = StopReason::l_max;
            break;
        }

        Tep t = gen.next();
        ++out.emissions;
        ++out.queries;
        if (out.genie_tracked && !out.genie_queried && t.mask == target) {
            out.genie_queried = true;
            out.genie_rank = out.queries;
        }

        GcdWorkspace::Completion c = ws.complete(gen.perm(), t.mask, t.weight);
        list.try_insert(c.weight, Stored{std::move(t.mask), std::move(c.e_parity)});

        if (trunc.tau_p > 0.0) {
            mass += std::exp(ws.log_p0() - t.weight);
            if (mass >= mass_goal) {
                out.stop_reason = StopReason::tau_p;
                break;
            }
        }
    }

    materialize(ws, gen.perm(), list, out);
    return out;
}

DecodeResult gcd_decode(const LlrVector& r, const Code& code, std::size_t L,
                        const TruncationConfig& trunc, const BinaryVector* true_codeword) {
    return gcd_decode(r, SystematizedCode::build(code), L, trunc, true_codeword);
}

DecodeResult parallel_gcd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L,
                                 std::size_t delta_split, const TruncationConfig& trunc,
                                 const BinaryVector* true_codeword) {
    if (L < 1) throw InvalidParam("parallel_gcd_decode: L must be >= 1");
    const GcdWorkspace ws(ctx, r);
    const std::size_t k = ws.k();
    if (delta_split > k || delta_split > 20)
        throw InvalidParam("parallel_gcd_decode: delta_split must be <= min(k, 20)");

    // Global stable sort of the partial positions by reliability; the first
    // delta_split sorted positions form the branch prefix, the rest feed one
    // shared suffix generator (whose own stable sort is then the identity).
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(ws.r_partial()[a]) < std::fabs(ws.r_partial()[b]);
    });
    std::vector<double> mag(k);
    for (std::size_t i = 0; i < k; ++i) mag[i] = std::fabs(ws.r_partial()[order[i]]);

    const std::size_t n_branches = std::size_t{1} << delta_split;
    LlrVector suffix_r(mag.begin() + static_cast<std::ptrdiff_t>(delta_split), mag.end());
    TepGenerator gen(suffix_r);

    DecodeResult out;
    std::uint64_t target_prefix = 0;
    TepMask target_suffix;
    if (true_codeword) {
        out.genie_tracked = true;
        BinaryVector e_true = hard_decision(r);
        e_true ^= *true_codeword;
        const BinaryVector e_p_code = ws.partial_of_error(e_true);
        target_suffix = TepMask(k - delta_split);
        for (std::size_t i = 0; i < k; ++i) {
            if (!e_p_code.get(order[i])) continue;
            if (i < delta_split)
                target_prefix |= std::uint64_t{1} << i;
            else
                target_suffix.set(i - delta_split);
        }
    }

    // Per-branch syndrome share from the prefix bits.
    std::vector<BinaryVector> s1(n_branches);
    for (std::size_t i = 0; i < n_branches; ++i) {
        BinaryVector sb = ws.syndrome_bits();
        for (std::size_t j = 0; j < delta_split; ++j)
            if ((i >> j) & 1) sb ^= ctx.p_cols[order[j]];
        s1[i] = std::move(sb);
    }
    // Prefix magnitudes folded in descending index order on top of the suffix
    // weight, matching the sequential generator's canonical accumulation.
    auto prefix_extend = [&](std::size_t branch, double suffix_weight) {
        double acc = suffix_weight;
        for (std::size_t j = delta_split; j-- > 0;)
            if ((branch >> j) & 1) acc += mag[j];
        return acc;
    };

    CandidateList<Stored> list(L);
    std::vector<std::uint8_t> closed(n_branches, 0);
    std::size_t n_closed = 0;
    const std::uint64_t l_max = trunc.l_max == 0 ? ~std::uint64_t{0} : trunc.l_max;
    const double mass_goal = trunc.tau_p > 0.0 ? 1.0 - trunc.tau_p : kInf;
    double mass = 0.0;
    bool saw_tau_s = false;
    bool budget_hit = false;
    bool mass_hit = false;

    while (n_closed < n_branches && gen.has_next() && !budget_hit && !mass_hit) {
        Tep t = gen.next();
        ++out.emissions;
        for (std::size_t i = 0; i < n_branches; ++i) {
            if (closed[i]) continue;
            const double w_p = prefix_extend(i, t.weight);
            if (w_p + trunc.delta >= list.worst_weight()) {
                closed[i] = 1;
                ++n_closed;
                continue;
            }
            if (w_p >= trunc.tau_s) {
                closed[i] = 1;
                ++n_closed;
                saw_tau_s = true;
                continue;
            }
            if (out.queries >= l_max) {
                budget_hit = true;
                break;
            }
            ++out.queries;

            // Full partial pattern in global sorted coordinates.
            TepMask ep(k);
            for (std::size_t j = 0; j < delta_split; ++j)
                if ((i >> j) & 1) ep.set(j);
            for (std::size_t idx : t.mask.support()) ep.set(delta_split + idx);

            if (out.genie_tracked && !out.genie_queried && i == target_prefix &&
                t.mask == target_suffix) {
                out.genie_queried = true;
                out.genie_rank = out.queries;
            }

            BinaryVector ei = s1[i];
            for (std::size_t idx : t.mask.support()) ei ^= ctx.p_cols[order[delta_split + idx]];
            const double full_w = ws.extend_parity_weight(ei, w_p);
            list.try_insert(full_w, Stored{std::move(ep), std::move(ei)});

            if (trunc.tau_p > 0.0) {
                mass += std::exp(ws.log_p0() - w_p);
                if (mass >= mass_goal) {
                    mass_hit = true;
                    break;
                }
            }
        }
    }

    if (budget_hit)
        out.stop_reason = StopReason::l_max;
    else if (mass_hit)
        out.stop_reason = StopReason::tau_p;
    else if (n_closed == n_branches)
        out.stop_reason = saw_tau_s ? StopReason::tau_s : StopReason::optimal;
    else
        out.stop_reason = StopReason::exhausted;

    materialize(ws, order, list, out);
    return out;
}

DecodeResult parallel_gcd_decode(const LlrVector& r, const Code& code, std::size_t L,
                                 std::size_t delta_split, const TruncationConfig& trunc,
                                 const BinaryVector* true_codeword) {
    return parallel_gcd_decode(r, SystematizedCode::build(code), L, delta_split, trunc,
                               true_codeword);
}

DecodeResult gnd_decode(const LlrVector& r, const Code& code, std::size_t L, std::uint64_t l_max,
                        const BinaryVector* true_codeword) {
    if (r.size() != code.n) throw DimensionMismatch("gnd_decode: LLR length != n");
    if (L < 1) throw InvalidParam("gnd_decode: L must be >= 1");
    if (l_max == 0) throw InvalidParam("gnd_decode: l_max must be >= 1");

    const BinaryVector z = hard_decision(r);
    const BinaryVector s = syndrome(code.h, z);
    const std::size_t parity = code.n - code.k;

    // Column view of h for incremental syndrome evaluation.
    std::vector<BinaryVector> h_cols(code.n, BinaryVector(parity));
    for (std::size_t row = 0; row < parity; ++row)
        for (std::size_t c = 0; c < code.n; ++c)
            if (code.h.get(row, c)) h_cols[c].set(row, true);

    TepGenerator gen(r);
    DecodeResult out;
    TepMask target;
    if (true_codeword) {
        out.genie_tracked = true;
        BinaryVector e_true = z;
        e_true ^= *true_codeword;
        target = gen.mask_from_caller_order(e_true);
    }

    while (out.list.size() < L) {
        if (!gen.has_next() || out.queries >= l_max)
            throw Exhausted("gnd_decode: fewer than L codewords within l_max");
        Tep t = gen.next();
        ++out.emissions;
        ++out.queries;

        BinaryVector e_syndrome(parity);
        BinaryVector e(code.n);
        for (std::size_t idx : t.mask.support()) {
            const std::size_t orig = gen.perm()[idx];
            e.set(orig, true);
            e_syndrome ^= h_cols[orig];
        }
        if (out.genie_tracked && !out.genie_queried && t.mask == target) {
            out.genie_queried = true;
            out.genie_rank = out.queries;
        }
        if (e_syndrome == s) {
            BinaryVector c = z;
            c ^= e;
            out.list.push_back(ListEntry{std::move(c), t.weight});
        }
    }
    out.stop_reason = StopReason::optimal;
    return out;
}

DecodeResult esd_decode(const LlrVector& r, const SystematizedCode& ctx, std::size_t L) {
    const GcdWorkspace ws(ctx, r);
    const std::size_t k = ws.k();
    if (k > 24) throw TooLarge("esd_decode: k must be <= 24");
    if (L < 1) throw InvalidParam("esd_decode: L must be >= 1");
    if (k < 63 && static_cast<std::uint64_t>(L) > (std::uint64_t{1} << k))
        throw ListTooLarge("esd_decode: L exceeds 2^k candidates");

    // Shares the gcd arithmetic exactly: patterns are scored in the same
    // sorted coordinates with the same summation order, so equal patterns get
    // bitwise-equal weights across the two decoders.
    TepGenerator gen(ws.r_partial());  // used only for its sorted order
    const std::vector<double>& mag = gen.sorted_magnitudes();

    struct Ranked {
        double full_w;
        double partial_w;
        std::uint32_t hamming;
        TepMask ep;
        BinaryVector ei;
    };
    auto better = [](const Ranked& a, const Ranked& b) {
        if (a.full_w != b.full_w) return a.full_w < b.full_w;
        if (a.partial_w != b.partial_w) return a.partial_w < b.partial_w;
        if (a.hamming != b.hamming) return a.hamming < b.hamming;
        return TepMask::lex_prior(a.ep, b.ep);
    };

    std::vector<Ranked> best;
    best.reserve(L + 1);
    const std::uint64_t total = std::uint64_t{1} << k;
    for (std::uint64_t m = 0; m < total; ++m) {
        TepMask ep(k);
        double partial = 0.0;
        for (std::size_t j = k; j-- > 0;)
            if ((m >> j) & 1) {
                ep.set(j);
                partial += mag[j];
            }
        GcdWorkspace::Completion c = ws.complete(gen.perm(), ep, partial);
        Ranked cand{c.weight, partial, static_cast<std::uint32_t>(ep.popcount()), std::move(ep),
                    std::move(c.e_parity)};
        if (best.size() == L && !better(cand, best.back())) continue;
        auto pos = std::upper_bound(best.begin(), best.end(), cand, better);
        best.insert(pos, std::move(cand));
        if (best.size() > L) best.pop_back();
    }

    DecodeResult out;
    out.queries = total;
    out.emissions = total;
    out.stop_reason = StopReason::exhausted;
    out.list.reserve(best.size());
    for (auto& cand : best)
        out.list.push_back(ListEntry{ws.codeword(gen.perm(), cand.ep, cand.ei), cand.full_w});
    return out;
}

DecodeResult esd_decode(const LlrVector& r, const Code& code, std::size_t L) {
    return esd_decode(r, SystematizedCode::build(code), L);
}

double tep_posterior(const BinaryVector& e_p, const LlrVector& r_p) {
    if (e_p.size() != r_p.size()) throw DimensionMismatch("tep_posterior: size mismatch");
    double prod = 1.0;
    for (std::size_t i = 0; i < r_p.size(); ++i) {
        const double a = std::fabs(r_p[i]);
        prod *= e_p.get(i) ? 1.0 / (1.0 + std::exp(a)) : 1.0 / (1.0 + std::exp(-a));
    }
    return prod;
}

}  // namespace gcdec
