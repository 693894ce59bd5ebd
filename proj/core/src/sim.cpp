#include "gcdec/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <ostream>
#include <thread>
#include <utility>

#include "gcdec/errors.hpp"
#include "gcdec/rng.hpp"

namespace gcdec {

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

const char* to_string(DecoderKind kind) {
    switch (kind) {
        case DecoderKind::gcd: return "gcd";
        case DecoderKind::parallel_gcd: return "parallel_gcd";
        case DecoderKind::gnd: return "gnd";
        case DecoderKind::esd: return "esd";
        case DecoderKind::scl: return "scl";
        case DecoderKind::scl_gcd: return "scl_gcd";
    }
    return "?";
}

DecoderKind decoder_kind_from_string(const std::string& name) {
    for (DecoderKind k : {DecoderKind::gcd, DecoderKind::parallel_gcd, DecoderKind::gnd,
                          DecoderKind::esd, DecoderKind::scl, DecoderKind::scl_gcd})
        if (name == to_string(k)) return k;
    throw ConfigError("decoder: unknown kind '" + name + "'");
}

const char* to_string(GridKind kind) {
    switch (kind) {
        case GridKind::ebn0: return "ebn0";
        case GridKind::direct: return "direct";
        case GridKind::bsc: return "bsc";
    }
    return "?";
}

GridKind grid_kind_from_string(const std::string& name) {
    for (GridKind k : {GridKind::ebn0, GridKind::direct, GridKind::bsc})
        if (name == to_string(k)) return k;
    throw ConfigError("grid: unknown kind '" + name + "'");
}

const char* to_string(CodeSpec::Kind kind) {
    switch (kind) {
        case CodeSpec::Kind::hamming: return "hamming";
        case CodeSpec::Kind::rm: return "rm";
        case CodeSpec::Kind::random: return "random";
        case CodeSpec::Kind::file: return "file";
        case CodeSpec::Kind::polar: return "polar";
    }
    return "?";
}

CodeSpec::Kind code_kind_from_string(const std::string& name) {
    for (CodeSpec::Kind k : {CodeSpec::Kind::hamming, CodeSpec::Kind::rm, CodeSpec::Kind::random,
                             CodeSpec::Kind::file, CodeSpec::Kind::polar})
        if (name == to_string(k)) return k;
    throw ConfigError("code.kind: unknown kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Code construction
// ---------------------------------------------------------------------------

PolarCode build_polar(const CodeSpec& spec) {
    if (spec.kind != CodeSpec::Kind::polar)
        throw ConfigError("code.kind: expected polar, got " + std::string(to_string(spec.kind)));
    if (spec.m < 1 || spec.m > 20) throw ConfigError("code.m: polar needs 1 <= m <= 20");
    const std::size_t n = std::size_t{1} << spec.m;
    if (spec.k < 1) throw ConfigError("code.k: polar needs k >= 1");
    const unsigned crc_bits = spec.crc11 ? CrcSpec::crc11().degree : 0u;
    if (spec.k + crc_bits > n) throw ConfigError("code.k: k + CRC bits exceed the length");
    if (spec.reallocate > std::min(spec.k + crc_bits, n - spec.k - crc_bits))
        throw ConfigError("code.reallocate: swap count exceeds the smaller bit class");

    std::vector<std::size_t> order;
    if (!spec.path.empty()) order = load_reliability_order(spec.path, n);
    PolarCode pc = construct_polar(n, spec.k, order,
                                   spec.crc11 ? std::optional<CrcSpec>(CrcSpec::crc11())
                                              : std::nullopt);
    if (spec.reallocate > 0) pc = reallocate_bits(pc, spec.reallocate);
    return pc;
}

namespace {

std::string polar_name(const CodeSpec& spec, const PolarCode& pc) {
    std::string name = "polar[" + std::to_string(pc.n) + "," + std::to_string(pc.k) + "]";
    if (pc.crc.degree > 0) name += "+crc" + std::to_string(pc.crc.degree);
    if (spec.reallocate > 0) name += "~" + std::to_string(spec.reallocate);
    return name;
}

}  // namespace

Code build_code(const CodeSpec& spec) {
    switch (spec.kind) {
        case CodeSpec::Kind::hamming:
            if (spec.m < 2) throw ConfigError("code.m: hamming needs m >= 2");
            return hamming_code(spec.m);
        case CodeSpec::Kind::rm:
            if (spec.m < 1 || spec.r > spec.m)
                throw ConfigError("code.m/code.r: rm needs m >= 1 and r <= m");
            return rm_code(spec.m, spec.r);
        case CodeSpec::Kind::random:
            if (spec.k < 1 || spec.k > spec.n)
                throw ConfigError("code.n/code.k: random needs 1 <= k <= n");
            return random_code(spec.n, spec.k, spec.seed);
        case CodeSpec::Kind::file:
            if (spec.path.empty()) throw ConfigError("code.path: required for file codes");
            return load_code(spec.path);
        case CodeSpec::Kind::polar: {
            const PolarCode pc = build_polar(spec);
            Code code = polar_to_code(pc);
            code.name = polar_name(spec, pc) + "/linear";
            return code;
        }
    }
    throw ConfigError("code.kind: invalid value");
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

void validate(const ExperimentConfig& cfg) {
    if (cfg.grid_points.empty()) throw ConfigError("grid_points: at least one point required");
    for (double v : cfg.grid_points) {
        if (!std::isfinite(v)) throw ConfigError("grid_points: values must be finite");
        if (cfg.grid == GridKind::bsc && (v <= 0.0 || v >= 0.5))
            throw ConfigError("grid_points: BSC crossover must lie in (0, 0.5)");
    }
    if (cfg.list_size < 1) throw ConfigError("list_size: must be >= 1");
    if (cfg.delta_split > 16) throw ConfigError("delta_split: must be <= 16");
    if (cfg.target_errors < 1) throw ConfigError("target_errors: must be >= 1");
    if (cfg.max_frames < 1) throw ConfigError("max_frames: must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
    const bool tree_kind =
        cfg.decoder == DecoderKind::scl || cfg.decoder == DecoderKind::scl_gcd;
    if (tree_kind && cfg.code.kind != CodeSpec::Kind::polar)
        throw ConfigError("decoder: scl/scl_gcd require code.kind = polar");
    if (cfg.decoder == DecoderKind::scl_gcd && cfg.prune_trials < 1 && cfg.tree_file.empty())
        throw ConfigError("prune_trials: must be >= 1 when pruning a tree");
}

namespace {

ChannelSpec make_channel(GridKind grid, double value, double rate) {
    switch (grid) {
        case GridKind::ebn0: return ChannelSpec::awgn_from_snr_db(value, rate);
        case GridKind::direct: return ChannelSpec::awgn_snr_direct(value);
        case GridKind::bsc: return ChannelSpec::bsc(value);
    }
    throw ConfigError("grid: invalid value");
}

// Everything decode needs for one frame; const after setup, shared by threads.
struct Env {
    DecoderKind kind = DecoderKind::gcd;
    std::size_t L = 1;
    TruncationConfig trunc;
    std::size_t delta_split = 0;
    std::uint64_t gnd_budget = ~std::uint64_t{0};
    std::size_t msg_bits = 0;

    Code code;            // flat decoders
    SystematizedCode sys{};

    PolarCode pc;                      // tree decoders
    std::unique_ptr<TreeDecoder> dec;  // single-bit (scl) or pruned (scl_gcd)
    double scl_steps = 0.0;
    bool pruned = false;
};

struct FrameStat {
    std::uint64_t queries = 0;
    double time_steps = 0.0;
    std::uint8_t list_err = 0;
    std::uint8_t top_err = 0;
    std::uint8_t fallback = 0;
    std::uint8_t genie_miss = 0;
    int stop = -1;  // StopReason value; -1 when the decoder has no stop rule
};

FrameStat run_frame(const Env& env, const ChannelSpec& ch, std::uint64_t master_seed,
                    std::uint64_t frame) {
    Rng rng = rng_for_frame(master_seed, frame);
    BinaryVector msg(env.msg_bits);
    for (std::size_t i = 0; i < env.msg_bits; ++i)
        if (rng.next_bit()) msg.set(i, true);

    const bool tree_kind = env.kind == DecoderKind::scl || env.kind == DecoderKind::scl_gcd;
    const BinaryVector sent = tree_kind ? polar_encode(env.pc, msg) : env.code.encode(msg);
    const LlrVector r = ch.llr(ch.transmit(sent, rng));

    FrameStat st;
    if (tree_kind) {
        const SclResult res = env.dec->decode(r);
        st.queries = res.queries;
        st.top_err = res.codewords.empty() || !(res.codewords.front() == sent);
        st.list_err = std::find(res.codewords.begin(), res.codewords.end(), sent) ==
                      res.codewords.end();
        st.fallback = res.used_fallback ? 1 : 0;
        if (env.pruned) {
            const std::vector<double> ranks(res.leaf_ranks.begin(), res.leaf_ranks.end());
            st.time_steps = pruned_time_steps(env.dec->tree(), env.L, ranks);
        } else {
            st.time_steps = env.scl_steps;
        }
        return st;
    }

    DecodeResult dr;
    switch (env.kind) {
        case DecoderKind::gcd:
            dr = gcd_decode(r, env.sys, env.L, env.trunc, &sent);
            break;
        case DecoderKind::parallel_gcd:
            dr = parallel_gcd_decode(r, env.sys, env.L, env.delta_split, env.trunc, &sent);
            break;
        case DecoderKind::esd:
            dr = esd_decode(r, env.sys, env.L);
            break;
        case DecoderKind::gnd:
            try {
                dr = gnd_decode(r, env.code, env.L, env.gnd_budget, &sent);
            } catch (const Exhausted&) {
                // Budget spent with fewer than L codewords found: an error
                // frame that consumed the whole budget.
                st.queries = env.gnd_budget;
                st.list_err = st.top_err = 1;
                st.genie_miss = 1;
                st.stop = static_cast<int>(StopReason::l_max);
                return st;
            }
            break;
        default:
            throw ConfigError("decoder: invalid value");
    }

    st.queries = dr.queries;
    st.stop = static_cast<int>(dr.stop_reason);
    st.genie_miss = (dr.genie_tracked && !dr.genie_queried) ? 1 : 0;
    st.top_err = dr.list.empty() || !(dr.list.front().codeword == sent);
    st.list_err = 1;
    for (const ListEntry& e : dr.list)
        if (e.codeword == sent) {
            st.list_err = 0;
            break;
        }
    return st;
}

std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double fraction) {
    if (sorted.empty()) return 0;
    const double pos = std::ceil(fraction * static_cast<double>(sorted.size()));
    std::size_t idx = pos <= 1.0 ? 0 : static_cast<std::size_t>(pos) - 1;
    idx = std::min(idx, sorted.size() - 1);
    return sorted[idx];
}

SummaryRecord run_point(const Env& env, const ExperimentConfig& cfg, double value, double rate) {
    const ChannelSpec ch = make_channel(cfg.grid, value, rate);

    SummaryRecord rec;
    rec.grid_value = value;
    rec.channel_param = cfg.grid == GridKind::bsc ? ch.p : ch.sigma2;

    const bool stop_on_top =
        env.kind == DecoderKind::scl || env.kind == DecoderKind::scl_gcd;
    const std::size_t threads = cfg.threads;
    const std::uint64_t block = std::uint64_t{256} * threads;

    std::vector<std::uint64_t> per_frame_queries;
    double query_sum = 0.0;
    double step_sum = 0.0;
    std::uint64_t next = 0;
    bool done = false;

    std::vector<FrameStat> stats;
    while (!done && next < cfg.max_frames) {
        const std::uint64_t count = std::min<std::uint64_t>(block, cfg.max_frames - next);
        stats.assign(count, FrameStat{});
        if (threads == 1) {
            for (std::uint64_t i = 0; i < count; ++i)
                stats[i] = run_frame(env, ch, cfg.master_seed, next + i);
        } else {
            // Workers fill disjoint slices; all aggregation happens afterwards
            // in frame order, so scheduling cannot influence the results.
            const std::uint64_t chunk = (count + threads - 1) / threads;
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(threads);
            for (std::size_t t = 0; t < threads; ++t) {
                const std::uint64_t lo = t * chunk;
                if (lo >= count) break;
                const std::uint64_t hi = std::min<std::uint64_t>(count, lo + chunk);
                pool.emplace_back([&, t, lo, hi] {
                    try {
                        for (std::uint64_t i = lo; i < hi; ++i)
                            stats[i] = run_frame(env, ch, cfg.master_seed, next + i);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
            for (std::thread& th : pool) th.join();
            for (const std::exception_ptr& e : errors)
                if (e) std::rethrow_exception(e);
        }

        for (std::uint64_t i = 0; i < count && !done; ++i) {
            const FrameStat& st = stats[i];
            ++rec.frames;
            rec.list_errors += st.list_err;
            rec.top_errors += st.top_err;
            rec.fallbacks += st.fallback;
            rec.genie_misses += st.genie_miss;
            if (st.stop >= 0) ++rec.stop_counts[static_cast<std::size_t>(st.stop)];
            query_sum += static_cast<double>(st.queries);
            step_sum += st.time_steps;
            per_frame_queries.push_back(st.queries);
            const std::uint64_t hits = stop_on_top ? rec.top_errors : rec.list_errors;
            if (hits >= cfg.target_errors) done = true;
        }
        next += count;
    }

    const double frames = static_cast<double>(rec.frames);
    rec.list_fer = rec.frames ? static_cast<double>(rec.list_errors) / frames : 0.0;
    rec.top_fer = rec.frames ? static_cast<double>(rec.top_errors) / frames : 0.0;
    rec.mean_queries = rec.frames ? query_sum / frames : 0.0;
    rec.mean_time_steps = rec.frames ? step_sum / frames : 0.0;
    std::sort(per_frame_queries.begin(), per_frame_queries.end());
    rec.p50_queries = nearest_rank(per_frame_queries, 0.50);
    rec.p90_queries = nearest_rank(per_frame_queries, 0.90);
    rec.p99_queries = nearest_rank(per_frame_queries, 0.99);
    rec.max_queries = per_frame_queries.empty() ? 0 : per_frame_queries.back();
    return rec;
}

}  // namespace

std::vector<SummaryRecord> run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks) {
    validate(cfg);

    Env env;
    env.kind = cfg.decoder;
    env.L = cfg.list_size;
    env.trunc = cfg.trunc;
    env.delta_split = cfg.delta_split;
    env.gnd_budget = cfg.trunc.l_max == 0 ? ~std::uint64_t{0} : cfg.trunc.l_max;

    std::string code_name;
    double rate = 0.0;
    if (cfg.decoder == DecoderKind::scl || cfg.decoder == DecoderKind::scl_gcd) {
        env.pc = build_polar(cfg.code);
        env.msg_bits = env.pc.k;
        rate = static_cast<double>(env.pc.k) / static_cast<double>(env.pc.n);
        code_name = polar_name(cfg.code, env.pc);
        if (cfg.decoder == DecoderKind::scl) {
            env.dec = std::make_unique<TreeDecoder>(single_bit_tree(env.pc, cfg.list_size),
                                                    cfg.list_size);
            env.scl_steps = static_cast<double>(scl_time_steps(env.pc));
        } else {
            PolarTree tree;
            if (hooks.tree) {
                tree = *hooks.tree;
            } else if (!cfg.tree_file.empty()) {
                tree = load_tree(cfg.tree_file, env.pc);
            } else {
                const double design =
                    std::isnan(cfg.design_snr_db) ? cfg.grid_points.front() : cfg.design_snr_db;
                PruneOptions opts;
                opts.leaf_l_max = cfg.trunc.l_max;
                // Distinct seed stream from the frame RNG so the pruning
                // trials cannot correlate with the measurement noise.
                tree = prune_tree(env.pc, cfg.list_size, make_channel(cfg.grid, design, rate),
                                  cfg.prune_trials, cfg.master_seed ^ 0x7072756E65ull, opts);
            }
            env.pruned = true;
            env.dec = std::make_unique<TreeDecoder>(std::move(tree), cfg.list_size);
        }
    } else {
        env.code = build_code(cfg.code);
        env.msg_bits = env.code.k;
        rate = static_cast<double>(env.code.k) / static_cast<double>(env.code.n);
        code_name = env.code.name;
        if (cfg.decoder == DecoderKind::esd && env.code.k > 24)
            throw ConfigError("decoder: esd requires k <= 24, code has k = " +
                              std::to_string(env.code.k));
        if (cfg.decoder != DecoderKind::gnd) env.sys = SystematizedCode::build(env.code);
    }

    std::vector<SummaryRecord> out;
    out.reserve(cfg.grid_points.size());
    for (double value : cfg.grid_points) {
        SummaryRecord rec = run_point(env, cfg, value, rate);
        rec.code_name = code_name;
        rec.decoder = cfg.decoder;
        rec.grid = cfg.grid;
        if (hooks.on_point) hooks.on_point(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Result emission
// ---------------------------------------------------------------------------

const char* const kSummaryCsvHeader =
    "code,decoder,grid,grid_value,channel_param,frames,list_errors,top_errors,"
    "list_fer,top_fer,mean_queries,p50_queries,p90_queries,p99_queries,max_queries,"
    "mean_time_steps,stop_optimal,stop_l_max,stop_tau_s,stop_tau_p,stop_exhausted,"
    "fallbacks,genie_misses";

namespace {

// Shortest round-trip decimal form: locale-free and stable across runs.
std::string fmt(double v) {
    char buf[32];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

void emit_csv(const std::vector<SummaryRecord>& records, std::ostream& out) {
    out << kSummaryCsvHeader << '\n';
    for (const SummaryRecord& r : records) {
        out << r.code_name << ',' << to_string(r.decoder) << ',' << to_string(r.grid) << ','
            << fmt(r.grid_value) << ',' << fmt(r.channel_param) << ',' << r.frames << ','
            << r.list_errors << ',' << r.top_errors << ',' << fmt(r.list_fer) << ','
            << fmt(r.top_fer) << ',' << fmt(r.mean_queries) << ',' << r.p50_queries << ','
            << r.p90_queries << ',' << r.p99_queries << ',' << r.max_queries << ','
            << fmt(r.mean_time_steps) << ',' << r.stop_counts[0] << ',' << r.stop_counts[1]
            << ',' << r.stop_counts[2] << ',' << r.stop_counts[3] << ',' << r.stop_counts[4]
            << ',' << r.fallbacks << ',' << r.genie_misses << '\n';
    }
}

void emit_jsonl(const std::vector<SummaryRecord>& records, std::ostream& out) {
    for (const SummaryRecord& r : records) {
        out << "{\"code\":\"" << json_escape(r.code_name) << "\",\"decoder\":\""
            << to_string(r.decoder) << "\",\"grid\":\"" << to_string(r.grid)
            << "\",\"grid_value\":" << fmt(r.grid_value) << ",\"channel_param\":"
            << fmt(r.channel_param) << ",\"frames\":" << r.frames << ",\"list_errors\":"
            << r.list_errors << ",\"top_errors\":" << r.top_errors << ",\"list_fer\":"
            << fmt(r.list_fer) << ",\"top_fer\":" << fmt(r.top_fer) << ",\"mean_queries\":"
            << fmt(r.mean_queries) << ",\"p50_queries\":" << r.p50_queries
            << ",\"p90_queries\":" << r.p90_queries << ",\"p99_queries\":" << r.p99_queries
            << ",\"max_queries\":" << r.max_queries << ",\"mean_time_steps\":"
            << fmt(r.mean_time_steps) << ",\"stop_optimal\":" << r.stop_counts[0]
            << ",\"stop_l_max\":" << r.stop_counts[1] << ",\"stop_tau_s\":" << r.stop_counts[2]
            << ",\"stop_tau_p\":" << r.stop_counts[3] << ",\"stop_exhausted\":"
            << r.stop_counts[4] << ",\"fallbacks\":" << r.fallbacks << ",\"genie_misses\":"
            << r.genie_misses << "}\n";
    }
}

}  // namespace

void emit_results(const std::vector<SummaryRecord>& records, const std::string& format,
                  std::ostream& out) {
    if (format == "csv")
        emit_csv(records, out);
    else if (format == "jsonl")
        emit_jsonl(records, out);
    else
        throw ConfigError("format: expected csv or jsonl, got '" + format + "'");
}

void emit_results(const std::vector<SummaryRecord>& records, const std::string& format,
                  const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("emit_results: cannot open '" + path + "'");
    emit_results(records, format, static_cast<std::ostream&>(file));
    file.flush();
    if (!file) throw IoError("emit_results: write failed for '" + path + "'");
}

}  // namespace gcdec
