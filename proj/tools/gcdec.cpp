// gcdec: command-line front end for the decoding toolkit.
//
// Subcommands: decode, fer, queries, ccdf, prune, latency, construct.
// Experiment-shaped subcommands read an optional JSON config file whose keys
// mirror the experiment schema; explicitly passed flags override file values.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcdec/analysis.hpp"
#include "gcdec/channel.hpp"
#include "gcdec/codes.hpp"
#include "gcdec/decoders.hpp"
#include "gcdec/errors.hpp"
#include "gcdec/polar.hpp"
#include "gcdec/sim.hpp"

using namespace gcdec;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config file -> ExperimentConfig
// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("code")) {
            const json& c = j.at("code");
            if (c.contains("kind")) cfg.code.kind = code_kind_from_string(c.at("kind"));
            if (c.contains("m")) cfg.code.m = c.at("m").get<std::size_t>();
            if (c.contains("r")) cfg.code.r = c.at("r").get<std::size_t>();
            if (c.contains("n")) cfg.code.n = c.at("n").get<std::size_t>();
            if (c.contains("k")) cfg.code.k = c.at("k").get<std::size_t>();
            if (c.contains("seed")) cfg.code.seed = c.at("seed").get<std::uint64_t>();
            if (c.contains("path")) cfg.code.path = c.at("path").get<std::string>();
            if (c.contains("crc11")) cfg.code.crc11 = c.at("crc11").get<bool>();
            if (c.contains("reallocate"))
                cfg.code.reallocate = c.at("reallocate").get<std::size_t>();
        }
        if (j.contains("grid")) cfg.grid = grid_kind_from_string(j.at("grid"));
        if (j.contains("grid_points"))
            cfg.grid_points = j.at("grid_points").get<std::vector<double>>();
        if (j.contains("decoder")) cfg.decoder = decoder_kind_from_string(j.at("decoder"));
        if (j.contains("list_size")) cfg.list_size = j.at("list_size").get<std::size_t>();
        if (j.contains("truncation")) {
            const json& t = j.at("truncation");
            if (t.contains("l_max")) cfg.trunc.l_max = t.at("l_max").get<std::uint64_t>();
            if (t.contains("tau_s")) cfg.trunc.tau_s = t.at("tau_s").get<double>();
            if (t.contains("tau_p")) cfg.trunc.tau_p = t.at("tau_p").get<double>();
            if (t.contains("delta")) cfg.trunc.delta = t.at("delta").get<double>();
        }
        if (j.contains("delta_split")) cfg.delta_split = j.at("delta_split").get<std::size_t>();
        if (j.contains("tree_file")) cfg.tree_file = j.at("tree_file").get<std::string>();
        if (j.contains("design_snr_db")) cfg.design_snr_db = j.at("design_snr_db").get<double>();
        if (j.contains("prune_trials"))
            cfg.prune_trials = j.at("prune_trials").get<std::size_t>();
        if (j.contains("target_errors"))
            cfg.target_errors = j.at("target_errors").get<std::uint64_t>();
        if (j.contains("max_frames")) cfg.max_frames = j.at("max_frames").get<std::uint64_t>();
        if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

// Flags a subcommand may use to override the config file.  Every member is
// optional so that only explicitly passed flags replace file values.
struct Overrides {
    std::optional<std::string> code_kind, code_path, grid, decoder, tree_file;
    std::optional<std::size_t> m, r, n, k, list_size, delta_split, prune_trials, reallocate;
    std::optional<std::uint64_t> code_seed, l_max, target_errors, max_frames, master_seed;
    std::optional<double> tau_s, tau_p, delta, design_snr_db;
    std::optional<unsigned> threads;
    std::optional<bool> crc11;
    std::vector<double> grid_points;  // non-empty replaces the file's grid
};

void add_code_flags(CLI::App& app, Overrides& ov) {
    app.add_option("--code", ov.code_kind,
                   "code family: hamming, rm, random, file, polar");
    app.add_option("-m", ov.m, "hamming: parity bits; rm/polar: log2 length");
    app.add_option("-r", ov.r, "rm order");
    app.add_option("-n", ov.n, "random code length");
    app.add_option("-k", ov.k, "random/polar message bits (CRC excluded)");
    app.add_option("--code-seed", ov.code_seed, "random code construction seed");
    app.add_option("--code-file", ov.code_path,
                   "file kind: code file; polar: reliability order file");
    app.add_option("--crc11", ov.crc11, "polar: attach CRC-11 (true/false)");
    app.add_option("--reallocate", ov.reallocate, "polar: boundary active/frozen swaps");
}

void add_decoder_flags(CLI::App& app, Overrides& ov) {
    app.add_option("--decoder", ov.decoder,
                   "gcd, parallel_gcd, gnd, esd, scl, scl_gcd");
    app.add_option("-L,--list-size", ov.list_size, "list size L");
    app.add_option("--l-max", ov.l_max, "query budget (0 = unlimited)");
    app.add_option("--tau-s", ov.tau_s, "soft-weight stop threshold");
    app.add_option("--tau-p", ov.tau_p, "residual posterior-mass stop threshold");
    app.add_option("--delta-slack", ov.delta, "slack added to the completion check");
    app.add_option("--delta-split", ov.delta_split, "parallel_gcd branch split exponent");
    app.add_option("--tree", ov.tree_file, "scl_gcd: pruned tree file");
    app.add_option("--design-snr", ov.design_snr_db,
                   "scl_gcd pruning grid value (default: first grid point)");
    app.add_option("--prune-trials", ov.prune_trials, "genie trials per pruning decision");
}

void add_run_flags(CLI::App& app, Overrides& ov) {
    app.add_option("--grid", ov.grid, "grid kind: ebn0, snr, bsc");
    app.add_option("--points", ov.grid_points, "grid points (SNR dB or BSC p)");
    app.add_option("--target-errors", ov.target_errors, "stop a point after this many errors");
    app.add_option("--max-frames", ov.max_frames, "frame cap per point");
    app.add_option("--seed", ov.master_seed, "master seed");
    app.add_option("--threads", ov.threads, "worker threads");
}

void apply(const Overrides& ov, ExperimentConfig& cfg) {
    if (ov.code_kind) cfg.code.kind = code_kind_from_string(*ov.code_kind);
    if (ov.m) cfg.code.m = *ov.m;
    if (ov.r) cfg.code.r = *ov.r;
    if (ov.n) cfg.code.n = *ov.n;
    if (ov.k) cfg.code.k = *ov.k;
    if (ov.code_seed) cfg.code.seed = *ov.code_seed;
    if (ov.code_path) cfg.code.path = *ov.code_path;
    if (ov.crc11) cfg.code.crc11 = *ov.crc11;
    if (ov.reallocate) cfg.code.reallocate = *ov.reallocate;
    if (ov.grid) cfg.grid = grid_kind_from_string(*ov.grid);
    if (!ov.grid_points.empty()) cfg.grid_points = ov.grid_points;
    if (ov.decoder) cfg.decoder = decoder_kind_from_string(*ov.decoder);
    if (ov.list_size) cfg.list_size = *ov.list_size;
    if (ov.l_max) cfg.trunc.l_max = *ov.l_max;
    if (ov.tau_s) cfg.trunc.tau_s = *ov.tau_s;
    if (ov.tau_p) cfg.trunc.tau_p = *ov.tau_p;
    if (ov.delta) cfg.trunc.delta = *ov.delta;
    if (ov.delta_split) cfg.delta_split = *ov.delta_split;
    if (ov.tree_file) cfg.tree_file = *ov.tree_file;
    if (ov.design_snr_db) cfg.design_snr_db = *ov.design_snr_db;
    if (ov.prune_trials) cfg.prune_trials = *ov.prune_trials;
    if (ov.target_errors) cfg.target_errors = *ov.target_errors;
    if (ov.max_frames) cfg.max_frames = *ov.max_frames;
    if (ov.master_seed) cfg.master_seed = *ov.master_seed;
    if (ov.threads) cfg.threads = *ov.threads;
}

// ---------------------------------------------------------------------------
// Shared output helpers
// ---------------------------------------------------------------------------

std::string bits_to_string(const BinaryVector& v) {
    std::string s(v.size(), '0');
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v.get(i)) s[i] = '1';
    return s;
}

void write_records(const std::vector<SummaryRecord>& records, const std::string& format,
                   const std::string& out_path) {
    if (out_path.empty() || out_path == "-")
        emit_results(records, format, std::cout);
    else
        emit_results(records, format, out_path);
}

// ---------------------------------------------------------------------------
// decode: one frame from explicit LLRs
// ---------------------------------------------------------------------------

LlrVector read_llrs(const std::string& inline_values, const std::string& path) {
    std::vector<double> r;
    if (!inline_values.empty()) {
        std::stringstream ss(inline_values);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!token.empty()) r.push_back(std::stod(token));
    } else if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("llr file: cannot open '" + path + "'");
        double x;
        while (in >> x) r.push_back(x);
    }
    if (r.empty()) throw ConfigError("decode: no LLRs given (use --llr or --llr-file)");
    return r;
}

int run_decode(const ExperimentConfig& cfg, const LlrVector& r, bool as_json) {
    json out;
    if (cfg.decoder == DecoderKind::scl || cfg.decoder == DecoderKind::scl_gcd) {
        const PolarCode pc = build_polar(cfg.code);
        SclResult res;
        if (cfg.decoder == DecoderKind::scl) {
            res = scl_decode(r, pc, cfg.list_size);
        } else {
            if (cfg.tree_file.empty())
                throw ConfigError("decode: scl_gcd needs --tree (build one with `gcdec prune`)");
            res = scl_gcd_decode(r, load_tree(cfg.tree_file, pc), cfg.list_size);
        }
        out["queries"] = res.queries;
        out["used_fallback"] = res.used_fallback;
        json list = json::array();
        for (std::size_t i = 0; i < res.codewords.size(); ++i)
            list.push_back({{"metric", res.metrics[i]},
                            {"codeword", bits_to_string(res.codewords[i])},
                            {"message", bits_to_string(res.messages[i])},
                            {"crc_pass", res.crc_pass[i] != 0}});
        out["list"] = std::move(list);
    } else {
        const Code code = build_code(cfg.code);
        DecodeResult res;
        switch (cfg.decoder) {
            case DecoderKind::gcd:
                res = gcd_decode(r, code, cfg.list_size, cfg.trunc);
                break;
            case DecoderKind::parallel_gcd:
                res = parallel_gcd_decode(r, code, cfg.list_size, cfg.delta_split, cfg.trunc);
                break;
            case DecoderKind::gnd:
                res = gnd_decode(r, code, cfg.list_size,
                                 cfg.trunc.l_max ? cfg.trunc.l_max : std::uint64_t{1} << 24);
                break;
            case DecoderKind::esd:
                res = esd_decode(r, code, cfg.list_size);
                break;
            default:
                break;
        }
        out["queries"] = res.queries;
        out["stop"] = to_string(res.stop_reason);
        json list = json::array();
        for (const ListEntry& e : res.list)
            list.push_back({{"weight", e.weight}, {"codeword", bits_to_string(e.codeword)}});
        out["list"] = std::move(list);
    }

    if (as_json) {
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    if (out.contains("stop"))
        std::cout << "queries " << out["queries"].get<std::uint64_t>() << ", stop "
                  << out["stop"].get<std::string>() << "\n";
    else
        std::cout << "queries " << out["queries"].get<std::uint64_t>() << "\n";
    int rank = 1;
    for (const json& e : out["list"]) {
        std::cout << "  " << rank++ << ". "
                  << e[e.contains("weight") ? "weight" : "metric"].get<double>() << "  "
                  << e["codeword"].get<std::string>();
        if (e.contains("crc_pass") && !e["crc_pass"].get<bool>()) std::cout << "  (crc fail)";
        std::cout << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// fer / queries: Monte Carlo sweeps with different stdout tables
// ---------------------------------------------------------------------------

int run_sweep(const ExperimentConfig& cfg, const std::string& format,
              const std::string& out_path, bool query_table, bool verbose) {
    RunHooks hooks;
    if (verbose)
        hooks.on_point = [](const SummaryRecord& rec) {
            std::fprintf(stderr, "[%s] %s %.3g: fer %.4g (%llu/%llu frames)\n",
                         to_string(rec.decoder), to_string(rec.grid), rec.grid_value,
                         rec.top_fer, (unsigned long long)rec.top_errors,
                         (unsigned long long)rec.frames);
        };
    const std::vector<SummaryRecord> records = run_experiment(cfg, hooks);

    if (!out_path.empty()) {
        write_records(records, format, out_path);
    } else if (query_table) {
        std::printf("%10s %12s %8s %8s %8s %8s  stops(opt/lmax/ts/tp/exh)\n", "point",
                    "mean_q", "p50", "p90", "p99", "max");
        for (const SummaryRecord& rec : records)
            std::printf("%10.4g %12.2f %8llu %8llu %8llu %8llu  %llu/%llu/%llu/%llu/%llu\n",
                        rec.grid_value, rec.mean_queries,
                        (unsigned long long)rec.p50_queries, (unsigned long long)rec.p90_queries,
                        (unsigned long long)rec.p99_queries, (unsigned long long)rec.max_queries,
                        (unsigned long long)rec.stop_counts[0],
                        (unsigned long long)rec.stop_counts[1],
                        (unsigned long long)rec.stop_counts[2],
                        (unsigned long long)rec.stop_counts[3],
                        (unsigned long long)rec.stop_counts[4]);
    } else {
        std::printf("%10s %12s %12s %10s %10s %10s\n", "point", "top_fer", "list_fer",
                    "top_errs", "list_errs", "frames");
        for (const SummaryRecord& rec : records)
            std::printf("%10.4g %12.6g %12.6g %10llu %10llu %10llu\n", rec.grid_value,
                        rec.top_fer, rec.list_fer, (unsigned long long)rec.top_errors,
                        (unsigned long long)rec.list_errors, (unsigned long long)rec.frames);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soft-decision list decoding toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gcdec 0.1.0");

    // Common state shared by the subcommand lambdas.
    std::string config_path, out_path, format = "csv";
    Overrides ov;
    bool as_json = false, verbose = false;
    int exit_code = 0;

    auto experiment_cfg = [&]() {
        ExperimentConfig cfg = load_config(config_path);
        apply(ov, cfg);
        return cfg;
    };

    // decode ----------------------------------------------------------------
    std::string llr_inline, llr_file;
    CLI::App* decode = app.add_subcommand("decode", "decode one frame from explicit LLRs");
    decode->add_option("-c,--config", config_path, "JSON config file");
    add_code_flags(*decode, ov);
    add_decoder_flags(*decode, ov);
    decode->add_option("--llr", llr_inline, "comma-separated channel LLRs");
    decode->add_option("--llr-file", llr_file, "whitespace-separated LLR file");
    decode->add_flag("--json", as_json, "machine-readable output");
    decode->callback([&] {
        exit_code = run_decode(experiment_cfg(), read_llrs(llr_inline, llr_file), as_json);
    });

    // fer / queries -----------------------------------------------------------
    for (const bool query_table : {false, true}) {
        CLI::App* sweep = app.add_subcommand(
            query_table ? "queries" : "fer",
            query_table ? "Monte Carlo sweep reporting query statistics"
                        : "Monte Carlo sweep reporting frame error rates");
        sweep->add_option("-c,--config", config_path, "JSON config file");
        add_code_flags(*sweep, ov);
        add_decoder_flags(*sweep, ov);
        add_run_flags(*sweep, ov);
        sweep->add_option("-o,--out", out_path, "write the full summary to this file");
        sweep->add_option("--format", format, "csv or jsonl")
            ->check(CLI::IsMember({"csv", "jsonl"}));
        sweep->add_flag("-v,--verbose", verbose, "stream per-point progress to stderr");
        sweep->callback(
            [&, query_table] {
                exit_code = run_sweep(experiment_cfg(), format, out_path, query_table, verbose);
            });
    }

    // ccdf --------------------------------------------------------------------
    std::string ccdf_kind = "D", method = "saddlepoint";
    std::size_t ccdf_k = 16;
    double ccdf_snr = 4.0;
    std::optional<double> ccdf_bsc;
    std::vector<double> thresholds;
    std::uint64_t trials = 10000, seed = 1;
    CLI::App* ccdf_cmd =
        app.add_subcommand("ccdf", "tail probability curve of D or the noise soft weight");
    ccdf_cmd->add_option("-k", ccdf_k, "partial pattern length K")->required();
    ccdf_cmd->add_option("--kind", ccdf_kind, "D or gamma")
        ->check(CLI::IsMember({"D", "gamma"}));
    ccdf_cmd->add_option("--snr", ccdf_snr, "AWGN SNR in dB (direct convention)");
    ccdf_cmd->add_option("--bsc", ccdf_bsc, "use a BSC with this crossover instead");
    ccdf_cmd->add_option("--thresholds", thresholds, "curve grid")->required();
    ccdf_cmd->add_option("--trials", trials, "Monte Carlo draws");
    ccdf_cmd->add_option("--seed", seed, "RNG seed");
    ccdf_cmd->add_option("--method", method, "exact or saddlepoint")
        ->check(CLI::IsMember({"exact", "saddlepoint"}));
    ccdf_cmd->add_option("-o,--out", out_path, "CSV output path (default stdout)");
    ccdf_cmd->callback([&] {
        const ChannelSpec ch =
            ccdf_bsc ? ChannelSpec::bsc(*ccdf_bsc) : ChannelSpec::awgn_snr_direct(ccdf_snr);
        const CcdfCurve curve =
            ccdf(ccdf_kind == "D" ? CcdfKind::D : CcdfKind::Gamma, ccdf_k, ch, thresholds,
                 trials, seed,
                 method == "exact" ? CcdfMethod::exact : CcdfMethod::saddlepoint);
        if (out_path.empty() || out_path == "-") {
            write_ccdf_csv(std::cout, curve);
        } else {
            std::ofstream out(out_path);
            if (!out) throw IoError("ccdf: cannot open '" + out_path + "'");
            write_ccdf_csv(out, curve);
        }
    });

    // prune ---------------------------------------------------------------
    std::size_t prune_L = 8, prune_trials = 300, final_list = 1;
    std::uint64_t leaf_l_max = 0, prune_seed = 1;
    double design_ebn0 = 2.5;
    CLI::App* prune = app.add_subcommand("prune", "build a complexity-pruned decoding tree");
    prune->add_option("-c,--config", config_path, "JSON config file");
    add_code_flags(*prune, ov);
    prune->add_option("-L,--list-size", prune_L, "list size the tree is pruned for");
    prune->add_option("--ebn0", design_ebn0, "design point in Eb/N0 dB");
    prune->add_option("--trials", prune_trials, "genie trials per pruning decision");
    prune->add_option("--seed", prune_seed, "pruning RNG seed");
    prune->add_option("--leaf-l-max", leaf_l_max, "query budget stamped into guessing leaves");
    prune->add_option("--final-list-size", final_list, "list size of the last leaf");
    prune->add_option("-o,--out", out_path, "tree file to write");
    prune->callback([&] {
        ExperimentConfig cfg = experiment_cfg();
        cfg.code.kind = CodeSpec::Kind::polar;
        const PolarCode pc = build_polar(cfg.code);
        const double rate = static_cast<double>(pc.k) / static_cast<double>(pc.n);
        PruneOptions opts;
        opts.leaf_l_max = leaf_l_max;
        opts.final_list_size = final_list;
        const PolarTree tree = prune_tree(pc, prune_L, ChannelSpec::awgn_from_snr_db(design_ebn0, rate),
                                          prune_trials, prune_seed, opts);
        std::printf("# %zu leaves, %.1f pruned time steps vs %zu scl\n",
                    tree.leaf_indices().size(), pruned_time_steps(tree, prune_L),
                    scl_time_steps(pc));
        std::printf("%8s %6s %6s %6s %8s %8s\n", "start", "len", "k", "mode", "L_i", "l_avg");
        for (const std::size_t idx : tree.leaf_indices()) {
            const TreeNode& node = tree.nodes[idx];
            std::printf("%8zu %6zu %6zu %6s %8zu %8.2f\n", node.start, node.len, node.k,
                        to_string(node.mode), node.list_size, node.l_avg);
        }
        if (!out_path.empty()) save_tree(tree, out_path);
    });

    // latency ----------------------------------------------------------------
    std::string tree_path;
    std::vector<double> l_avg_override;
    CLI::App* latency = app.add_subcommand("latency", "decoding time-step model");
    latency->add_option("-c,--config", config_path, "JSON config file");
    add_code_flags(*latency, ov);
    latency->add_option("-L,--list-size", prune_L, "list size");
    latency->add_option("--tree", tree_path, "pruned tree file (adds the pruned row)");
    latency->add_option("--l-avg", l_avg_override,
                        "mean query estimate per guessing leaf, left to right (tree files do "
                        "not persist estimates; omit for the zero-query floor)");
    latency->callback([&] {
        ExperimentConfig cfg = experiment_cfg();
        cfg.code.kind = CodeSpec::Kind::polar;
        const PolarCode pc = build_polar(cfg.code);
        std::printf("scl     %zu\n", scl_time_steps(pc));
        if (!tree_path.empty()) {
            const PolarTree tree = load_tree(tree_path, pc);
            std::vector<double> per_leaf;
            if (!l_avg_override.empty()) {
                // Expand the per-guessing-leaf values to the full leaf list.
                std::size_t next = 0;
                for (const std::size_t idx : tree.leaf_indices()) {
                    const bool guessing = tree.nodes[idx].mode == NodeMode::gcd_leaf;
                    if (guessing && next >= l_avg_override.size())
                        throw ConfigError("latency: --l-avg needs one value per gcd leaf");
                    per_leaf.push_back(guessing ? l_avg_override[next++] : 0.0);
                }
            }
            std::printf("pruned  %.2f\n", pruned_time_steps(tree, prune_L, per_leaf));
        }
    });

    // construct ---------------------------------------------------------------
    CLI::App* construct = app.add_subcommand("construct", "build a code and save G/H");
    construct->add_option("-c,--config", config_path, "JSON config file");
    add_code_flags(*construct, ov);
    construct->add_option("-o,--out", out_path, "code file to write")->required();
    construct->callback([&] {
        ExperimentConfig cfg = experiment_cfg();
        const Code code = build_code(cfg.code);
        save_code(code, out_path);
        std::printf("%s: [%zu,%zu] written to %s\n", code.name.c_str(), code.n, code.k,
                    out_path.c_str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // --help/--version exit 0, bad flags exit 1
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return exit_code;
}
