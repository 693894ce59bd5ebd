#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcdec/errors.hpp"
#include "gcdec/sim.hpp"
#include "json.hpp"

using namespace gcdec;

namespace {

ExperimentConfig small_gcd_config() {
    ExperimentConfig cfg;
    cfg.code.kind = CodeSpec::Kind::rm;
    cfg.code.m = 4;
    cfg.code.r = 2;
    cfg.grid = GridKind::ebn0;
    cfg.grid_points = {2.0, 4.0};
    cfg.decoder = DecoderKind::gcd;
    cfg.list_size = 2;
    cfg.target_errors = 40;
    cfg.max_frames = 4000;
    cfg.master_seed = 77;
    return cfg;
}

std::string render_csv(const std::vector<SummaryRecord>& recs) {
    std::ostringstream out;
    emit_results(recs, "csv", out);
    return out.str();
}

}  // namespace

TEST_CASE("enum conversions roundtrip") {
    for (DecoderKind kind : {DecoderKind::gcd, DecoderKind::parallel_gcd, DecoderKind::gnd,
                             DecoderKind::esd, DecoderKind::scl, DecoderKind::scl_gcd})
        CHECK(decoder_kind_from_string(to_string(kind)) == kind);
    for (GridKind kind : {GridKind::ebn0, GridKind::direct, GridKind::bsc})
        CHECK(grid_kind_from_string(to_string(kind)) == kind);
    for (CodeSpec::Kind kind : {CodeSpec::Kind::hamming, CodeSpec::Kind::rm, CodeSpec::Kind::random,
                                CodeSpec::Kind::file, CodeSpec::Kind::polar})
        CHECK(code_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(decoder_kind_from_string("nope"), ConfigError);
    CHECK_THROWS_AS(grid_kind_from_string(""), ConfigError);
    CHECK_THROWS_AS(code_kind_from_string("polar2"), ConfigError);
}

TEST_CASE("code builders") {
    CodeSpec spec;
    spec.kind = CodeSpec::Kind::rm;
    spec.m = 4;
    spec.r = 2;
    CHECK(build_code(spec).name == "rm(4,2)");

    spec.kind = CodeSpec::Kind::random;
    spec.n = 12;
    spec.k = 6;
    spec.seed = 77;
    CHECK(build_code(spec).name == "random[12,6]#77");

    spec.kind = CodeSpec::Kind::polar;
    spec.m = 5;
    spec.k = 12;
    spec.crc11 = true;
    const PolarCode pc = build_polar(spec);
    CHECK(pc.n == 32);
    CHECK(pc.k == 12);
    CHECK(pc.info_bits() == 23);
    CHECK(build_code(spec).k == 23);  // flat view includes the CRC bits

    spec.k = 30;  // 30 + 11 > 32
    CHECK_THROWS_AS(build_polar(spec), ConfigError);
    spec.kind = CodeSpec::Kind::rm;
    spec.m = 3;
    spec.r = 9;
    CHECK_THROWS_AS(build_code(spec), ConfigError);
    spec.kind = CodeSpec::Kind::file;
    spec.path = "missing_code_file.txt";
    CHECK_THROWS_AS(build_code(spec), Error);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = small_gcd_config();
    CHECK_NOTHROW(validate(cfg));

    cfg.grid_points.clear();
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_gcd_config();
    cfg.list_size = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_gcd_config();
    cfg.threads = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_gcd_config();
    cfg.max_frames = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = small_gcd_config();
    cfg.grid = GridKind::bsc;
    cfg.grid_points = {0.7};  // crossover must stay below 1/2
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);

    // esd is guarded against large dimensions at config time.
    cfg = small_gcd_config();
    cfg.decoder = DecoderKind::esd;
    cfg.code.kind = CodeSpec::Kind::random;
    cfg.code.n = 60;
    cfg.code.k = 30;
    cfg.grid = GridKind::ebn0;
    cfg.grid_points = {2.0};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("experiments are reproducible across thread counts") {
    ExperimentConfig cfg = small_gcd_config();
    cfg.threads = 1;
    const auto single = run_experiment(cfg);
    cfg.threads = 4;
    const auto quad = run_experiment(cfg);
    CHECK(render_csv(single) == render_csv(quad));

    // And across repeated runs.
    const auto again = run_experiment(cfg);
    CHECK(render_csv(quad) == render_csv(again));

    REQUIRE(single.size() == 2);
    CHECK(single[0].frames > 0);
    CHECK(single[0].list_fer >= single[1].list_fer);  // higher SNR, fewer errors
}

TEST_CASE("hooks stream records as points finish") {
    ExperimentConfig cfg = small_gcd_config();
    std::vector<double> seen;
    RunHooks hooks;
    hooks.on_point = [&seen](const SummaryRecord& rec) { seen.push_back(rec.grid_value); };
    const auto recs = run_experiment(cfg, hooks);
    CHECK(seen == std::vector<double>{2.0, 4.0});
    CHECK(recs.size() == 2);
}

TEST_CASE("quiet channel decodes everything") {
    ExperimentConfig cfg = small_gcd_config();
    cfg.grid = GridKind::direct;
    cfg.grid_points = {20.0};
    cfg.list_size = 1;  // the L = 1 stop fires after the first (empty) query
    cfg.max_frames = 500;
    cfg.target_errors = 1u << 30;
    const auto recs = run_experiment(cfg);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].frames == 500);
    CHECK(recs[0].list_errors == 0);
    CHECK(recs[0].top_errors == 0);
    CHECK(recs[0].genie_misses == 0);
    CHECK(recs[0].mean_queries == 1.0);  // the empty pattern wins immediately
}

TEST_CASE("stop reason accounting is exhaustive") {
    ExperimentConfig cfg = small_gcd_config();
    cfg.grid_points = {2.0};
    cfg.max_frames = 300;
    cfg.target_errors = 1u << 30;
    cfg.trunc.l_max = 8;
    const auto recs = run_experiment(cfg);
    REQUIRE(recs.size() == 1);
    std::uint64_t total = 0;
    for (std::uint64_t c : recs[0].stop_counts) total += c;
    CHECK(total == recs[0].frames);
    CHECK(recs[0].stop_counts[static_cast<int>(StopReason::l_max)] > 0);
}

TEST_CASE("csv and jsonl emission") {
    ExperimentConfig cfg = small_gcd_config();
    cfg.grid_points = {3.0};
    cfg.max_frames = 200;
    cfg.target_errors = 50;
    const auto recs = run_experiment(cfg);

    const std::string csv = render_csv(recs);
    CHECK(csv.rfind(kSummaryCsvHeader, 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one record

    // Empty inputs: csv keeps the header, jsonl is empty.
    CHECK(render_csv({}) == std::string(kSummaryCsvHeader) + "\n");
    std::ostringstream empty_jsonl;
    emit_results({}, "jsonl", empty_jsonl);
    CHECK(empty_jsonl.str().empty());

    std::ostringstream bad;
    CHECK_THROWS_AS(emit_results(recs, "parquet", bad), ConfigError);

    // jsonl parses back with identical fields.
    std::ostringstream out;
    emit_results(recs, "jsonl", out);
    const auto obj = nlohmann::json::parse(out.str());
    CHECK(obj.at("code") == recs[0].code_name);
    CHECK(obj.at("decoder") == "gcd");
    CHECK(obj.at("grid") == "ebn0");
    CHECK(obj.at("grid_value") == 3.0);
    CHECK(obj.at("frames") == recs[0].frames);
    CHECK(obj.at("list_errors") == recs[0].list_errors);
    CHECK(obj.at("list_fer") == recs[0].list_fer);
    CHECK(obj.at("mean_queries") == recs[0].mean_queries);
    CHECK(obj.at("p99_queries") == recs[0].p99_queries);
    CHECK(obj.at("stop_optimal") == recs[0].stop_counts[0]);
    CHECK(obj.at("genie_misses") == recs[0].genie_misses);

    // Path overload writes the same bytes and reports unwritable targets.
    const std::string path = "test_sim_out.csv";
    emit_results(recs, "csv", path);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == csv);
    std::remove(path.c_str());
    CHECK_THROWS_AS(emit_results(recs, "csv", "no_such_dir/out.csv"), IoError);
}

TEST_CASE("gnd budget exhaustion counts as an error frame") {
    ExperimentConfig cfg;
    cfg.code.kind = CodeSpec::Kind::hamming;
    cfg.code.m = 3;
    cfg.grid = GridKind::bsc;
    cfg.grid_points = {0.2};
    cfg.decoder = DecoderKind::gnd;
    cfg.list_size = 2;
    cfg.trunc.l_max = 4;  // frequently too small for two codewords
    cfg.max_frames = 400;
    cfg.target_errors = 1u << 30;
    cfg.master_seed = 5;
    const auto recs = run_experiment(cfg);
    REQUIRE(recs.size() == 1);
    const std::uint64_t exhausted = recs[0].stop_counts[static_cast<int>(StopReason::l_max)];
    CHECK(exhausted > 0);
    CHECK(recs[0].list_errors >= exhausted);
    CHECK(recs[0].max_queries <= 4);
}

TEST_CASE("tree decoders run end to end on a small polar code") {
    ExperimentConfig cfg;
    cfg.code.kind = CodeSpec::Kind::polar;
    cfg.code.m = 6;
    cfg.code.k = 32;
    cfg.code.crc11 = true;
    cfg.grid = GridKind::ebn0;
    cfg.grid_points = {3.0};
    cfg.list_size = 4;
    cfg.max_frames = 400;
    cfg.target_errors = 1u << 30;
    cfg.master_seed = 9;
    cfg.threads = 2;

    cfg.decoder = DecoderKind::scl;
    const auto scl = run_experiment(cfg);
    REQUIRE(scl.size() == 1);
    // 2n - 2 + active leaves, constant across frames.
    const double scl_steps = 2.0 * 64 - 2 + 43;
    CHECK(scl[0].mean_time_steps == scl_steps);

    cfg.decoder = DecoderKind::scl_gcd;
    cfg.trunc.l_max = 64;
    cfg.design_snr_db = 3.0;
    cfg.prune_trials = 200;
    const auto gcd = run_experiment(cfg);
    REQUIRE(gcd.size() == 1);
    CHECK(gcd[0].frames == scl[0].frames);
    CHECK(gcd[0].mean_time_steps < scl_steps);  // pruning must pay off
    CHECK(gcd[0].mean_queries < 500);

    // Comparable quality on this easy operating point.
    const double diff = std::fabs(gcd[0].top_fer - scl[0].top_fer);
    CHECK(diff <= 0.05);

    // An explicit tree through the hooks bypasses pruning and reproduces the
    // stored-tree code path.
    const PolarCode pc = build_polar(cfg.code);
    PruneOptions opts;
    opts.leaf_l_max = 64;
    const PolarTree tree =
        prune_tree(pc, 4, ChannelSpec::awgn_from_snr_db(3.0, 32.0 / 64.0), 200,
                   cfg.master_seed ^ 0x7072756e65ull, opts);
    RunHooks hooks;
    hooks.tree = &tree;
    const auto via_hooks = run_experiment(cfg, hooks);
    CHECK(render_csv(via_hooks) == render_csv(gcd));

    // The same tree via a file behaves identically.
    const std::string path = "test_sim_tree.txt";
    save_tree(tree, path);
    cfg.tree_file = path;
    const auto via_file = run_experiment(cfg);
    CHECK(render_csv(via_file) == render_csv(gcd));
    std::remove(path.c_str());
}
