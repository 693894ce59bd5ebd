#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcdec/channel.hpp"
#include "gcdec/codes.hpp"
#include "gcdec/decoders.hpp"
#include "gcdec/polar.hpp"

namespace gcdec {

enum class DecoderKind { gcd, parallel_gcd, gnd, esd, scl, scl_gcd };
const char* to_string(DecoderKind kind);
DecoderKind decoder_kind_from_string(const std::string& name);  // throws ConfigError

// How grid values map to a channel: ebn0 = AWGN with sigma2 = 1/(2 R 10^(x/10))
// (needs the code rate), direct = AWGN with sigma2 = 10^(-x/10), bsc reads the
// grid value as the crossover probability.
enum class GridKind { ebn0, direct, bsc };
const char* to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);  // throws ConfigError

// One code source: `kind` selects which parameters matter.
struct CodeSpec {
    enum class Kind { hamming, rm, random, file, polar };

    Kind kind = Kind::hamming;
    std::size_t m = 3;           // hamming: parity bits; rm/polar: log2 length
    std::size_t r = 1;           // rm: order
    std::size_t n = 0;           // random: length
    std::size_t k = 0;           // random/polar: message bits (CRC excluded)
    std::uint64_t seed = 1;      // random: construction seed
    std::string path;            // file: code file; polar: reliability order file
    bool crc11 = false;          // polar: attach CRC-11
    std::size_t reallocate = 0;  // polar: balanced active/frozen swap count
};
const char* to_string(CodeSpec::Kind kind);
CodeSpec::Kind code_kind_from_string(const std::string& name);  // throws ConfigError

// Builders throw ConfigError with the offending field in the message.
Code build_code(const CodeSpec& spec);        // any kind; polar yields the CRC-free code
PolarCode build_polar(const CodeSpec& spec);  // polar kind only

struct ExperimentConfig {
    CodeSpec code;
    GridKind grid = GridKind::ebn0;
    std::vector<double> grid_points;  // SNR dB, or BSC crossover probabilities

    DecoderKind decoder = DecoderKind::gcd;
    std::size_t list_size = 1;
    TruncationConfig trunc;       // flat decoders; l_max also stamps pruned gcd leaves
    std::size_t delta_split = 0;  // parallel_gcd branch split exponent

    std::string tree_file;        // scl_gcd: persisted tree; empty = prune below
    double design_snr_db = NAN;   // scl_gcd pruning channel; NAN = first grid point
    std::size_t prune_trials = 300;

    std::uint64_t target_errors = 100;  // per-point stop once this many frame errors
    std::uint64_t max_frames = 1000000;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
};

// Field-level sanity checks that need no code construction.  run_experiment
// calls this and adds the checks that depend on the built code (e.g. esd k).
void validate(const ExperimentConfig& cfg);  // throws ConfigError

struct SummaryRecord {
    std::string code_name;
    DecoderKind decoder = DecoderKind::gcd;
    GridKind grid = GridKind::ebn0;
    double grid_value = 0.0;     // SNR dB or BSC crossover
    double channel_param = 0.0;  // realised sigma2 (AWGN) or p (BSC)

    std::uint64_t frames = 0;
    std::uint64_t list_errors = 0;  // transmitted codeword absent from the list
    std::uint64_t top_errors = 0;   // best-ranked entry != transmitted codeword
    double list_fer = 0.0;
    double top_fer = 0.0;

    double mean_queries = 0.0;
    std::uint64_t p50_queries = 0;  // nearest-rank percentiles over frames
    std::uint64_t p90_queries = 0;
    std::uint64_t p99_queries = 0;
    std::uint64_t max_queries = 0;

    double mean_time_steps = 0.0;  // tree decoders only; 0 for the flat decoders

    std::array<std::uint64_t, 5> stop_counts{};  // indexed by StopReason value
    std::uint64_t fallbacks = 0;     // scl_gcd frames decided by the fallback path
    std::uint64_t genie_misses = 0;  // frames whose true pattern was never queried
};

struct RunHooks {
    std::function<void(const SummaryRecord&)> on_point;  // streamed per grid point
    const PolarTree* tree = nullptr;  // scl_gcd: decode over this tree as-is
};

// Monte Carlo sweep over cfg.grid_points, one SummaryRecord per point.  Every
// frame is a pure function of (master_seed, frame index), frames are scanned
// in index order, and a point stops after target_errors errors of the
// decoder's own kind (top-rank errors for scl/scl_gcd, list errors otherwise)
// or max_frames — so results are byte-identical for any thread count.
// A gnd decode that exhausts its budget (trunc.l_max) counts as an error frame
// that consumed the whole budget.  Throws ConfigError on invalid configs.
std::vector<SummaryRecord> run_experiment(const ExperimentConfig& cfg, const RunHooks& hooks = {});

// csv: one fixed header line (see kSummaryCsvHeader) + one line per record.
// jsonl: one flat object per record, same field names, no header.
// Unknown format names throw ConfigError; the path overload throws IoError
// when the file cannot be opened or written.
extern const char* const kSummaryCsvHeader;
void emit_results(const std::vector<SummaryRecord>& records, const std::string& format,
                  std::ostream& out);
void emit_results(const std::vector<SummaryRecord>& records, const std::string& format,
                  const std::string& path);

}  // namespace gcdec
