// Microbenchmarks for the hot paths: ordered pattern generation, flat list
// decoding, and tree decoding of a polar code.  Frames are drawn once per
// benchmark and cycled so the timed region contains decoding work only.

#include <benchmark/benchmark.h>

#include <vector>

#include "gcdec/channel.hpp"
#include "gcdec/codes.hpp"
#include "gcdec/decoders.hpp"
#include "gcdec/polar.hpp"
#include "gcdec/rng.hpp"
#include "gcdec/tepgen.hpp"

using namespace gcdec;

namespace {

std::vector<LlrVector> draw_frames(const Code& code, const ChannelSpec& ch, std::size_t count,
                                   std::uint64_t seed) {
    std::vector<LlrVector> frames;
    frames.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        Rng rng = rng_for_frame(seed, f);
        BinaryVector msg(code.k);
        for (std::size_t i = 0; i < code.k; ++i)
            if (rng.next_bit()) msg.set(i, true);
        frames.push_back(ch.llr(ch.transmit(code.encode(msg), rng)));
    }
    return frames;
}

// Pops per second of the ordered generator at a given pattern length.
void BM_TepGeneration(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    const std::uint64_t pops = 4096;
    Rng rng(42);
    LlrVector r(k);
    for (auto& x : r) x = rng.next_gaussian();

    for (auto _ : state) {
        TepGenerator gen(r);
        double sink = 0.0;
        for (std::uint64_t i = 0; i < pops && gen.has_next(); ++i) sink += gen.next().weight;
        benchmark::DoNotOptimize(sink);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(pops));
}
BENCHMARK(BM_TepGeneration)->Arg(16)->Arg(42)->Arg(128);

// Flat decoding of RM[64,42] at a realistic operating point.
void BM_GcdDecode(benchmark::State& state) {
    const std::size_t L = static_cast<std::size_t>(state.range(0));
    const Code code = rm_code(6, 3);
    const SystematizedCode ctx = SystematizedCode::build(code);
    const auto frames =
        draw_frames(code, ChannelSpec::awgn_from_snr_db(3.0, 42.0 / 64.0), 256, 7);

    std::size_t f = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gcd_decode(frames[f], ctx, L).queries);
        f = (f + 1) % frames.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GcdDecode)->Arg(1)->Arg(4);

// Exhaustive baseline on the same code family but a small dimension.
void BM_EsdDecode(benchmark::State& state) {
    const Code code = rm_code(4, 2);
    const SystematizedCode ctx = SystematizedCode::build(code);
    const auto frames =
        draw_frames(code, ChannelSpec::awgn_from_snr_db(3.0, 11.0 / 16.0), 256, 8);

    std::size_t f = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(esd_decode(frames[f], ctx, 4).queries);
        f = (f + 1) % frames.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EsdDecode);

// One-time systematisation cost (the per-frame Gaussian elimination a
// conventional most-reliable-basis decoder would pay).
void BM_Systematize(benchmark::State& state) {
    const Code code = random_code(128, 64, 3);
    for (auto _ : state) benchmark::DoNotOptimize(SystematizedCode::build(code).p_cols.size());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Systematize);

// Tree decoding of the CRC-aided [128, 64] polar code, conventional vs pruned.
void BM_PolarDecode(benchmark::State& state) {
    const bool pruned = state.range(0) != 0;
    const std::size_t L = 8;
    const PolarCode pc = construct_polar(128, 64, {}, CrcSpec::crc11());
    const ChannelSpec ch = ChannelSpec::awgn_from_snr_db(3.0, 0.5);
    const Code outer = polar_to_code(pc);
    const auto frames = draw_frames(outer, ch, 256, 9);

    PruneOptions opts;
    opts.leaf_l_max = 100;
    const PolarTree tree = prune_tree(pc, L, ch, 300, 1, opts);
    const TreeDecoder decoder(tree, L);

    std::size_t f = 0;
    for (auto _ : state) {
        if (pruned)
            benchmark::DoNotOptimize(decoder.decode(frames[f]).queries);
        else
            benchmark::DoNotOptimize(scl_decode(frames[f], pc, L).queries);
        f = (f + 1) % frames.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PolarDecode)->ArgName("pruned")->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
