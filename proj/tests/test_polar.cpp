#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "gcdec/errors.hpp"
#include "gcdec/polar.hpp"
#include "gcdec/rng.hpp"
#include "oracles.hpp"

using namespace gcdec;

namespace {

BinaryVector random_word(std::size_t n, Rng& rng) {
    BinaryVector v(n);
    for (std::size_t i = 0; i < n; ++i)
        if (rng.next_bit()) v.set(i, true);
    return v;
}

LlrVector noisy_llrs(const BinaryVector& cw, double sigma2, Rng& rng) {
    LlrVector r(cw.size());
    for (std::size_t i = 0; i < cw.size(); ++i) {
        const double x = cw.get(i) ? -1.0 : 1.0;
        r[i] = 2.0 * (x + std::sqrt(sigma2) * rng.next_gaussian()) / sigma2;
    }
    return r;
}

}  // namespace

TEST_CASE("arikan matrix is the kernel power and an involution") {
    for (std::size_t m = 0; m <= 6; ++m) {
        const BinaryMatrix g = arikan_matrix(m);
        const auto dense = oracle::kronecker(m);
        REQUIRE(g.rows() == dense.size());
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j)
                CHECK(static_cast<int>(g.get(i, j)) == dense[i][j]);

        // Self-inverse: G * G = I over GF(2).
        const BinaryMatrix sq = g.mul(g);
        for (std::size_t i = 0; i < sq.rows(); ++i)
            for (std::size_t j = 0; j < sq.cols(); ++j)
                CHECK(sq.get(i, j) == (i == j));
    }

    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t m = 1 + rng.next_below(6);
        const BinaryVector x = random_word(std::size_t{1} << m, rng);
        const BinaryVector via_butterfly = polar_transform(x);
        // Row-vector convention: y = x * G, i.e. G^T applied to a column.
        CHECK(via_butterfly == arikan_matrix(m).transposed().mul_vector(x));
        CHECK(polar_transform(via_butterfly) == x);  // involution
    }
    CHECK_THROWS_AS(polar_transform(BinaryVector(3)), InvalidParam);
}

TEST_CASE("polarization-weight order") {
    // w(i) = sum_j b_j(i) 2^(j/4), increasing reliability.  For n = 8 the
    // resulting active set of a [8,4] construction is {3, 5, 6, 7}.
    const auto order = pw_order(3);
    REQUIRE(order.size() == 8);
    auto weight = [](std::size_t i) {
        double w = 0.0;
        for (int j = 0; j < 20; ++j)
            if ((i >> j) & 1u) w += std::pow(2.0, j / 4.0);
        return w;
    };
    for (std::size_t a = 1; a < order.size(); ++a)
        CHECK(weight(order[a - 1]) <= weight(order[a]));

    const PolarCode pc = construct_polar(8, 4);
    CHECK(pc.active == std::vector<std::size_t>{3, 5, 6, 7});
    CHECK(pc.frozen == std::vector<std::size_t>{0, 1, 2, 4});
}

TEST_CASE("construction, encoding, and the frozen-column parity check") {
    Rng rng(52);
    for (std::size_t m : {std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
        const std::size_t n = std::size_t{1} << m;
        const std::size_t k = n / 2;
        const PolarCode pc = construct_polar(n, k);
        CHECK(pc.n == n);
        CHECK(pc.k == k);
        CHECK(pc.info_bits() == k);
        CHECK(pc.h.rows() == n - k);
        CHECK(pc.h.rank() == n - k);

        for (int trial = 0; trial < 8; ++trial) {
            const BinaryVector msg = random_word(k, rng);
            const BinaryVector cw = polar_encode(pc, msg);
            CHECK(syndrome(pc.h, cw).weight() == 0);

            // Invert the involution: u = c * G recovers message bits on the
            // active positions and zeros on the frozen ones.
            const BinaryVector u = polar_transform(cw);
            std::size_t next = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (pc.is_active.get(i))
                    CHECK(u.get(i) == msg.get(next++));
                else
                    CHECK_FALSE(u.get(i));
            }
        }
    }
    CHECK_THROWS_AS(construct_polar(12, 4), InvalidParam);
    CHECK_THROWS_AS(construct_polar(8, 9), CapacityExceeded);
    CHECK_THROWS_AS(construct_polar(8, 4, {0, 1, 2, 3, 4, 5, 6, 6}), InvalidParam);
}

TEST_CASE("crc embedding") {
    const CrcSpec crc = CrcSpec::crc11();
    const PolarCode pc = construct_polar(64, 20, {}, crc);
    CHECK(pc.k == 20);
    CHECK(pc.info_bits() == 31);
    CHECK_THROWS_AS(construct_polar(16, 6, {}, crc), CapacityExceeded);

    Rng rng(53);
    const BinaryVector msg = random_word(20, rng);
    const BinaryVector cw = polar_encode(pc, msg);
    const BinaryVector u = polar_transform(cw);

    // The active positions carry message || CRC remainder in ascending order.
    std::vector<std::uint8_t> bits(20);
    for (std::size_t i = 0; i < 20; ++i) bits[i] = msg.get(i);
    const auto expect = crc_attach(bits, crc);
    for (std::size_t i = 0; i < pc.active.size(); ++i)
        CHECK(u.get(pc.active[i]) == static_cast<bool>(expect[i]));
    CHECK(crc_check(expect, crc));
}

TEST_CASE("flat code view and subcodes") {
    const PolarCode pc = construct_polar(32, 12, {}, CrcSpec::crc11());
    const Code flat = polar_to_code(pc);
    CHECK(flat.n == 32);
    CHECK(flat.k == 23);  // info bits incl. CRC; the CRC constraint is not in g
    Rng rng(54);
    const BinaryVector msg = random_word(pc.k, rng);
    CHECK(syndrome(flat.h, polar_encode(pc, msg)).weight() == 0);

    // Subcode of an aligned span: dimensions follow the local active counts.
    for (std::size_t len : {std::size_t{4}, std::size_t{8}, std::size_t{16}}) {
        for (std::size_t start = 0; start < 32; start += len) {
            const Code sub = polar_subcode(pc, start, len);
            std::size_t k_v = 0;
            for (std::size_t i = start; i < start + len; ++i)
                if (pc.is_active.get(i)) ++k_v;
            CHECK(sub.n == len);
            CHECK(sub.k == k_v);
            CHECK(sub.h.rows() == len - k_v);
        }
    }
    CHECK_THROWS_AS(polar_subcode(pc, 3, 4), InvalidParam);   // unaligned
    CHECK_THROWS_AS(polar_subcode(pc, 0, 12), InvalidParam);  // not a power of two
}

TEST_CASE("successive-cancellation kernels") {
    CHECK(f_update(2.0, -3.0) == -2.0);
    CHECK(f_update(-1.5, -4.0) == 1.5);
    CHECK(f_update(0.5, 2.0) == 0.5);
    CHECK(g_update(2.0, 3.0, true) == 1.0);
    CHECK(g_update(2.0, 3.0, false) == 5.0);

    BinaryVector left(1), right(1);
    right.set(0, true);
    const BinaryVector parent = beta_combine(left, right);
    REQUIRE(parent.size() == 2);
    CHECK(parent.get(0));  // left xor right
    CHECK(parent.get(1));  // right
    CHECK_THROWS_AS(beta_combine(BinaryVector(2), BinaryVector(4)), DimensionMismatch);
}

TEST_CASE("scl path metrics are disagreement soft weights") {
    Rng rng(55);
    const PolarCode pc = construct_polar(16, 8);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryVector msg = random_word(8, rng);
        const BinaryVector cw = polar_encode(pc, msg);
        const LlrVector r = noisy_llrs(cw, 0.5, rng);
        const BinaryVector z = hard_decision(r);

        const SclResult res = scl_decode(r, pc, 4);
        REQUIRE(res.codewords.size() == 4);
        for (std::size_t i = 0; i < res.codewords.size(); ++i) {
            CHECK(syndrome(pc.h, res.codewords[i]).weight() == 0);
            const double gamma = soft_weight(res.codewords[i] ^ z, r);
            CHECK(std::fabs(res.metrics[i] - gamma) <= 1e-9 * (1.0 + gamma));
            if (i > 0) CHECK(res.metrics[i] >= res.metrics[i - 1]);
            // messages re-encode to the listed codeword
            CHECK(polar_encode(pc, res.messages[i]) == res.codewords[i]);
        }
    }
}

TEST_CASE("full-size list enumerates the whole codebook") {
    const PolarCode pc = construct_polar(8, 4);
    Rng rng(56);
    const BinaryVector cw = polar_encode(pc, random_word(4, rng));
    const LlrVector r = noisy_llrs(cw, 0.8, rng);

    const SclResult res = scl_decode(r, pc, 16);
    REQUIRE(res.codewords.size() == 16);
    const Code flat = polar_to_code(pc);
    const auto weights = oracle::codeword_weights(flat, r);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < 16; ++i) {
        seen.insert(res.codewords[i].to_string());
        CHECK(std::fabs(res.metrics[i] - weights[i]) <= 1e-9 * (1.0 + weights[i]));
    }
    CHECK(seen.size() == 16);  // all distinct -> the full codebook
}

TEST_CASE("guessing leaf extension matches the exhaustive one") {
    // Same incoming paths, same subcode: the retained candidate set of the
    // rank-synchronised guessing pass equals the L_i best of the exhaustive
    // pass, with bitwise-identical metrics.
    Rng rng(57);
    const PolarCode pc = construct_polar(32, 16);
    const Code sub_code = polar_subcode(pc, 8, 8);
    REQUIRE(sub_code.k >= 2);
    const SystematizedCode sub = SystematizedCode::build(sub_code);

    for (int trial = 0; trial < 40; ++trial) {
        PathBundle in;
        const std::size_t paths = 1 + rng.next_below(4);
        for (std::size_t p = 0; p < paths; ++p) {
            LlrVector alpha(8);
            for (auto& a : alpha) a = 2.2 * rng.next_gaussian();
            in.alphas.push_back(alpha);
            in.metrics.push_back(0.4 * static_cast<double>(rng.next_below(5)));
        }
        const std::size_t L_i = 1 + rng.next_below(6);
        const LeafExtension gcd = extend_paths_gcd(sub, in, L_i);
        const LeafExtension esd = extend_paths_esd(sub, in, L_i);
        REQUIRE(gcd.metrics.size() == esd.metrics.size());
        for (std::size_t i = 0; i < gcd.metrics.size(); ++i) {
            CHECK(gcd.metrics[i] == esd.metrics[i]);
            CHECK(gcd.parent[i] == esd.parent[i]);
            CHECK(gcd.betas[i] == esd.betas[i]);
        }
        CHECK(gcd.queries <= esd.queries);
        // Ranks: esd consumes every mask concurrently; gcd stops early.
        CHECK(esd.ranks == (std::uint64_t{1} << sub_code.k));
        CHECK(gcd.ranks >= 1);
        CHECK(gcd.ranks <= esd.ranks);
    }
}

TEST_CASE("single-bit tree reproduces conventional scl") {
    const PolarCode pc = construct_polar(32, 16, {}, CrcSpec::crc11());
    const PolarTree tree = single_bit_tree(pc, 4);
    CHECK(tree.leaf_indices().size() == 32);

    Rng rng(58);
    for (int trial = 0; trial < 10; ++trial) {
        const BinaryVector cw = polar_encode(pc, random_word(pc.k, rng));
        const LlrVector r = noisy_llrs(cw, 0.6, rng);
        const SclResult a = scl_decode(r, pc, 4);
        const SclResult b = scl_gcd_decode(r, tree, 4);
        REQUIRE(a.codewords.size() == b.codewords.size());
        for (std::size_t i = 0; i < a.codewords.size(); ++i) {
            CHECK(a.codewords[i] == b.codewords[i]);
            CHECK(a.metrics[i] == b.metrics[i]);
            CHECK(a.crc_pass[i] == b.crc_pass[i]);
        }
    }
}

TEST_CASE("tree construction and file roundtrip") {
    const PolarCode pc = construct_polar(32, 16);

    // A hand-built partition: two esd leaves and two gcd leaves.
    std::vector<TreeNode> leaves(4);
    for (std::size_t i = 0; i < 4; ++i) {
        leaves[i].start = 8 * i;
        leaves[i].len = 8;
        std::size_t k_v = 0;
        for (std::size_t j = 8 * i; j < 8 * (i + 1); ++j)
            if (pc.is_active.get(j)) ++k_v;
        leaves[i].k = k_v;
        leaves[i].mode = (i < 2) ? NodeMode::esd_leaf : NodeMode::gcd_leaf;
        leaves[i].trunc.l_max = (i >= 2) ? 64 : 0;
    }
    const PolarTree tree = PolarTree::from_leaves(pc, leaves);
    CHECK(tree.leaf_indices().size() == 4);
    // Pre-order: the root plus internal nodes plus the leaves.
    CHECK(tree.nodes.size() >= 7);
    CHECK(tree.nodes.front().len == 32);

    const std::string path = "test_polar_tree.txt";
    save_tree(tree, path);
    const PolarTree back = load_tree(path, pc);
    REQUIRE(back.nodes.size() == tree.nodes.size());
    const auto li_a = tree.leaf_indices();
    const auto li_b = back.leaf_indices();
    for (std::size_t i = 0; i < li_a.size(); ++i) {
        const TreeNode& x = tree.nodes[li_a[i]];
        const TreeNode& y = back.nodes[li_b[i]];
        CHECK(x.start == y.start);
        CHECK(x.len == y.len);
        CHECK(x.k == y.k);
        CHECK(x.mode == y.mode);
        CHECK(x.trunc.l_max == y.trunc.l_max);
    }
    std::remove(path.c_str());

    // Bad partitions are rejected.
    std::vector<TreeNode> bad = leaves;
    bad[1].k += 1;
    CHECK_THROWS_AS(PolarTree::from_leaves(pc, bad), InconsistentCode);
    bad = leaves;
    bad.pop_back();
    CHECK_THROWS_AS(PolarTree::from_leaves(pc, bad), InconsistentCode);
}

TEST_CASE("reliability order file roundtrip") {
    const std::string path = "test_polar_order.txt";
    {
        std::ofstream out(path);
        out << "8 7 6 5 4 3 2 1\n";  // 1-based, most reliable last
    }
    const auto order = load_reliability_order(path, 8);
    const std::vector<std::size_t> expect{7, 6, 5, 4, 3, 2, 1, 0};
    CHECK(order == expect);
    {
        std::ofstream out(path);
        out << "8 7 6 5 4 3 2 2\n";
    }
    CHECK_THROWS_AS(load_reliability_order(path, 8), ParseError);
    {
        std::ofstream out(path);
        out << "8 7 6\n";
    }
    CHECK_THROWS_AS(load_reliability_order(path, 8), ParseError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_reliability_order(path, 8), IoError);

    // The construction accepts the loaded order.
    {
        std::ofstream out(path);
        for (int i = 1; i <= 8; ++i) out << i << ' ';
    }
    const PolarCode pc = construct_polar(8, 3, load_reliability_order(path, 8));
    CHECK(pc.active == std::vector<std::size_t>{5, 6, 7});
    std::remove(path.c_str());
}

TEST_CASE("bit reallocation swaps boundary positions") {
    const PolarCode pc = construct_polar(128, 64, {}, CrcSpec::crc11());
    const PolarCode same = reallocate_bits(pc, 0);
    CHECK(same.active == pc.active);

    for (std::size_t t : {std::size_t{1}, std::size_t{3}}) {
        const PolarCode mod = reallocate_bits(pc, t);
        CHECK(mod.active.size() == pc.active.size());
        CHECK(mod.h.rank() == mod.h.rows());

        // Exactly t active positions changed, and the swap follows the
        // reliability order: out go the least reliable active positions,
        // in come the most reliable frozen ones.
        std::vector<std::size_t> removed, added;
        std::set_difference(pc.active.begin(), pc.active.end(), mod.active.begin(),
                            mod.active.end(), std::back_inserter(removed));
        std::set_difference(mod.active.begin(), mod.active.end(), pc.active.begin(),
                            pc.active.end(), std::back_inserter(added));
        CHECK(removed.size() == t);
        CHECK(added.size() == t);

        // Encoding stays consistent with the rebuilt parity check.
        Rng rng(59);
        const BinaryVector cw = polar_encode(mod, random_word(mod.k, rng));
        CHECK(syndrome(mod.h, cw).weight() == 0);
    }
    CHECK_THROWS_AS(reallocate_bits(pc, 1000), InvalidParam);
}

TEST_CASE("latency model") {
    // Conventional SCL on n = 128: 2n - 2 update steps + one sort per active
    // leaf = 254 + (K + 11).
    const std::vector<std::pair<std::size_t, std::size_t>> cases{
        {32, 297}, {64, 329}, {96, 361}};
    for (const auto& [k, steps] : cases) {
        const PolarCode pc = construct_polar(128, k, {}, CrcSpec::crc11());
        CHECK(scl_time_steps(pc) == steps);
    }

    // Pruned-tree formula on a synthetic partition, L = 4:
    //   2 * (4 - 1) traversal steps
    //   + (k + 1) per exhaustive leaf
    //   + (l_avg + max(1, n_v / (2 L))) per guessing leaf.
    const PolarCode pc = construct_polar(32, 16);
    std::vector<TreeNode> leaves(4);
    std::vector<double> l_avg{0.0, 0.0, 2.5, 4.0};
    for (std::size_t i = 0; i < 4; ++i) {
        leaves[i].start = 8 * i;
        leaves[i].len = 8;
        std::size_t k_v = 0;
        for (std::size_t j = 8 * i; j < 8 * (i + 1); ++j)
            if (pc.is_active.get(j)) ++k_v;
        leaves[i].k = k_v;
        leaves[i].mode = (i < 2) ? NodeMode::esd_leaf : NodeMode::gcd_leaf;
        leaves[i].l_avg = l_avg[i];
    }
    const PolarTree tree = PolarTree::from_leaves(pc, leaves);
    double expect = 2.0 * 3.0;
    expect += (leaves[0].k + 1.0) + (leaves[1].k + 1.0);
    expect += (2.5 + std::max(1.0, 8.0 / 8.0)) + (4.0 + std::max(1.0, 8.0 / 8.0));
    CHECK(pruned_time_steps(tree, 4) == doctest::Approx(expect).epsilon(1e-12));

    // Per-leaf overrides replace the stored estimates.
    const std::vector<double> override_avg{0.0, 0.0, 10.0, 1.0};
    double expect2 = 2.0 * 3.0 + (leaves[0].k + 1.0) + (leaves[1].k + 1.0) +
                     (10.0 + 1.0) + (1.0 + 1.0);
    CHECK(pruned_time_steps(tree, 4, override_avg) == doctest::Approx(expect2).epsilon(1e-12));
}

TEST_CASE("genie query estimate is exactly one on a clean channel") {
    const Code sub = polar_subcode(construct_polar(32, 16), 0, 8);
    const ChannelSpec quiet = ChannelSpec::awgn_sigma2(1e-6);
    CHECK(genie_avg_queries(sub, quiet, 4, 50, 3) == 1.0);
}

TEST_CASE("tree pruning is deterministic and balanced") {
    const PolarCode pc = construct_polar(128, 64, {}, CrcSpec::crc11());
    PruneOptions opts;
    opts.leaf_l_max = 100;
    const ChannelSpec ch = ChannelSpec::awgn_snr_direct(3.0);
    const PolarTree tree = prune_tree(pc, 8, ch, 300, 77, opts);

    // Frozen shape for these exact inputs (seeded genie estimates).
    const auto leaves = tree.leaf_indices();
    std::size_t gcd_leaves = 0, esd_leaves = 0, covered = 0, info = 0;
    for (std::size_t idx : leaves) {
        const TreeNode& node = tree.nodes[idx];
        if (node.mode == NodeMode::gcd_leaf) {
            ++gcd_leaves;
            CHECK(node.trunc.l_max == 100);
        } else {
            ++esd_leaves;
        }
        covered += node.len;
        info += node.k;
    }
    CHECK(covered == 128);
    CHECK(info == 75);
    CHECK(gcd_leaves == 10);

    // The final leaf runs at list size 1 (CRC-gated selection).
    CHECK(tree.nodes[leaves.back()].list_size == 1);

    // Deterministic: the same seed reproduces the identical partition.
    const PolarTree again = prune_tree(pc, 8, ch, 300, 77, opts);
    REQUIRE(again.nodes.size() == tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        CHECK(again.nodes[i].start == tree.nodes[i].start);
        CHECK(again.nodes[i].len == tree.nodes[i].len);
        CHECK(again.nodes[i].mode == tree.nodes[i].mode);
    }
}
