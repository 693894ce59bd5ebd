#include "gcdec/polar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "gcdec/candidate_list.hpp"
#include "gcdec/errors.hpp"
#include "gcdec/rng.hpp"
#include "gcdec/tepgen.hpp"

namespace gcdec {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

BinaryMatrix arikan_matrix(std::size_t m) {
    if (m >= 20) throw TooLarge("arikan_matrix: m must be < 20");
    const std::size_t n = std::size_t{1} << m;
    BinaryMatrix g(n, n);
    // Kronecker closed form: entry (i, j) = 1 iff bits(j) is a subset of bits(i).
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            if ((i & j) == j) g.set(i, j, true);
    return g;
}

BinaryVector polar_transform(BinaryVector x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw InvalidParam("polar_transform: length must be a power of two");
    for (std::size_t half = 1; half < n; half <<= 1)
        for (std::size_t base = 0; base < n; base += 2 * half)
            for (std::size_t i = 0; i < half; ++i)
                if (x.get(base + i + half)) x.flip(base + i);
    return x;
}

std::vector<std::size_t> pw_order(std::size_t m) {
    const std::size_t n = std::size_t{1} << m;
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if ((i >> j) & 1) w[i] += std::pow(2.0, 0.25 * static_cast<double>(j));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
    return idx;
}

std::vector<std::size_t> load_reliability_order(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw IoError("load_reliability_order: cannot open " + path);
    std::vector<std::size_t> out;
    out.reserve(n);
    std::vector<std::uint8_t> seen(n, 0);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            unsigned long long v = 0;
            std::size_t used = 0;
            try {
                v = std::stoull(tok, &used);
            } catch (const std::exception&) {
                throw ParseError("load_reliability_order: not an index: " + tok, line_no);
            }
            if (used != tok.size())
                throw ParseError("load_reliability_order: not an index: " + tok, line_no);
            if (v < 1 || v > n)
                throw ParseError("load_reliability_order: index out of range: " + tok, line_no);
            if (seen[v - 1])
                throw ParseError("load_reliability_order: repeated index: " + tok, line_no);
            seen[v - 1] = 1;
            out.push_back(static_cast<std::size_t>(v - 1));
        }
    }
    if (out.size() != n)
        throw ParseError("load_reliability_order: expected " + std::to_string(n) +
                             " indices, got " + std::to_string(out.size()),
                         line_no);
    return out;
}

namespace {

// Derives active/frozen/h from is_active; everything else must be set.
void rebuild_from_mask(PolarCode& pc) {
    pc.active.clear();
    pc.frozen.clear();
    for (std::size_t i = 0; i < pc.n; ++i)
        (pc.is_active.get(i) ? pc.active : pc.frozen).push_back(i);
    pc.h = BinaryMatrix(pc.frozen.size(), pc.n);
    // h = transpose of the frozen columns of G_m: row t, column j is
    // G_m(j, frozen_t) = [bits(frozen_t) subset of bits(j)].
    for (std::size_t t = 0; t < pc.frozen.size(); ++t)
        for (std::size_t j = 0; j < pc.n; ++j)
            if ((j & pc.frozen[t]) == pc.frozen[t]) pc.h.set(t, j, true);
}

}  // namespace

PolarCode construct_polar(std::size_t n, std::size_t k,
                          const std::vector<std::size_t>& reliability_order,
                          std::optional<CrcSpec> crc) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw InvalidParam("construct_polar: n must be a power of two");
    PolarCode pc;
    pc.n = n;
    pc.k = k;
    while ((std::size_t{1} << pc.m) < n) ++pc.m;
    if (crc) pc.crc = *crc;
    const std::size_t info = k + pc.crc.degree;
    if (info > n) throw CapacityExceeded("construct_polar: k + crc bits exceed n");

    if (reliability_order.empty()) {
        pc.order = pw_order(pc.m);
    } else {
        if (reliability_order.size() != n)
            throw InvalidParam("construct_polar: reliability order length != n");
        std::vector<std::uint8_t> seen(n, 0);
        for (std::size_t v : reliability_order) {
            if (v >= n || seen[v])
                throw InvalidParam("construct_polar: reliability order is not a permutation");
            seen[v] = 1;
        }
        pc.order = reliability_order;
    }

    pc.is_active = BinaryVector(n);
    for (std::size_t i = n - info; i < n; ++i) pc.is_active.set(pc.order[i], true);
    rebuild_from_mask(pc);
    return pc;
}

BinaryVector polar_encode(const PolarCode& pc, const BinaryVector& message) {
    if (message.size() != pc.k) throw DimensionMismatch("polar_encode: message length != k");
    std::vector<std::uint8_t> word = message.to_bits();
    if (pc.crc.degree > 0) word = crc_attach(word, pc.crc);
    BinaryVector u(pc.n);
    for (std::size_t i = 0; i < pc.active.size(); ++i)
        if (word[i]) u.set(pc.active[i], true);
    return polar_transform(std::move(u));
}

Code polar_subcode(const PolarCode& pc, std::size_t start, std::size_t len) {
    if (len == 0 || (len & (len - 1)) != 0 || start % len != 0 || start + len > pc.n)
        throw InvalidParam("polar_subcode: span must be an aligned power-of-two block");
    std::vector<std::size_t> local_active;
    std::vector<std::size_t> local_frozen;
    for (std::size_t t = 0; t < len; ++t)
        (pc.is_active.get(start + t) ? local_active : local_frozen).push_back(t);

    BinaryMatrix g(local_active.size(), len);
    for (std::size_t r = 0; r < local_active.size(); ++r)
        for (std::size_t j = 0; j < len; ++j)
            if ((local_active[r] & j) == j) g.set(r, j, true);
    BinaryMatrix h(local_frozen.size(), len);
    for (std::size_t t = 0; t < local_frozen.size(); ++t)
        for (std::size_t j = 0; j < len; ++j)
            if ((j & local_frozen[t]) == local_frozen[t]) h.set(t, j, true);

    char name[64];
    std::snprintf(name, sizeof name, "polar[%zu,%zu]@%zu", len, local_active.size(), start);
    return code_from_pair(name, g, h);
}

Code polar_to_code(const PolarCode& pc) {
    Code code = polar_subcode(pc, 0, pc.n);
    char name[64];
    std::snprintf(name, sizeof name, "polar[%zu,%zu]", pc.n, pc.active.size());
    code.name = name;
    return code;
}

PolarCode reallocate_bits(const PolarCode& pc, std::size_t t) {
    if (t > std::min(pc.active.size(), pc.frozen.size()))
        throw InvalidParam("reallocate_bits: t exceeds min(|active|, |frozen|)");
    std::vector<std::size_t> rank(pc.n, 0);
    for (std::size_t pos = 0; pos < pc.order.size(); ++pos) rank[pc.order[pos]] = pos;

    std::vector<std::size_t> actives = pc.active;
    std::sort(actives.begin(), actives.end(),
              [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    std::vector<std::size_t> frozens = pc.frozen;
    std::sort(frozens.begin(), frozens.end(),
              [&](std::size_t a, std::size_t b) { return rank[a] > rank[b]; });

    PolarCode out = pc;
    for (std::size_t i = 0; i < t; ++i) {
        out.is_active.set(actives[i], false);  // least reliable active leaves
        out.is_active.set(frozens[i], true);   // most reliable frozen enters
    }
    rebuild_from_mask(out);
    return out;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

double f_update(double a, double b) {
    const double mag = std::min(std::fabs(a), std::fabs(b));
    return std::signbit(a) == std::signbit(b) ? mag : -mag;
}

double g_update(double a, double b, bool c) { return (c ? -a : a) + b; }

BinaryVector beta_combine(const BinaryVector& left, const BinaryVector& right) {
    if (left.size() != right.size())
        throw DimensionMismatch("beta_combine: halves differ in length");
    BinaryVector out(2 * left.size());
    for (std::size_t i = 0; i < left.size(); ++i) {
        if (left.get(i) != right.get(i)) out.set(i, true);
        if (right.get(i)) out.set(left.size() + i, true);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decoding tree
// ---------------------------------------------------------------------------

const char* to_string(NodeMode mode) {
    switch (mode) {
        case NodeMode::internal: return "internal";
        case NodeMode::gcd_leaf: return "gcd";
        case NodeMode::esd_leaf: return "esd";
    }
    return "?";
}

std::vector<std::size_t> PolarTree::leaf_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].mode != NodeMode::internal) out.push_back(i);
    return out;
}

namespace {

std::size_t span_active_count(const PolarCode& pc, std::size_t start, std::size_t len) {
    std::size_t count = 0;
    for (std::size_t t = 0; t < len; ++t)
        if (pc.is_active.get(start + t)) ++count;
    return count;
}

void build_preorder(const PolarCode& pc, const std::vector<TreeNode>& leaves, std::size_t& cursor,
                    std::size_t start, std::size_t len, std::size_t level,
                    std::vector<TreeNode>& out) {
    if (cursor >= leaves.size())
        throw InconsistentCode("decoding tree: leaves do not cover the block");
    const TreeNode& next = leaves[cursor];
    if (next.start == start && next.len == len) {
        TreeNode leaf = next;
        leaf.level = level;
        out.push_back(leaf);
        ++cursor;
        return;
    }
    if (len < 2 || next.start != start || next.len > len)
        throw InconsistentCode("decoding tree: leaf spans do not form a buddy partition");
    TreeNode inner;
    inner.level = level;
    inner.start = start;
    inner.len = len;
    inner.k = span_active_count(pc, start, len);
    inner.mode = NodeMode::internal;
    out.push_back(inner);
    build_preorder(pc, leaves, cursor, start, len / 2, level + 1, out);
    build_preorder(pc, leaves, cursor, start + len / 2, len / 2, level + 1, out);
}

}  // namespace

PolarTree PolarTree::from_leaves(PolarCode code, const std::vector<TreeNode>& leaves) {
    if (leaves.empty()) throw InconsistentCode("decoding tree: no leaves");
    std::size_t expect = 0;
    for (const TreeNode& leaf : leaves) {
        if (leaf.mode == NodeMode::internal)
            throw InconsistentCode("decoding tree: leaf marked internal");
        if (leaf.len == 0 || (leaf.len & (leaf.len - 1)) != 0)
            throw InconsistentCode("decoding tree: leaf length is not a power of two");
        if (leaf.start % leaf.len != 0)
            throw InconsistentCode("decoding tree: leaf span is not aligned");
        if (leaf.start != expect)
            throw InconsistentCode("decoding tree: leaf spans are not contiguous");
        expect = leaf.start + leaf.len;
        if (expect > code.n) throw InconsistentCode("decoding tree: leaf span exceeds the block");
        if (leaf.k != span_active_count(code, leaf.start, leaf.len))
            throw InconsistentCode("decoding tree: leaf dimension mismatch");
    }
    if (expect != code.n) throw InconsistentCode("decoding tree: leaves do not cover the block");

    PolarTree tree;
    tree.code = std::move(code);
    std::size_t cursor = 0;
    build_preorder(tree.code, leaves, cursor, 0, tree.code.n, 0, tree.nodes);
    return tree;
}

PolarTree single_bit_tree(const PolarCode& pc, std::size_t L) {
    if (L < 1) throw InvalidParam("single_bit_tree: list size must be >= 1");
    std::vector<TreeNode> leaves(pc.n);
    for (std::size_t i = 0; i < pc.n; ++i) {
        leaves[i].start = i;
        leaves[i].len = 1;
        leaves[i].k = pc.is_active.get(i) ? 1 : 0;
        leaves[i].mode = NodeMode::esd_leaf;
        leaves[i].list_size = L;
    }
    return PolarTree::from_leaves(pc, leaves);
}

void save_tree(const PolarTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_tree: cannot open " + path);
    for (std::size_t idx : tree.leaf_indices()) {
        const TreeNode& leaf = tree.nodes[idx];
        out << leaf.start << ' ' << leaf.len << ' ' << leaf.k << ' ' << to_string(leaf.mode) << ' '
            << leaf.list_size << ' ' << leaf.trunc.l_max << '\n';
    }
    if (!out) throw IoError("save_tree: write failed for " + path);
}

PolarTree load_tree(const std::string& path, const PolarCode& pc) {
    std::ifstream in(path);
    if (!in) throw IoError("load_tree: cannot open " + path);
    std::vector<TreeNode> leaves;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        TreeNode leaf;
        std::string mode;
        if (!(ls >> leaf.start)) {
            std::istringstream probe(line);
            std::string tok;
            if (!(probe >> tok)) continue;  // blank line
            throw ParseError("load_tree: malformed leaf line", line_no);
        }
        if (!(ls >> leaf.len >> leaf.k >> mode >> leaf.list_size >> leaf.trunc.l_max))
            throw ParseError("load_tree: malformed leaf line", line_no);
        std::string extra;
        if (ls >> extra) throw ParseError("load_tree: trailing tokens on leaf line", line_no);
        if (mode == "gcd")
            leaf.mode = NodeMode::gcd_leaf;
        else if (mode == "esd")
            leaf.mode = NodeMode::esd_leaf;
        else
            throw ParseError("load_tree: unknown leaf mode: " + mode, line_no);
        leaves.push_back(leaf);
    }
    return PolarTree::from_leaves(pc, leaves);
}

double genie_avg_queries(const Code& subcode, const ChannelSpec& ch, std::size_t L,
                         std::size_t trials, std::uint64_t seed, std::uint64_t cap) {
    (void)L;  // the genie stop does not depend on the list size
    if (trials < 1) throw InvalidParam("genie_avg_queries: trials must be >= 1");
    const SystematizedCode sys = SystematizedCode::build(subcode);
    std::uint64_t limit = cap;
    if (subcode.k < 64) {
        const std::uint64_t space = std::uint64_t{1} << subcode.k;
        if (limit == 0 || limit > space) limit = space;
    } else if (limit == 0) {
        limit = ~std::uint64_t{0};
    }

    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = rng_for_frame(seed, t);
        LlrVector r(subcode.n);
        for (double& v : r) v = ch.sample_llr_of_zero(rng);
        const GcdWorkspace ws(sys, r);
        TepGenerator gen(ws.r_partial());
        // All-zero transmission: the true error pattern is the hard decision.
        const TepMask target = gen.mask_from_caller_order(ws.partial_of_error(hard_decision(r)));
        std::uint64_t count = 0;
        while (count < limit && gen.has_next()) {
            ++count;
            if (gen.next().mask == target) break;
        }
        sum += static_cast<double>(count);
    }
    return sum / static_cast<double>(trials);
}

namespace {

// Count-per-operation cost of running the successive-cancellation schedule
// below a node of size n_v with k_v active leaves: per-leaf path sorts plus
// the f/g and partial-sum work of the subtree, all big-O constants set to 1.
double scl_cost(std::size_t n_v, std::size_t k_v, std::size_t L) {
    const double Ld = static_cast<double>(L);
    const double nd = static_cast<double>(n_v);
    const double kd = static_cast<double>(k_v);
    const double lgn = std::log2(nd);
    return 2.0 * kd * Ld * std::log2(2.0 * Ld) + Ld * nd * lgn + Ld * (nd / 2.0) * lgn;
}

// Cost of L ordered-guessing processors answering l_avg queries each: the
// one-off reliability sort, per-query generator maintenance and list
// insertion, and the parity re-encoding of each query.
double gcd_cost(std::size_t n_v, std::size_t k_v, std::size_t L, double l_avg) {
    const double Ld = static_cast<double>(L);
    const double nd = static_cast<double>(n_v);
    const double kd = static_cast<double>(k_v);
    return Ld * kd * std::log2(std::max(kd, 1.0)) +
           l_avg * (Ld * std::log2(std::max(l_avg, 1.0)) + std::log2(Ld) + Ld * kd) +
           Ld * l_avg * (nd - kd);
}

// Smallest integer query count at which guessing stops being cheaper, or 0
// when it is never cheaper even at a single query.
std::uint64_t break_even_queries(std::size_t n_v, std::size_t k_v, std::size_t L) {
    const double target = scl_cost(n_v, k_v, L);
    if (gcd_cost(n_v, k_v, L, 1.0) >= target) return 0;
    std::uint64_t lo = 1, hi = 2;
    while (gcd_cost(n_v, k_v, L, static_cast<double>(hi)) < target && hi < (1ull << 40)) {
        lo = hi;
        hi <<= 1;
    }
    while (lo + 1 < hi) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (gcd_cost(n_v, k_v, L, static_cast<double>(mid)) < target ? lo : hi) = mid;
    }
    return hi;
}

bool esd_eligible(std::size_t k_v, std::size_t L) {
    return k_v == 0 || (k_v < 64 && (std::uint64_t{1} << k_v) <= L);
}

struct PruneWalker {
    const PolarCode& pc;
    std::size_t L;
    const ChannelSpec& ch;
    std::size_t trials;
    std::uint64_t seed;
    const PruneOptions& opts;
    std::vector<TreeNode> leaves;
    std::uint64_t genie_calls = 0;

    void make_leaf(std::size_t start, std::size_t len, std::size_t k_v, double l_avg) {
        TreeNode leaf;
        leaf.start = start;
        leaf.len = len;
        leaf.k = k_v;
        leaf.mode = esd_eligible(k_v, L) ? NodeMode::esd_leaf : NodeMode::gcd_leaf;
        leaf.list_size = L;
        if (leaf.mode == NodeMode::gcd_leaf) leaf.trunc.l_max = opts.leaf_l_max;
        leaf.l_avg = l_avg;
        leaves.push_back(leaf);
    }

    void walk(std::size_t start, std::size_t len) {
        const std::size_t k_v = span_active_count(pc, start, len);
        if (len == 1) {
            make_leaf(start, len, k_v, 1.0);
            return;
        }
        const std::uint64_t lstar = break_even_queries(len, k_v, L);
        if (lstar > 0) {
            // Guessing can win below lstar average queries; measure it.
            std::uint64_t cap = opts.genie_cap;
            if (cap == 0) cap = std::max<std::uint64_t>(64, 8 * lstar);
            if (k_v < 64) cap = std::min(cap, std::uint64_t{1} << k_v);
            Rng mix = rng_for_frame(seed, genie_calls++);
            const double l_avg =
                genie_avg_queries(polar_subcode(pc, start, len), ch, L, trials, mix.next_u64(), cap);
            if (gcd_cost(len, k_v, L, l_avg) < scl_cost(len, k_v, L)) {
                make_leaf(start, len, k_v, l_avg);
                return;
            }
        }
        walk(start, len / 2);
        walk(start + len / 2, len / 2);
    }
};

}  // namespace

PolarTree prune_tree(const PolarCode& pc, std::size_t L, const ChannelSpec& ch, std::size_t trials,
                     std::uint64_t seed, const PruneOptions& opts) {
    if (L < 1) throw InvalidParam("prune_tree: list size must be >= 1");
    if (trials < 1) throw InvalidParam("prune_tree: trials must be >= 1");
    PruneWalker walker{pc, L, ch, trials, seed, opts, {}, 0};
    walker.walk(0, pc.n);
    if (opts.final_list_size > 0) walker.leaves.back().list_size = opts.final_list_size;
    return PolarTree::from_leaves(pc, walker.leaves);
}

// ---------------------------------------------------------------------------
// Leaf extension
// ---------------------------------------------------------------------------

namespace {

struct LeafProc {
    GcdWorkspace ws;
    TepGenerator gen;
    bool open = true;

    LeafProc(const SystematizedCode& sub, const LlrVector& alpha)
        : ws(sub, alpha), gen(ws.r_partial()) {}
};

struct LeafCand {
    std::size_t parent;
    TepMask ep;
    BinaryVector e_parity;
};

// Shared candidate list with optional validity gating and a best-rejected
// fallback.  Offers must pass the candidate's total metric; sub-codewords are
// only materialised for survivors (and for validation).
class LeafCollector {
  public:
    LeafCollector(std::size_t capacity, const PathValidator* validator,
                  const std::vector<LeafProc>& procs)
        : list_(capacity), validator_(validator), procs_(&procs) {}

    double admission_bound() const { return list_.worst_weight(); }

    void offer(std::size_t parent, TepMask ep, BinaryVector e_parity, double total) {
        if (!validator_) {
            list_.try_insert(total, LeafCand{parent, std::move(ep), std::move(e_parity)});
            return;
        }
        if (!(total < list_.worst_weight())) return;
        BinaryVector beta = materialize(parent, ep, e_parity);
        if ((*validator_)(parent, beta)) {
            list_.try_insert(total, LeafCand{parent, std::move(ep), std::move(e_parity)});
        } else if (total < fallback_weight_) {
            fallback_weight_ = total;
            fallback_ = LeafCand{parent, std::move(ep), std::move(e_parity)};
            have_fallback_ = true;
        }
    }

    LeafExtension finish(std::uint64_t queries) const {
        LeafExtension out;
        out.queries = queries;
        auto emit = [&](double weight, const LeafCand& cand) {
            out.parent.push_back(cand.parent);
            out.metrics.push_back(weight);
            out.betas.push_back(materialize(cand.parent, cand.ep, cand.e_parity));
        };
        if (list_.size() > 0) {
            for (const auto& entry : list_) emit(entry.weight, entry.payload);
        } else if (have_fallback_) {
            out.used_fallback = true;
            emit(fallback_weight_, fallback_);
        } else {
            throw Exhausted("leaf extension: no candidate admitted");
        }
        return out;
    }

  private:
    BinaryVector materialize(std::size_t parent, const TepMask& ep,
                             const BinaryVector& e_parity) const {
        const LeafProc& pr = (*procs_)[parent];
        return pr.ws.codeword(pr.gen.perm(), ep, e_parity);
    }

    CandidateList<LeafCand> list_;
    const PathValidator* validator_;
    const std::vector<LeafProc>* procs_;
    bool have_fallback_ = false;
    double fallback_weight_ = kInf;
    LeafCand fallback_;
};

std::vector<LeafProc> make_procs(const SystematizedCode& sub, const PathBundle& in,
                                 const char* who) {
    const std::size_t paths = in.alphas.size();
    if (paths == 0 || in.metrics.size() != paths)
        throw InvalidParam(std::string(who) + ": empty or mismatched path bundle");
    std::vector<LeafProc> procs;
    procs.reserve(paths);
    for (std::size_t p = 0; p < paths; ++p) procs.emplace_back(sub, in.alphas[p]);
    return procs;
}

}  // namespace

LeafExtension extend_paths_gcd(const SystematizedCode& sub, const PathBundle& in, std::size_t L_i,
                               const TruncationConfig& trunc, const PathValidator* validator) {
    if (L_i < 1) throw InvalidParam("extend_paths_gcd: list size must be >= 1");
    std::vector<LeafProc> procs = make_procs(sub, in, "extend_paths_gcd");
    const std::size_t paths = procs.size();
    LeafCollector collector(L_i, validator, procs);

    std::uint64_t queries = 0;
    std::uint64_t ranks_used = 0;
    std::size_t n_open = paths;
    const std::uint64_t rank_cap = trunc.l_max == 0 ? ~std::uint64_t{0} : trunc.l_max;
    double mass = 0.0;
    const double mass_goal = trunc.tau_p > 0.0 ? 1.0 - trunc.tau_p : kInf;
    bool mass_hit = false;

    // Rank-synchronised sweep: every open processor answers its rank-th
    // pattern before any processor moves to rank+1, so the shared-list close
    // test sees the same bound it would in a lockstep parallel execution.
    for (std::uint64_t rank = 1; rank <= rank_cap && n_open > 0 && !mass_hit; ++rank) {
        for (std::size_t p = 0; p < paths && !mass_hit; ++p) {
            LeafProc& pr = procs[p];
            if (!pr.open) continue;
            if (!pr.gen.has_next()) {
                pr.open = false;
                --n_open;
                continue;
            }
            const double bound = in.metrics[p] + pr.gen.peek_weight();
            if (bound + trunc.delta >= collector.admission_bound() || bound >= trunc.tau_s) {
                pr.open = false;
                --n_open;
                continue;
            }
            Tep t = pr.gen.next();
            ++queries;
            ranks_used = rank;
            GcdWorkspace::Completion comp = pr.ws.complete(pr.gen.perm(), t.mask, t.weight);
            collector.offer(p, std::move(t.mask), std::move(comp.e_parity),
                            in.metrics[p] + comp.weight);
            if (trunc.tau_p > 0.0) {
                mass += std::exp(pr.ws.log_p0() - t.weight);
                if (mass >= mass_goal) mass_hit = true;
            }
        }
    }
    LeafExtension out = collector.finish(queries);
    out.ranks = ranks_used;
    return out;
}

LeafExtension extend_paths_esd(const SystematizedCode& sub, const PathBundle& in, std::size_t L_i,
                               const PathValidator* validator) {
    if (L_i < 1) throw InvalidParam("extend_paths_esd: list size must be >= 1");
    const std::size_t k = sub.code->k;
    if (k > 24) throw TooLarge("extend_paths_esd: k must be <= 24");
    std::vector<LeafProc> procs = make_procs(sub, in, "extend_paths_esd");
    LeafCollector collector(L_i, validator, procs);

    const std::uint64_t total_masks = std::uint64_t{1} << k;
    std::uint64_t queries = 0;
    for (std::size_t p = 0; p < procs.size(); ++p) {
        LeafProc& pr = procs[p];
        const std::vector<double>& mag = pr.gen.sorted_magnitudes();
        for (std::uint64_t bits = 0; bits < total_masks; ++bits) {
            TepMask ep(k);
            double partial = 0.0;
            // Descending-index fold to match the ordered generator bit for bit.
            for (std::size_t j = k; j-- > 0;)
                if ((bits >> j) & 1) {
                    ep.set(j);
                    partial += mag[j];
                }
            GcdWorkspace::Completion comp = pr.ws.complete(pr.gen.perm(), ep, partial);
            ++queries;
            collector.offer(p, std::move(ep), std::move(comp.e_parity),
                            in.metrics[p] + comp.weight);
        }
    }
    LeafExtension out = collector.finish(queries);
    out.ranks = total_masks;  // all patterns are evaluated concurrently per path
    return out;
}

// ---------------------------------------------------------------------------
// Tree decoder
// ---------------------------------------------------------------------------

struct TreeDecoder::NodeOut {
    std::vector<BinaryVector> betas;
    std::vector<std::size_t> parent;
};

struct TreeDecoder::EngineState {
    std::vector<double> metrics;
    std::vector<BinaryVector> u;
    std::vector<std::uint64_t> leaf_queries;
    std::vector<std::uint64_t> leaf_ranks;
    std::size_t cursor = 0;
    bool used_fallback = false;
};

TreeDecoder::TreeDecoder(PolarTree tree, std::size_t default_list_size)
    : tree_(std::move(tree)), default_list_size_(default_list_size) {
    if (default_list_size_ < 1) throw InvalidParam("TreeDecoder: list size must be >= 1");
    const std::vector<std::size_t> leaf_idx = tree_.leaf_indices();
    if (leaf_idx.empty()) throw InconsistentCode("TreeDecoder: tree has no leaves");
    leaves_.reserve(leaf_idx.size());
    for (std::size_t j = 0; j < leaf_idx.size(); ++j) {
        const TreeNode& node = tree_.nodes[leaf_idx[j]];
        LeafPlan plan;
        plan.node_index = leaf_idx[j];
        plan.list_size = node.list_size ? node.list_size : default_list_size_;
        plan.subcode = std::make_unique<Code>(polar_subcode(tree_.code, node.start, node.len));
        plan.sub = SystematizedCode::build(*plan.subcode);
        plan.gate_by_crc =
            j + 1 == leaf_idx.size() && tree_.code.crc.degree > 0 && plan.list_size == 1;
        leaves_.push_back(std::move(plan));
    }
}

TreeDecoder::NodeOut TreeDecoder::decode_span(EngineState& st, std::size_t start, std::size_t len,
                                              std::vector<LlrVector> alphas) const {
    const LeafPlan& plan = leaves_[st.cursor];
    const TreeNode& node = tree_.nodes[plan.node_index];
    if (node.start == start && node.len == len) {
        PathBundle bundle;
        bundle.alphas = std::move(alphas);
        bundle.metrics = st.metrics;

        PathValidator crc_gate;
        const PathValidator* validator = nullptr;
        if (plan.gate_by_crc) {
            const PolarCode& pc = tree_.code;
            crc_gate = [&st, &pc, start](std::size_t parent, const BinaryVector& beta) {
                const BinaryVector uspan = polar_transform(beta);
                std::vector<std::uint8_t> word;
                word.reserve(pc.active.size());
                for (std::size_t idx : pc.active)
                    word.push_back(idx < start ? st.u[parent].get(idx)
                                               : uspan.get(idx - start));
                return crc_check(word, pc.crc);
            };
            validator = &crc_gate;
        }

        LeafExtension ext = node.mode == NodeMode::gcd_leaf
                                ? extend_paths_gcd(plan.sub, bundle, plan.list_size, node.trunc,
                                                   validator)
                                : extend_paths_esd(plan.sub, bundle, plan.list_size, validator);
        st.leaf_queries[st.cursor] = ext.queries;
        st.leaf_ranks[st.cursor] = ext.ranks;
        st.used_fallback = st.used_fallback || ext.used_fallback;

        std::vector<BinaryVector> new_u(ext.parent.size());
        for (std::size_t j = 0; j < ext.parent.size(); ++j) {
            new_u[j] = st.u[ext.parent[j]];
            // Sub-codeword to local source bits: u_span = beta * G (involution).
            const BinaryVector uspan = polar_transform(ext.betas[j]);
            for (std::size_t i = 0; i < len; ++i) new_u[j].set(start + i, uspan.get(i));
        }
        st.u = std::move(new_u);
        st.metrics = std::move(ext.metrics);
        ++st.cursor;

        NodeOut out;
        out.betas = std::move(ext.betas);
        out.parent = std::move(ext.parent);
        return out;
    }

    const std::size_t half = len / 2;
    const std::size_t paths = alphas.size();
    std::vector<LlrVector> left(paths, LlrVector(half));
    for (std::size_t p = 0; p < paths; ++p)
        for (std::size_t i = 0; i < half; ++i)
            left[p][i] = f_update(alphas[p][i], alphas[p][i + half]);
    NodeOut l = decode_span(st, start, half, std::move(left));

    std::vector<LlrVector> right(l.parent.size(), LlrVector(half));
    for (std::size_t j = 0; j < l.parent.size(); ++j) {
        const LlrVector& a = alphas[l.parent[j]];
        for (std::size_t i = 0; i < half; ++i)
            right[j][i] = g_update(a[i], a[i + half], l.betas[j].get(i));
    }
    NodeOut r = decode_span(st, start + half, half, std::move(right));

    NodeOut out;
    out.parent.resize(r.parent.size());
    out.betas.resize(r.parent.size());
    for (std::size_t j = 0; j < r.parent.size(); ++j) {
        const std::size_t via = r.parent[j];
        out.parent[j] = l.parent[via];
        out.betas[j] = beta_combine(l.betas[via], r.betas[j]);
    }
    return out;
}

SclResult TreeDecoder::decode(const LlrVector& r) const {
    const PolarCode& pc = tree_.code;
    if (r.size() != pc.n) throw DimensionMismatch("TreeDecoder::decode: LLR length != n");

    EngineState st;
    st.metrics = {0.0};
    st.u.emplace_back(pc.n);
    st.leaf_queries.assign(leaves_.size(), 0);
    st.leaf_ranks.assign(leaves_.size(), 0);

    std::vector<LlrVector> alphas;
    alphas.push_back(r);
    NodeOut root = decode_span(st, 0, pc.n, std::move(alphas));

    const std::size_t paths = st.metrics.size();
    std::vector<std::uint8_t> pass(paths, 1);
    if (pc.crc.degree > 0) {
        for (std::size_t p = 0; p < paths; ++p) {
            std::vector<std::uint8_t> word;
            word.reserve(pc.active.size());
            for (std::size_t idx : pc.active) word.push_back(st.u[p].get(idx));
            pass[p] = crc_check(word, pc.crc) ? 1 : 0;
        }
    }

    std::vector<std::size_t> order(paths);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return st.metrics[a] < st.metrics[b];
    });
    std::stable_partition(order.begin(), order.end(), [&](std::size_t p) { return pass[p] != 0; });

    SclResult res;
    res.codewords.reserve(paths);
    for (std::size_t p : order) {
        res.codewords.push_back(std::move(root.betas[p]));
        BinaryVector msg(pc.k);
        for (std::size_t i = 0; i < pc.k; ++i)
            if (st.u[p].get(pc.active[i])) msg.set(i, true);
        res.messages.push_back(std::move(msg));
        res.metrics.push_back(st.metrics[p]);
        res.crc_pass.push_back(pass[p]);
    }
    res.leaf_queries = std::move(st.leaf_queries);
    res.leaf_ranks = std::move(st.leaf_ranks);
    for (std::uint64_t q : res.leaf_queries) res.queries += q;
    res.used_fallback = st.used_fallback;
    return res;
}

SclResult scl_decode(const LlrVector& r, const PolarCode& pc, std::size_t L) {
    const TreeDecoder decoder(single_bit_tree(pc, L), L);
    return decoder.decode(r);
}

SclResult scl_gcd_decode(const LlrVector& r, const PolarTree& tree, std::size_t L) {
    const TreeDecoder decoder(tree, L);
    return decoder.decode(r);
}

// ---------------------------------------------------------------------------
// Latency model
// ---------------------------------------------------------------------------

std::size_t scl_time_steps(const PolarCode& pc) { return 2 * pc.n - 2 + pc.active.size(); }

double pruned_time_steps(const PolarTree& tree, std::size_t L,
                         const std::vector<double>& l_avg_per_leaf) {
    const std::vector<std::size_t> leaf_idx = tree.leaf_indices();
    if (!l_avg_per_leaf.empty() && l_avg_per_leaf.size() != leaf_idx.size())
        throw DimensionMismatch("pruned_time_steps: l_avg override size != leaf count");
    double steps = 2.0 * (static_cast<double>(leaf_idx.size()) - 1.0);
    for (std::size_t j = 0; j < leaf_idx.size(); ++j) {
        const TreeNode& leaf = tree.nodes[leaf_idx[j]];
        if (leaf.mode == NodeMode::esd_leaf) {
            steps += static_cast<double>(leaf.k) + 1.0;
        } else {
            const double l_avg = l_avg_per_leaf.empty() ? leaf.l_avg : l_avg_per_leaf[j];
            steps += l_avg + std::max(1.0, static_cast<double>(leaf.len) /
                                               (2.0 * static_cast<double>(L)));
        }
    }
    return steps;
}

}  // namespace gcdec
