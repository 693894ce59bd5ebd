#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcdec/channel.hpp"
#include "gcdec/codes.hpp"
#include "gcdec/decoders.hpp"

namespace gcdec {

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

// m-fold Kronecker power of the kernel [[1,0],[1,1]].  Entry (i, j) is 1 iff
// the bit support of j is contained in the bit support of i, so the matrix is
// self-inverse over GF(2).  No bit-reversal anywhere: codewords are c = u*G.
BinaryMatrix arikan_matrix(std::size_t m);

// In-place butterfly x -> x * G_m for x of length 2^m (involution).
BinaryVector polar_transform(BinaryVector x);

// Universal reliability sequence via the polarization-weight beta-expansion
// w(i) = sum_j b_j(i) * 2^(j/4).  Returned as a permutation of {0..n-1} in
// increasing reliability: the most reliable subchannel index comes last.
std::vector<std::size_t> pw_order(std::size_t m);

// Reliability sequence file: whitespace-separated 1-based indices, most
// reliable last.  Returns 0-based indices.  Throws IoError if the file cannot
// be read and ParseError on malformed or non-permutation content.
std::vector<std::size_t> load_reliability_order(const std::string& path, std::size_t n);

struct PolarCode {
    std::size_t m = 0;
    std::size_t n = 0;                // 2^m
    std::size_t k = 0;                // message bits (CRC excluded)
    CrcSpec crc;                      // degree 0 when no CRC is attached
    std::vector<std::size_t> order;   // reliability permutation, most reliable last
    std::vector<std::size_t> active;  // information + CRC positions, ascending
    std::vector<std::size_t> frozen;  // complement of active, ascending
    BinaryVector is_active;           // n-bit membership mask
    BinaryMatrix h;                   // |frozen| x n, transpose of the frozen columns of G_m

    std::size_t info_bits() const { return active.size(); }  // k + crc.degree
};

// Selects the k + crc.degree most reliable subchannels as the active set and
// builds the parity check from the frozen columns of G_m.  An empty
// reliability order selects the built-in pw_order(m).  Throws InvalidParam on
// a bad length/order and CapacityExceeded when k + crc.degree > n.
PolarCode construct_polar(std::size_t n, std::size_t k,
                          const std::vector<std::size_t>& reliability_order = {},
                          std::optional<CrcSpec> crc = std::nullopt);

// message||CRC placed on the active positions in ascending index order,
// zeros on frozen positions, then the butterfly transform.
BinaryVector polar_encode(const PolarCode& pc, const BinaryVector& message);

// The (n, k + crc.degree) linear code ignoring the CRC constraint: generator
// rows are the active rows of G_m, parity check is pc.h.
Code polar_to_code(const PolarCode& pc);

// Subcode seen by the decoding-tree node spanning leaf indices
// [start, start+len): an (len, k_v) code whose parity check comes from the
// frozen columns of G_{log2 len} local to the span.
Code polar_subcode(const PolarCode& pc, std::size_t start, std::size_t len);

// Swaps the t least reliable active positions with the t most reliable frozen
// positions (reliability per pc.order) and rebuilds the parity check.
PolarCode reallocate_bits(const PolarCode& pc, std::size_t t);

// ---------------------------------------------------------------------------
// Successive-cancellation kernels
// ---------------------------------------------------------------------------

// Min-sum check-node update f(a,b) = sgn(a) sgn(b) min(|a|, |b|).
double f_update(double a, double b);

// Variable-node update g(a,b,c) = (-1)^c a + b given the partial sum bit c.
double g_update(double a, double b, bool c);

// Parent sub-codeword from child sub-codewords: (left xor right, right).
BinaryVector beta_combine(const BinaryVector& left, const BinaryVector& right);

// ---------------------------------------------------------------------------
// Decoding tree
// ---------------------------------------------------------------------------

enum class NodeMode { internal, gcd_leaf, esd_leaf };
const char* to_string(NodeMode mode);

struct TreeNode {
    std::size_t level = 0;       // depth from the root (root = 0)
    std::size_t start = 0;       // first leaf index of the span
    std::size_t len = 0;         // 2^(m - level)
    std::size_t k = 0;           // active positions inside the span
    NodeMode mode = NodeMode::internal;
    std::size_t list_size = 0;   // per-node list size L_i; 0 = use the global L
    TruncationConfig trunc;      // per-node stop rules (l_max caps the TEP rank)
    double l_avg = 0.0;          // genie query estimate (gcd leaves, informational)
};

struct PolarTree {
    PolarCode code;
    std::vector<TreeNode> nodes;  // pre-order; leaves appear left to right

    std::vector<std::size_t> leaf_indices() const;

    // Rebuilds the pre-order node list from a left-to-right leaf partition,
    // validating alignment, coverage and per-leaf dimensions against `code`.
    // Throws InconsistentCode on any mismatch.
    static PolarTree from_leaves(PolarCode code, const std::vector<TreeNode>& leaves);
};

// The conventional SCL schedule: every leaf is a single-bit esd leaf with
// list size L (including the final one, so no candidate is CRC-gated).
PolarTree single_bit_tree(const PolarCode& pc, std::size_t L);

// One line per leaf: `start len k mode list_size l_max` with mode "gcd"/"esd".
void save_tree(const PolarTree& tree, const std::string& path);
PolarTree load_tree(const std::string& path, const PolarCode& pc);

// Mean rank (in the ordered TEP sequence of the partial positions) at which
// the true pattern of a random noise realisation appears, i.e. the query
// count of a genie-stopped decoder.  Ranks are capped at 2^k, or at `cap`
// when nonzero.  The list size does not influence the genie stop; it is part
// of the signature for interface symmetry with the decoders.
double genie_avg_queries(const Code& subcode, const ChannelSpec& ch, std::size_t L,
                         std::size_t trials, std::uint64_t seed, std::uint64_t cap = 0);

struct PruneOptions {
    std::uint64_t leaf_l_max = 0;     // stamped into gcd leaves (0 = unbounded)
    std::size_t final_list_size = 1;  // list size of the last leaf (L_q)
    std::uint64_t genie_cap = 0;      // per-trial rank cap override for estimates
};

// Pre-order walk: at each node compare the cost of L-processor ordered
// guessing (using a genie estimate of the mean query count at the design
// channel) against the cost of continuing the successive-cancellation
// schedule below the node; prune to a leaf where guessing is cheaper.  Leaves
// with k_v <= log2 L are marked for exhaustive enumeration instead.
PolarTree prune_tree(const PolarCode& pc, std::size_t L, const ChannelSpec& ch,
                     std::size_t trials, std::uint64_t seed, const PruneOptions& opts = {});

// ---------------------------------------------------------------------------
// List decoding over a tree
// ---------------------------------------------------------------------------

// Incoming paths at a leaf: one node-local LLR vector and one accumulated
// metric per path.
struct PathBundle {
    std::vector<LlrVector> alphas;
    std::vector<double> metrics;
};

// Optional admission filter for candidates (parent path index, sub-codeword).
using PathValidator = std::function<bool(std::size_t, const BinaryVector&)>;

struct LeafExtension {
    std::vector<std::size_t> parent;  // new path -> incoming path index
    std::vector<BinaryVector> betas;  // chosen sub-codewords, node-local coordinates
    std::vector<double> metrics;      // extended metrics, ascending
    std::uint64_t queries = 0;        // candidates completed (re-encoded)
    std::uint64_t ranks = 0;          // sequential pattern ranks consumed (latency model)
    bool used_fallback = false;       // validator rejected everything; best reject returned
};

// One rank-synchronised pass of L_{i-1} ordered-guessing processors (one per
// incoming path) feeding a shared candidate list of capacity L_i.  Processor
// p is closed once metric_p + next-pattern-weight (+ trunc.delta) can no
// longer beat the worst retained candidate, or crosses trunc.tau_s.  Unlike
// the flat decoder, trunc.l_max here caps the per-processor pattern rank
// (the outer loop count), not the total query budget.
LeafExtension extend_paths_gcd(const SystematizedCode& sub, const PathBundle& in, std::size_t L_i,
                               const TruncationConfig& trunc = {},
                               const PathValidator* validator = nullptr);

// Exhaustive variant for low-rate leaves: every incoming path is extended by
// all 2^k sub-codewords (k <= 24).  Weight arithmetic matches
// extend_paths_gcd bit for bit, so mixed-mode comparisons are exact.
LeafExtension extend_paths_esd(const SystematizedCode& sub, const PathBundle& in, std::size_t L_i,
                               const PathValidator* validator = nullptr);

struct SclResult {
    std::vector<BinaryVector> codewords;  // ranked best-first
    std::vector<BinaryVector> messages;   // k message bits per entry (CRC stripped)
    std::vector<double> metrics;          // soft-weight path metrics
    std::vector<std::uint8_t> crc_pass;   // 1 when the entry passes the CRC (or none attached)
    std::uint64_t queries = 0;            // total leaf candidates re-encoded
    std::vector<std::uint64_t> leaf_queries;  // per leaf, in left-to-right order
    std::vector<std::uint64_t> leaf_ranks;    // per leaf, sequential ranks consumed
    bool used_fallback = false;           // final-leaf validity gate never satisfied
};

// Reusable decoder for one pruned tree: precomputes per-leaf systematised
// subcodes once.  decode() is const and carries no mutable state, so one
// instance may serve concurrent callers.
class TreeDecoder {
  public:
    // Node list sizes of 0 fall back to `default_list_size`.
    TreeDecoder(PolarTree tree, std::size_t default_list_size);

    const PolarTree& tree() const { return tree_; }
    SclResult decode(const LlrVector& r) const;

  private:
    struct LeafPlan {
        std::size_t node_index = 0;
        std::size_t list_size = 0;
        std::unique_ptr<Code> subcode;  // owns the code the systematised view points into
        SystematizedCode sub;
        bool gate_by_crc = false;  // final leaf with list size 1 and a CRC present
    };

    PolarTree tree_;
    std::size_t default_list_size_;
    std::vector<LeafPlan> leaves_;

    struct NodeOut;
    struct EngineState;
    NodeOut decode_span(EngineState& st, std::size_t start, std::size_t len,
                        std::vector<LlrVector> alphas) const;
};

// Conventional CRC-aided SCL: the single-bit schedule with list size L.  The
// returned entries are sorted by metric with CRC-passing paths ranked first.
SclResult scl_decode(const LlrVector& r, const PolarCode& pc, std::size_t L);

// List decoding over a pruned tree.  Honours per-node list sizes (0 = L) and
// stop rules; when the final leaf has list size 1 and the code carries a CRC,
// candidate admission at that leaf is gated on CRC validity and the best
// invalid path is returned only if no candidate ever passes.
SclResult scl_gcd_decode(const LlrVector& r, const PolarTree& tree, std::size_t L);

// ---------------------------------------------------------------------------
// Latency model (parallel LLR update = 1 step, hard decisions free, one sort
// of 2L metrics = 1 step)
// ---------------------------------------------------------------------------

// Conventional SCL: 2n - 2 f/g steps plus one sort per active leaf.
std::size_t scl_time_steps(const PolarCode& pc);

// Pruned tree: 2 * (#leaves - 1) f/g steps down to the leaf boundaries plus
// k + 1 per exhaustive leaf and l_avg + max(1, n_v / (2L)) per guessing leaf.
// l_avg_per_leaf overrides the stored estimates when nonempty (one entry per
// leaf, left to right).
double pruned_time_steps(const PolarTree& tree, std::size_t L,
                         const std::vector<double>& l_avg_per_leaf = {});

}  // namespace gcdec
