#pragma once

#include "groupsift/util/parallel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace groupsift {

inline constexpr int kMinHashFunctions = 10;

/// UTC day index for a Unix timestamp (floor division, so negative timestamps
/// bucket correctly too).
std::int64_t epoch_day(std::int64_t ts);

/// Banded LSH layout over the MinHash signature. bands * rows_per_band must
/// equal kMinHashFunctions. With the defaults (5 bands x 2 rows) the candidate
/// probability for Jaccard s is 1 - (1 - s^2)^5: ~0.18 at s=0.2, ~0.76 at
/// s=0.5, ~0.99 at s=0.8.
struct LshParams {
    int bands = 5;
    int rows_per_band = 2;
    std::uint64_t seed = 0;
};

struct MinHashSignature {
    std::array<std::uint64_t, kMinHashFunctions> values{};

    bool operator==(const MinHashSignature&) const = default;
};

/// Word 3-shingles joined by U+0001, deduplicated and sorted. Token lists
/// shorter than 3 fall back to the token set so short messages still cluster.
std::vector<std::string> shingle(std::span<const std::string> tokens);

/// Signature over a shingle set: component i is the minimum of an independent
/// seeded 64-bit hash over the set. Pr[component match] estimates Jaccard.
/// Throws std::invalid_argument for an empty shingle set.
MinHashSignature minhash(std::span<const std::string> shingles, const LshParams& params);

/// Exact Jaccard similarity of two shingle sets (inputs need not be sorted).
double exact_jaccard(std::span<const std::string> a, std::span<const std::string> b);

/// All index pairs (i < j) sharing at least one LSH band bucket, sorted and
/// deduplicated. The banding index is built single-writer and then read-only.
std::vector<std::pair<std::size_t, std::size_t>> lsh_candidates(
    std::span<const MinHashSignature> signatures, const LshParams& params);

/// One message entering clustering, assembled from the corpus and the kept
/// tokenized output.
struct ClusterInput {
    std::string msg_id;
    std::string group_id;
    std::string sender_key;
    std::int64_t timestamp = 0;
    std::string text;
    std::vector<std::string> tokens;
};

struct ClusterParams {
    LshParams lsh;
    double verify_jaccard = 0.5; // exact-similarity floor for candidate edges
};

struct MessageCluster {
    std::string cluster_id;
    std::vector<std::string> member_msg_ids; // sorted
    std::string representative_text;         // member with median codepoint length
    std::map<std::int64_t, std::uint64_t> daily_counts; // UTC epoch-day -> count
    std::set<std::string> group_ids;

    std::size_t size() const { return member_msg_ids.size(); }
};

/// Near-duplicate clustering: signatures (parallel kernel) -> banded LSH
/// candidates -> exact-Jaccard verification of every candidate pair (parallel
/// kernel) -> connected components via union-find. Exact duplicates (equal
/// shingle sets) are folded onto one representative before LSH; this is
/// semantics-preserving because equal sets share all candidate edges and every
/// duplicate pair trivially passes verification. Cluster ids are assigned in
/// first-seen input order, so the output is deterministic for a fixed input
/// order and seed, in both execution modes.
std::vector<MessageCluster> build_clusters(std::span<const ClusterInput> inputs,
                                           const ClusterParams& params,
                                           ExecMode mode = ExecMode::parallel);

/// Clusters with at least `min_size` members, sorted by (size desc, id asc).
std::vector<MessageCluster> frequent_clusters(const std::vector<MessageCluster>& clusters,
                                              std::size_t min_size = 5);

/// The per-message signature/shingle kernel, exposed for benchmarking and for
/// the serial-vs-parallel equality tests.
struct ShingledMessage {
    std::vector<std::uint64_t> shingle_hashes; // sorted unique
    MinHashSignature signature;

    bool operator==(const ShingledMessage&) const = default;
};
std::vector<ShingledMessage> compute_signatures(std::span<const ClusterInput> inputs,
                                                const LshParams& params, ExecMode mode);

} // namespace groupsift
