#include "groupsift/dedup.hpp"

#include "groupsift/util/hash.hpp"
#include "groupsift/util/unicode.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace groupsift {

namespace {
constexpr std::int64_t kSecondsPerDay = 86400;
} // namespace

std::int64_t epoch_day(std::int64_t ts) {
    // Floor division so pre-1970 timestamps would still bucket correctly.
    return ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay;
}

namespace {

std::uint64_t hash_seed(const LshParams& params, int i) {
    return util::splitmix64(params.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1)));
}

MinHashSignature minhash_from_hashes(std::span<const std::uint64_t> shingle_hashes,
                                     const LshParams& params) {
    MinHashSignature sig;
    sig.values.fill(std::numeric_limits<std::uint64_t>::max());
    std::array<std::uint64_t, kMinHashFunctions> seeds;
    for (int i = 0; i < kMinHashFunctions; ++i) seeds[i] = hash_seed(params, i);
    for (std::uint64_t base : shingle_hashes) {
        for (int i = 0; i < kMinHashFunctions; ++i) {
            std::uint64_t v = util::splitmix64(base ^ seeds[i]);
            if (v < sig.values[i]) sig.values[i] = v;
        }
    }
    return sig;
}

std::vector<std::uint64_t> shingle_hash_set(std::span<const std::string> shingles) {
    std::vector<std::uint64_t> hashes;
    hashes.reserve(shingles.size());
    for (const auto& s : shingles) hashes.push_back(util::stable_hash64(s));
    std::sort(hashes.begin(), hashes.end());
    hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
    return hashes;
}

double jaccard_sorted(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b); // keep the smaller index as root -> stable ids
        parent[b] = a;
    }
};

void validate(const LshParams& params) {
    if (params.bands <= 0 || params.rows_per_band <= 0 ||
        params.bands * params.rows_per_band != kMinHashFunctions) {
        throw std::invalid_argument("lsh: bands * rows_per_band must equal " +
                                    std::to_string(kMinHashFunctions));
    }
}

} // namespace

std::vector<std::string> shingle(std::span<const std::string> tokens) {
    std::vector<std::string> out;
    if (tokens.size() < 3) {
        out.assign(tokens.begin(), tokens.end());
    } else {
        out.reserve(tokens.size() - 2);
        for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) {
            std::string s;
            s.reserve(tokens[i].size() + tokens[i + 1].size() + tokens[i + 2].size() + 2);
            s.append(tokens[i]);
            s.push_back('\x01');
            s.append(tokens[i + 1]);
            s.push_back('\x01');
            s.append(tokens[i + 2]);
            out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MinHashSignature minhash(std::span<const std::string> shingles, const LshParams& params) {
    validate(params);
    if (shingles.empty()) throw std::invalid_argument("minhash: empty shingle set");
    return minhash_from_hashes(shingle_hash_set(shingles), params);
}

double exact_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
    return jaccard_sorted(shingle_hash_set(a), shingle_hash_set(b));
}

std::vector<std::pair<std::size_t, std::size_t>> lsh_candidates(
    std::span<const MinHashSignature> signatures, const LshParams& params) {
    validate(params);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (int band = 0; band < params.bands; ++band) {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
        buckets.reserve(signatures.size() * 2);
        for (std::size_t idx = 0; idx < signatures.size(); ++idx) {
            std::uint64_t key = util::splitmix64(0xb5297a4d3e2f1a57ull + static_cast<std::uint64_t>(band));
            for (int r = 0; r < params.rows_per_band; ++r) {
                key = util::splitmix64(key ^ signatures[idx].values[band * params.rows_per_band + r]);
            }
            buckets[key].push_back(idx);
        }
        for (const auto& [key, members] : buckets) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    pairs.emplace_back(members[i], members[j]);
                }
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    return pairs;
}

std::vector<ShingledMessage> compute_signatures(std::span<const ClusterInput> inputs,
                                                const LshParams& params, ExecMode mode) {
    validate(params);
    std::vector<ShingledMessage> out(inputs.size());
    util::parallel_for(inputs.size(), mode, [&](std::size_t i) {
        auto shingles = shingle(inputs[i].tokens);
        out[i].shingle_hashes = shingle_hash_set(shingles);
        if (!out[i].shingle_hashes.empty()) {
            out[i].signature = minhash_from_hashes(out[i].shingle_hashes, params);
        }
    });
    return out;
}

std::vector<MessageCluster> build_clusters(std::span<const ClusterInput> inputs,
                                           const ClusterParams& params, ExecMode mode) {
    const std::size_t n = inputs.size();
    auto shingled = compute_signatures(inputs, params.lsh, mode);

    // Fold exact duplicates (identical shingle sets) onto one representative:
    // they share every cluster decision, so only representatives go through LSH.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_set_hash;
    std::vector<std::size_t> dup_of(n); // index of the representative for each input
    std::vector<std::size_t> reps;
    reps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (shingled[i].shingle_hashes.empty()) {
            dup_of[i] = i; // token-less message: always a singleton
            continue;
        }
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint64_t v : shingled[i].shingle_hashes) h = util::splitmix64(h ^ v);
        auto& bucket = by_set_hash[h];
        std::size_t rep = i;
        for (std::size_t cand : bucket) {
            if (shingled[cand].shingle_hashes == shingled[i].shingle_hashes) {
                rep = cand;
                break;
            }
        }
        dup_of[i] = rep;
        if (rep == i) {
            bucket.push_back(i);
            reps.push_back(i);
        }
    }

    std::vector<MinHashSignature> rep_sigs(reps.size());
    for (std::size_t k = 0; k < reps.size(); ++k) rep_sigs[k] = shingled[reps[k]].signature;
    auto candidates = lsh_candidates(rep_sigs, params.lsh);

    // Verify every candidate pair with exact Jaccard (parallel map).
    std::vector<char> edge_ok(candidates.size(), 0);
    util::parallel_for(candidates.size(), mode, [&](std::size_t k) {
        const auto& [a, b] = candidates[k];
        double j = jaccard_sorted(shingled[reps[a]].shingle_hashes,
                                  shingled[reps[b]].shingle_hashes);
        edge_ok[k] = j >= params.verify_jaccard ? 1 : 0;
    });

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) uf.unite(dup_of[i], i);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (edge_ok[k]) uf.unite(reps[candidates[k].first], reps[candidates[k].second]);
    }

    // Components in first-seen input order.
    std::unordered_map<std::size_t, std::size_t> root_to_cluster;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t root = uf.find(i);
        auto [it, inserted] = root_to_cluster.try_emplace(root, members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(i);
    }

    std::vector<MessageCluster> clusters(members.size());
    for (std::size_t c = 0; c < members.size(); ++c) {
        MessageCluster& cl = clusters[c];
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "c%06zu", c);
        cl.cluster_id = idbuf;

        // Representative: member with median codepoint length, ties on msg_id.
        std::vector<std::pair<std::size_t, std::size_t>> by_len; // (len, input idx)
        for (std::size_t idx : members[c]) {
            cl.member_msg_ids.push_back(inputs[idx].msg_id);
            cl.daily_counts[epoch_day(inputs[idx].timestamp)]++;
            cl.group_ids.insert(inputs[idx].group_id);
            by_len.emplace_back(util::codepoint_count(inputs[idx].text), idx);
        }
        std::sort(by_len.begin(), by_len.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return inputs[a.second].msg_id < inputs[b.second].msg_id;
        });
        cl.representative_text = inputs[by_len[(by_len.size() - 1) / 2].second].text;
        std::sort(cl.member_msg_ids.begin(), cl.member_msg_ids.end());
    }
    return clusters;
}

std::vector<MessageCluster> frequent_clusters(const std::vector<MessageCluster>& clusters,
                                              std::size_t min_size) {
    std::vector<MessageCluster> out;
    for (const auto& c : clusters) {
        if (c.size() >= min_size) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const MessageCluster& a, const MessageCluster& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.cluster_id < b.cluster_id;
    });
    return out;
}

} // namespace groupsift
