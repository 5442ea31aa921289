#pragma once

#include "groupsift/corpus.hpp"
#include "groupsift/signals.hpp"
#include "groupsift/textprep.hpp"
#include "groupsift/util/parallel.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace groupsift {

inline constexpr std::size_t kContentDim = 768;

/// Fixed-width message embedding.
struct ContentVector {
    std::array<float, kContentDim> values{};

    bool operator==(const ContentVector&) const = default;
};

/// Pluggable text->vector interface. The default provider hashes tokens; a
/// transformer-backed provider would slot in here without touching callers.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual ContentVector embed(std::span<const std::string> tokens) const = 0;
    virtual std::string name() const = 0;
};

/// Signed feature hashing into kContentDim buckets, L2-normalized. Embedding
/// an empty token list yields the zero vector.
class HashingEmbedder final : public EmbeddingProvider {
public:
    ContentVector embed(std::span<const std::string> tokens) const override;
    std::string name() const override { return "hashing-768"; }
};

/// Batch kernel: stopword-filter each message's tokens (messages tagged
/// `other` keep all tokens), then embed. Serial/parallel agree bit-exactly.
std::vector<ContentVector> embed_batch(std::span<const TokenizedMessage> messages,
                                       const EmbeddingProvider& provider,
                                       const StopwordTable& stopwords,
                                       ExecMode mode = ExecMode::parallel);

enum class ProfileScope { global, per_group };

/// Per-user behavioral profile. Post counts split by the 2-bit signal; a
/// message carrying both a URL and a phone number increments both counts.
struct MetadataProfile {
    UserRef user;
    std::string group_id; // empty under global scope

    std::uint64_t posted_simple = 0;
    std::uint64_t posted_url = 0;
    std::uint64_t posted_phone = 0;
    std::uint64_t joined_via_link = 0;
    std::uint64_t added = 0;
    std::uint64_t added_by_admin = 0;
    std::uint64_t left = 0;
    std::uint64_t removed = 0;
    std::uint64_t number_changed = 0;

    std::uint64_t posts_total = 0;   // actual number of messages sent
    bool non_domestic = false;
    std::uint64_t total_actions = 0; // sum of the nine counts above

    bool operator==(const MetadataProfile&) const = default;
};

struct ProfileOptions {
    int min_actions = 2; // drop profiles with fewer recorded actions
    ProfileScope scope = ProfileScope::global;
    std::string domestic_cc = "91";
};

/// Aggregate corpus + per-message signals into profiles. `signals` must be
/// aligned with corpus.messages. Output sorted by (group, user key).
std::vector<MetadataProfile> build_profiles(const Corpus& corpus,
                                            std::span<const ContentSignal> signals,
                                            const ProfileOptions& opts = {});

/// Which feature columns a profile matrix carries. Without the content signal
/// the three post counts collapse into one `posted_any` column (the ablation
/// variant). `include_removed=false` drops the removed count — required when
/// the supervision label is itself "was removed", to avoid target leakage.
struct FeatureSpec {
    bool with_signal = true;
    bool include_removed = true;

    std::vector<std::string> names() const;
};

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data; // row-major
    std::vector<std::string> feature_names;

    std::span<const float> row(std::size_t r) const {
        return std::span<const float>(data).subspan(r * cols, cols);
    }
    void push_row(std::span<const float> values);
};

FeatureMatrix build_feature_matrix(std::span<const MetadataProfile> profiles,
                                   const FeatureSpec& spec);

} // namespace groupsift
