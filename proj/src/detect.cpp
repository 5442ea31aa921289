#include "groupsift/detect.hpp"

#include "groupsift/util/hash.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace groupsift {

ContentVector HashingEmbedder::embed(std::span<const std::string> tokens) const {
    ContentVector v;
    for (const auto& t : tokens) {
        std::uint64_t h = util::stable_hash64(t);
        std::size_t bucket = h % kContentDim;
        float sign = (util::splitmix64(h) & 1) ? 1.0f : -1.0f;
        v.values[bucket] += sign;
    }
    double norm_sq = 0.0;
    for (float x : v.values) norm_sq += static_cast<double>(x) * x;
    if (norm_sq > 0.0) {
        const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
        for (float& x : v.values) x *= inv;
    }
    return v;
}

std::vector<ContentVector> embed_batch(std::span<const TokenizedMessage> messages,
                                       const EmbeddingProvider& provider,
                                       const StopwordTable& stopwords, ExecMode mode) {
    std::vector<ContentVector> out(messages.size());
    util::parallel_for(messages.size(), mode, [&](std::size_t i) {
        const TokenizedMessage& m = messages[i];
        if (m.language == Lang::other) {
            out[i] = provider.embed(m.tokens);
        } else {
            out[i] = provider.embed(remove_stopwords(m.tokens, m.language, stopwords));
        }
    });
    return out;
}

std::vector<MetadataProfile> build_profiles(const Corpus& corpus,
                                            std::span<const ContentSignal> signals,
                                            const ProfileOptions& opts) {
    if (signals.size() != corpus.messages.size()) {
        throw std::invalid_argument("build_profiles: signals must align with corpus messages");
    }
    // Key: (group under per-group scope, user key).
    std::map<std::pair<std::string, std::string>, MetadataProfile> acc;
    auto slot = [&](const UserRef& user, const std::string& group) -> MetadataProfile& {
        std::string g = opts.scope == ProfileScope::per_group ? group : std::string();
        auto [it, inserted] = acc.try_emplace({g, user.key()});
        if (inserted) {
            it->second.user = user;
            it->second.group_id = g;
            it->second.non_domestic = user.country_code != opts.domestic_cc;
        }
        return it->second;
    };

    for (std::size_t i = 0; i < corpus.messages.size(); ++i) {
        const Message& m = corpus.messages[i];
        MetadataProfile& p = slot(m.sender, m.group_id);
        ++p.posts_total;
        const ContentSignal& s = signals[i];
        if (s.value() == 0) ++p.posted_simple;
        if (s.has_url) ++p.posted_url;
        if (s.has_phone) ++p.posted_phone;
    }
    for (const auto& e : corpus.events) {
        MetadataProfile& p = slot(e.subject, e.group_id);
        switch (e.kind) {
            case ActionKind::added: ++p.added; break;
            case ActionKind::added_by_admin: ++p.added_by_admin; break;
            case ActionKind::joined_via_link: ++p.joined_via_link; break;
            case ActionKind::left: ++p.left; break;
            case ActionKind::removed: ++p.removed; break;
            case ActionKind::number_changed: ++p.number_changed; break;
        }
    }

    std::vector<MetadataProfile> out;
    out.reserve(acc.size());
    for (auto& [key, p] : acc) {
        p.total_actions = p.posted_simple + p.posted_url + p.posted_phone + p.joined_via_link +
                          p.added + p.added_by_admin + p.left + p.removed + p.number_changed;
        if (p.total_actions >= static_cast<std::uint64_t>(opts.min_actions)) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<std::string> FeatureSpec::names() const {
    std::vector<std::string> n;
    if (with_signal) {
        n = {"posted_simple", "posted_url", "posted_phone"};
    } else {
        n = {"posted_any"};
    }
    n.insert(n.end(), {"joined_via_link", "added", "added_by_admin", "left"});
    if (include_removed) n.push_back("removed");
    n.insert(n.end(), {"number_changed", "non_domestic"});
    return n;
}

void FeatureMatrix::push_row(std::span<const float> values) {
    if (cols == 0) cols = values.size();
    if (values.size() != cols) throw std::invalid_argument("feature row width mismatch");
    data.insert(data.end(), values.begin(), values.end());
    ++rows;
}

FeatureMatrix build_feature_matrix(std::span<const MetadataProfile> profiles,
                                   const FeatureSpec& spec) {
    FeatureMatrix X;
    X.feature_names = spec.names();
    X.cols = X.feature_names.size();
    X.data.reserve(profiles.size() * X.cols);
    std::vector<float> row;
    for (const auto& p : profiles) {
        row.clear();
        if (spec.with_signal) {
            row.push_back(static_cast<float>(p.posted_simple));
            row.push_back(static_cast<float>(p.posted_url));
            row.push_back(static_cast<float>(p.posted_phone));
        } else {
            row.push_back(static_cast<float>(p.posts_total));
        }
        row.push_back(static_cast<float>(p.joined_via_link));
        row.push_back(static_cast<float>(p.added));
        row.push_back(static_cast<float>(p.added_by_admin));
        row.push_back(static_cast<float>(p.left));
        if (spec.include_removed) row.push_back(static_cast<float>(p.removed));
        row.push_back(static_cast<float>(p.number_changed));
        row.push_back(p.non_domestic ? 1.0f : 0.0f);
        X.push_row(row);
    }
    return X;
}

} // namespace groupsift
